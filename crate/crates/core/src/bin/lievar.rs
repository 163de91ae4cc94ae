fn main() {
    std::process::exit(lievar::cli::run(std::env::args_os()));
}

//! Command-line front end of the `lievar` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod studies;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{cmd_check, cmd_integrate, cmd_solve, EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_OK};
pub use config::{Overrides, ProblemConfig};
pub use output::{read_rows, write_rows, TrajectoryRow};

#[derive(Debug, Parser)]
#[command(name = "lievar", version, about = "Discrete variational mechanics and optimal control on Lie groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a rigid-body or rod optimal control problem.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Trajectory CSV.
        #[arg(long)]
        output: PathBuf,
        /// JSON solve report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Overrides the retraction of the config (cayley, exp1, exp2, exp4).
        #[arg(long)]
        retraction: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Step the discrete Newton's law of a vector-space system.
    Integrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run a named validation study.
    Check {
        /// retraction-identities, del-oracle, dep2-consistency, momentum or rod-schemes.
        study: String,
        /// JSON report.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Solve {
            config,
            output,
            report,
            retraction,
            tol,
            max_iter,
        } => {
            let overrides = Overrides {
                retraction,
                tol,
                max_iter,
            };
            cmd_solve(&config, &output, report.as_deref(), &overrides)
        }
        Command::Integrate { config, output } => cmd_integrate(&config, &output),
        Command::Check { study, output, seed } => cmd_check(&study, output.as_deref(), seed),
    }
}

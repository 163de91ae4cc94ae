//! End-to-end runs of the `lievar` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn lievar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lievar")).args(args).output().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Header and numeric cells of a CSV file; empty cells become `None`.
fn columns(path: &Path) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|c| c.parse().ok()).collect())
        .collect();
    (header, rows)
}

#[test]
fn integrate_free_particle_moves_uniformly() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "free.json",
        r#"{"M": [1,0,0, 0,1,0, 0,0,1], "q0": [0,0,0], "q1": [0.1,0,0], "N": 20, "h": 0.1}"#,
    );
    let out = dir.path().join("free.csv");
    let o = lievar(&["integrate", "--config", s(&cfg), "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = columns(&out);
    assert_eq!(header, ["k", "t", "q1", "q2", "q3", "p1", "p2", "p3", "E"]);
    assert_eq!(rows.len(), 21);
    for (k, row) in rows.iter().enumerate() {
        assert!((row[2].unwrap() - 0.1 * k as f64).abs() < 1e-13);
        assert_eq!(row[3], Some(0.0));
        if k < 20 {
            assert!((row[5].unwrap() - 1.0).abs() < 1e-12);
            assert!((row[8].unwrap() - 0.5).abs() < 1e-12);
        } else {
            assert!(row[5..].iter().all(Option::is_none));
        }
    }
}

#[test]
fn integrate_harmonic_energy_stays_bounded() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "osc.json",
        r#"{"M": [1,0, 0,2], "V": [0, 0, 0.5], "q0": [1, 0], "q1": [0.995, 0.08], "N": 10000, "h": 0.1}"#,
    );
    let out = dir.path().join("osc.csv");
    let o = lievar(&["integrate", "--config", s(&cfg), "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = columns(&out);
    let e: Vec<f64> = rows.iter().filter_map(|r| r[6]).collect();
    assert_eq!(e.len(), 10_000);
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let (first, last) = (mean(&e[..1000]), mean(&e[9000..]));
    assert!((last - first).abs() <= 0.01 * first, "secular drift {first} -> {last}");
    let spread = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - e.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread <= 0.05 * first, "energy spread {spread}");
}

#[test]
fn integrate_rejects_mismatched_dimensions() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.json", r#"{"M": [1,0,0,1], "q0": [0,0,0], "q1": [0,0,0], "N": 3, "h": 0.1}"#);
    let o = lievar(&["integrate", "--config", s(&cfg), "--output", s(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_runs_a_study_and_writes_its_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("study.json");
    let o = lievar(&["check", "retraction-identities", "--output", s(&out), "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().count() > 0 && stdout.lines().all(|l| l.starts_with("PASS")));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["seed"], 3);
    assert_eq!(report["passed"], true);
}

#[test]
fn check_rejects_unknown_study() {
    let o = lievar(&["check", "no-such-study"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown study"));
}

const IDENTITY: &str = "[1,0,0, 0,1,0, 0,0,1]";

fn rigid(rt: &str, extra: &str) -> String {
    format!(
        r#"{{"problem": "rigid-body", "rho": [1, -1, 0.5], "R0": {IDENTITY}, "RT": {rt},
"Omega0": [0.2, 0.1, 0], "N": 8, "h": 0.1{extra}}}"#
    )
}

#[test]
fn solve_reports_non_convergence_with_exit_two() {
    let dir = TempDir::new().unwrap();
    // Half a turn about z is far from the initial guess.
    let cfg = write(&dir, "far.json", &rigid("[-1,0,0, 0,-1,0, 0,0,1]", ""));
    let rep = dir.path().join("far-report.json");
    let o = lievar(&[
        "solve", "--config", s(&cfg), "--output", s(&dir.path().join("far.csv")),
        "--report", s(&rep), "--max-iter", "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(report["converged"], false);
}

#[test]
fn solve_rejects_bad_configs_with_exit_one() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o.csv");
    let cases = [
        ("malformed.json", "{\"problem\": ".to_string(), "malformed config"),
        ("unknown.json", rigid(IDENTITY, r#", "colour": "red""#), "unknown field"),
        ("step.json", rigid(IDENTITY, "").replace("\"h\": 0.1", "\"h\": -0.1"), "h"),
    ];
    for (name, text, needle) in cases {
        let cfg = write(&dir, name, &text);
        let o = lievar(&["solve", "--config", s(&cfg), "--output", s(&out)]);
        assert_eq!(o.status.code(), Some(1), "{name}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(needle), "{name}");
    }
    let cfg = write(&dir, "ok.json", &rigid(IDENTITY, ""));
    let o = lievar(&["solve", "--config", s(&cfg), "--output", s(&out), "--retraction", "quaternion"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn solve_writes_a_rod_trajectory() {
    let dir = TempDir::new().unwrap();
    let k: Vec<String> = (0..36)
        .map(|i| if i % 7 == 0 { if i < 21 { "2" } else { "1" } } else { "0" }.to_string())
        .collect();
    let cfg = write(
        &dir,
        "rod.json",
        &format!(
            r#"{{"problem": "rod", "K": [{}], "phi_bar": [0,0,0,1,0,0], "rho1": 1,
"Phi0": [1,0,0, 0,1,0, 0,0,1, 0,0,0], "PhiT": [1,0,0, 0,1,0, 0,0,1, 1,0,0],
"phi0": [0,0,0,1,0,0], "N": 10, "h": 0.1, "scheme": "direct-truncated"}}"#,
            k.join(",")
        ),
    );
    let out = dir.path().join("rod.csv");
    let o = lievar(&["solve", "--config", s(&cfg), "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = lievar::cli::read_rows(&out).unwrap();
    assert_eq!(rows.len(), 11);
    // The straight unstressed rod is its own optimum.
    let last = rows[10].translation.unwrap();
    assert!((last.x - 1.0).abs() < 1e-9 && last.y.abs() < 1e-9);
    assert!(rows[..9].iter().all(|r| r.controls.as_ref().unwrap().iter().all(|c| c.abs() < 1e-8)));
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(lievar(&["--help"]).status.code(), Some(0));
    assert_eq!(lievar(&["frobnicate"]).status.code(), Some(1));
}

//! The `solve`, `integrate` and `check` commands. Each returns the process
//! exit code: 0 on success, 2 when a solve did not converge, 1 on
//! configuration errors.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::config::{read_config, IntegrateConfig, Overrides, Problem};
use super::output::{fmt_f64, rigid_rows, rod_rows, write_json, write_rows};
use super::studies::{run_study, STUDIES};
use crate::control::{solve_rigid_body, solve_rod, SolveReport};
use crate::mechanics::{integrate_newton, PolynomialPotential, Potential};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Serialize)]
struct SolveSummary {
    problem: &'static str,
    converged: bool,
    iterations: usize,
    residual: f64,
    cost: Option<f64>,
    terminal_error: Option<f64>,
    wall_time: f64,
    history: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

impl SolveSummary {
    fn from_report(problem: &'static str, report: &SolveReport, cost: f64) -> Self {
        Self {
            problem,
            converged: report.converged,
            iterations: report.iterations,
            residual: report.residual_norm,
            cost: Some(cost),
            terminal_error: report.terminal_error,
            wall_time: report.wall_time,
            history: report.history.clone(),
            message: report.message.clone(),
        }
    }

    fn failed(problem: &'static str, message: String) -> Self {
        Self {
            problem,
            converged: false,
            iterations: 0,
            residual: f64::NAN,
            cost: None,
            terminal_error: None,
            wall_time: 0.0,
            history: Vec::new(),
            message: Some(message),
        }
    }
}

pub fn cmd_solve(config: &Path, output: &Path, report: Option<&Path>, overrides: &Overrides) -> i32 {
    let cfg = match read_config(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let built = cfg.build(overrides).and_then(|p| Ok((p, cfg.newton_config(overrides)?)));
    let (problem, newton) = match built {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let (name, solved) = match &problem {
        Problem::RigidBody(p) => (
            "rigid-body",
            solve_rigid_body(p, &newton).map(|s| (rigid_rows(&s), SolveSummary::from_report("rigid-body", &s.report, s.cost))),
        ),
        Problem::Rod(p) => (
            "rod",
            solve_rod(p, &newton).map(|s| (rod_rows(&s), SolveSummary::from_report("rod", &s.report, s.cost))),
        ),
    };
    let rod = matches!(problem, Problem::Rod(_));
    let summary = match solved {
        Ok((rows, summary)) => {
            if let Err(e) = write_rows(output, &rows, rod) {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
            summary
        }
        Err(e) => {
            eprintln!("solver failed: {e}");
            SolveSummary::failed(name, e.to_string())
        }
    };
    if let Some(path) = report {
        if let Err(e) = write_json(path, &summary) {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    }
    if summary.converged {
        EXIT_OK
    } else {
        eprintln!(
            "not converged: residual {:e} after {} iterations",
            summary.residual, summary.iterations
        );
        EXIT_NOT_CONVERGED
    }
}

/// Discrete energy `½ vᵀMv + ½(V(q_k) + V(q_{k+1}))` with `v = (q_{k+1} − q_k)/h`.
fn step_energy(mass: &DMatrix<f64>, v: &dyn Potential, a: &DVector<f64>, b: &DVector<f64>, h: f64) -> f64 {
    let vel = (b - a) / h;
    0.5 * vel.dot(&(mass * &vel)) + 0.5 * (v.value(a) + v.value(b))
}

pub fn cmd_integrate(config: &Path, output: &Path) -> i32 {
    let cfg = match IntegrateConfig::read(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let n = cfg.dim();
    let mass = DMatrix::from_row_slice(n, n, &cfg.mass);
    let potential = Arc::new(PolynomialPotential::new(cfg.potential.clone()));
    let q0 = DVector::from_vec(cfg.q0.clone());
    let q1 = DVector::from_vec(cfg.q1.clone());
    let qs = match integrate_newton(&mass, potential.as_ref(), &q0, &q1, cfg.n, cfg.h) {
        Ok(q) => q,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut header = vec!["k".to_string(), "t".to_string()];
    header.extend((1..=n).map(|i| format!("q{i}")));
    header.extend((1..=n).map(|i| format!("p{i}")));
    header.push("E".into());
    let write = || -> Result<(), String> {
        let mut w = ::csv::Writer::from_path(output).map_err(|e| e.to_string())?;
        w.write_record(&header).map_err(|e| e.to_string())?;
        for (k, q) in qs.iter().enumerate() {
            let mut rec = vec![k.to_string(), fmt_f64(k as f64 * cfg.h)];
            rec.extend(q.iter().map(|x| fmt_f64(*x)));
            match qs.get(k + 1) {
                Some(next) => {
                    let p = &mass * (next - q) / cfg.h;
                    rec.extend(p.iter().map(|x| fmt_f64(*x)));
                    rec.push(fmt_f64(step_energy(&mass, potential.as_ref(), q, next, cfg.h)));
                }
                None => rec.extend(std::iter::repeat(String::new()).take(n + 1)),
            }
            w.write_record(&rec).map_err(|e| e.to_string())?;
        }
        w.flush().map_err(|e| e.to_string())
    };
    match write() {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: cannot write {}: {e}", output.display());
            EXIT_CONFIG
        }
    }
}

pub fn cmd_check(study: &str, output: Option<&Path>, seed: u64) -> i32 {
    let Some(result) = run_study(study, seed) else {
        eprintln!("error: unknown study '{study}' (expected one of {})", STUDIES.join(", "));
        return EXIT_CONFIG;
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("study {study} failed to run: {e}");
            return EXIT_NOT_CONVERGED;
        }
    };
    for c in &report.checks {
        println!(
            "{} {}: {:e} {} {:e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.relation,
            c.threshold
        );
    }
    if let Some(path) = output {
        if let Err(e) = write_json(path, &report) {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    }
    if report.passed {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

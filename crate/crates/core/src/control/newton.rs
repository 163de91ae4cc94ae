//! Damped Newton iteration with a central finite-difference Jacobian.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    /// Threshold on `‖F‖_∞`.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative Jacobian step: column `i` uses `fd_step · max(1, |xᵢ|)`.
    pub fd_step: f64,
    /// Step contraction factor of the backtracking line search.
    pub contraction: f64,
    /// Sufficient-decrease constant on `½‖F‖²`.
    pub sufficient_decrease: f64,
    pub max_backtracks: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            fd_step: 1e-6,
            contraction: 0.5,
            sufficient_decrease: 1e-4,
            max_backtracks: 30,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tol > 0.0
            && self.fd_step > 0.0
            && self.contraction > 0.0
            && self.contraction < 1.0
            && self.sufficient_decrease > 0.0
            && self.sufficient_decrease < 1.0;
        if !ok {
            return Err(Error::InvalidArgument(
                "Newton settings need tol > 0, fd_step > 0 and factors in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    /// Final `‖F‖_∞`.
    pub residual_norm: f64,
    /// `‖F‖_∞` at the initial point and after every iteration.
    pub history: Vec<f64>,
    /// Seconds spent in the solve.
    pub wall_time: f64,
    /// `‖g_N − g(T)‖_F` after reconstruction, filled in by the problem solvers.
    pub terminal_error: Option<f64>,
    /// Why the iteration stopped when it did not converge.
    pub message: Option<String>,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// Central finite-difference Jacobian, columns evaluated in parallel.
pub fn fd_jacobian_parallel<F>(f: &F, x: &DVector<f64>, rel_step: f64, rows: usize) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>> + Sync,
{
    let cols: Vec<Result<DVector<f64>>> = (0..x.len())
        .into_par_iter()
        .map(|i| {
            let step = rel_step * x[i].abs().max(1.0);
            let mut xp = x.clone();
            xp[i] += step;
            let mut xm = x.clone();
            xm[i] -= step;
            let col = (f(&xp)? - f(&xm)?) / (2.0 * step);
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
            Ok(col)
        })
        .collect();
    let mut jac = DMatrix::zeros(rows, x.len());
    for (i, c) in cols.into_iter().enumerate() {
        let c = c?;
        if c.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: c.len(),
            });
        }
        jac.set_column(i, &c);
    }
    Ok(jac)
}

fn newton_direction(jac: &DMatrix<f64>, fx: &DVector<f64>) -> Option<DVector<f64>> {
    let direct = jac.clone().lu().solve(&(-fx));
    if let Some(d) = direct {
        if d.iter().all(|v| v.is_finite()) {
            return Some(d);
        }
    }
    // Tikhonov-regularized normal equations
    let shift = 1e-8 * jac.norm().max(f64::MIN_POSITIVE);
    let n = jac.ncols();
    let lhs = jac.transpose() * jac + DMatrix::identity(n, n) * (shift * shift);
    let rhs = -(jac.transpose() * fx);
    lhs.cholesky()
        .map(|c| c.solve(&rhs))
        .filter(|d| d.iter().all(|v| v.is_finite()))
}

/// Solves `F(x) = 0` for square `F`. A report is always returned; only a
/// failure at the initial point or a non-square system is an error.
pub fn newton_solve<F>(f: F, x0: &DVector<f64>, config: &NewtonConfig) -> Result<(DVector<f64>, SolveReport)>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>> + Sync,
{
    config.validate()?;
    let start = Instant::now();
    let mut x = x0.clone();
    let mut fx = f(&x)?;
    if fx.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: fx.len(),
        });
    }
    if let Some(i) = fx.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut history = vec![inf_norm(&fx)];
    let mut iterations = 0;
    let mut message = None;

    while inf_norm(&fx) > config.tol {
        if iterations >= config.max_iter {
            message = Some(format!("maximum of {} iterations reached", config.max_iter));
            break;
        }
        let jac = match fd_jacobian_parallel(&f, &x, config.fd_step, fx.len()) {
            Ok(j) => j,
            Err(e) => {
                message = Some(format!("Jacobian evaluation failed: {e}"));
                break;
            }
        };
        let Some(dir) = newton_direction(&jac, &fx) else {
            message = Some("Jacobian is singular even after regularization".into());
            break;
        };
        let merit = 0.5 * fx.norm_squared();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=config.max_backtracks {
            let trial = &x + &dir * t;
            if let Ok(ft) = f(&trial) {
                if ft.iter().all(|v| v.is_finite())
                    && 0.5 * ft.norm_squared() <= merit * (1.0 - 2.0 * config.sufficient_decrease * t)
                {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            t *= config.contraction;
        }
        let Some((xn, fxn)) = accepted else {
            message = Some("line search failed to reduce the residual".into());
            break;
        };
        x = xn;
        fx = fxn;
        iterations += 1;
        history.push(inf_norm(&fx));
    }

    let residual_norm = inf_norm(&fx);
    let converged = residual_norm <= config.tol;
    Ok((
        x,
        SolveReport {
            converged,
            iterations,
            residual_norm,
            history,
            wall_time: start.elapsed().as_secs_f64(),
            terminal_error: None,
            message: if converged { None } else { message },
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_system_in_one_iteration() {
        let c = DVector::from_vec(vec![1.0, -2.0, 3.5]);
        // The difference Jacobian of an affine map is exact up to rounding.
        let cfg = NewtonConfig {
            tol: 1e-8,
            ..Default::default()
        };
        let (x, rep) = newton_solve(|x: &DVector<f64>| Ok(x - &c), &DVector::zeros(3), &cfg).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        assert!((x - c).norm() < 1e-8);
    }

    #[test]
    fn square_root_iterates() {
        let f = |x: &DVector<f64>| Ok(DVector::from_vec(vec![x[0] * x[0] - 4.0]));
        let cfg = NewtonConfig {
            tol: 1e-12,
            ..Default::default()
        };
        let (x, rep) = newton_solve(f, &DVector::from_vec(vec![3.0]), &cfg).unwrap();
        assert!(rep.converged && rep.iterations <= 6);
        assert!((x[0] - 2.0).abs() < 1e-12);
        // classical iterates 3 → 2.1667 → 2.0064
        assert!((rep.history[1] - (2.1666666666666667f64.powi(2) - 4.0)).abs() < 1e-6);
        assert!((rep.history[2] - (2.0064102564102564f64.powi(2) - 4.0)).abs() < 1e-6);
    }

    #[test]
    fn non_convergence_is_reported() {
        let f = |x: &DVector<f64>| Ok(DVector::from_vec(vec![x[0] * x[0] + 1.0]));
        let cfg = NewtonConfig {
            max_iter: 5,
            ..Default::default()
        };
        let (_, rep) = newton_solve(f, &DVector::from_vec(vec![0.5]), &cfg).unwrap();
        assert!(!rep.converged);
        assert!(rep.message.is_some());
    }

    #[test]
    fn non_square_rejected() {
        let f = |_: &DVector<f64>| Ok(DVector::zeros(2));
        assert!(newton_solve(f, &DVector::zeros(3), &NewtonConfig::default()).is_err());
    }
}

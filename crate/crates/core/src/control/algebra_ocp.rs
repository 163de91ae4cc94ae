//! Boundary-value optimal control over algebra unknowns.
//!
//! Given `g₀`, `g(T)`, the pinned first velocity `ξ₀` and a reduced discrete
//! Lagrangian, the unknowns `ξ₁..ξ_{N−1}` are determined by the discrete
//! second-order Euler–Poincaré equations at `k = 2..N−1` together with the
//! terminal constraint `τ⁻¹(g_N⁻¹ g(T)) = 0`, where
//! `g_N = g₀ τ(hξ₀) ⋯ τ(hξ_{N−1})`. The cost is `Σ_{k=0}^{N−2} l_d(ξ_k, ξ_{k+1})`,
//! the pairs available without extrapolating `ξ_N`.

use std::sync::Arc;

use nalgebra::DVector;

use super::newton::{newton_solve, NewtonConfig, SolveReport};
use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, CoVector, GroupElement};
use crate::mechanics::{dep2_algebra_from_sums, ReducedDiscreteLagrangian, Trajectory};
use crate::retraction::Retraction;

/// Smallest number of steps for which an interior equation exists.
pub const MIN_STEPS: usize = 4;

/// `Σ_k l_d(ξ_k, ξ_{k+1})` over all consecutive pairs of `samples`.
pub fn discrete_cost<L: ReducedDiscreteLagrangian + ?Sized>(ld: &L, samples: &[AlgebraVector]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::WindowTooShort {
            needed: 2,
            got: samples.len(),
        });
    }
    for s in samples {
        if s.len() != ld.dim() {
            return Err(Error::DimensionMismatch {
                expected: ld.dim(),
                got: s.len(),
            });
        }
    }
    Ok(samples.windows(2).map(|w| ld.eval(&w[0], &w[1])).sum())
}

/// `τ⁻¹(τ(hξ_{N−1})⁻¹ ⋯ τ(hξ₀)⁻¹ g₀⁻¹ g(T))`, which vanishes exactly when the
/// reconstruction from `g₀` ends at `g(T)`.
pub fn terminal_constraint(
    retraction: &Retraction,
    h: f64,
    xis: &[AlgebraVector],
    g0: &GroupElement,
    gt: &GroupElement,
) -> Result<AlgebraVector> {
    let traj = Trajectory::reconstruct(g0, xis, retraction, h)?;
    let gn = traj.points.last().expect("reconstruction keeps g0");
    let mismatch = gn.inverse()?.compose(gt)?;
    retraction.tau_inv(&mismatch).map_err(|e| Error::DomainAt {
        index: xis.len(),
        message: format!("terminal constraint: {e}"),
    })
}

/// The square root-finding formulation of one control problem.
#[derive(Clone)]
pub struct AlgebraControlProblem {
    pub retraction: Retraction,
    pub lagrangian: Arc<dyn ReducedDiscreteLagrangian>,
    pub g0: GroupElement,
    pub gt: GroupElement,
    pub xi0: AlgebraVector,
    /// When set, `ξ_{N−1}` is pinned to this value and the `k = N−1`
    /// equation is dropped, keeping the system square.
    pub xi_final: Option<AlgebraVector>,
    pub n: usize,
    pub h: f64,
}

/// Result of [`AlgebraControlProblem::solve`].
#[derive(Debug, Clone)]
pub struct AlgebraSolution {
    /// `ξ₀..ξ_{N−1}`.
    pub xis: Vec<AlgebraVector>,
    pub trajectory: Trajectory,
    pub cost: f64,
    pub report: SolveReport,
}

impl AlgebraControlProblem {
    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_STEPS {
            return Err(Error::InvalidArgument(format!(
                "N must be at least {MIN_STEPS} (got {})",
                self.n
            )));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidArgument(format!("h must be positive (got {})", self.h)));
        }
        let group = self.retraction.group();
        group.check_dim(&self.xi0)?;
        if let Some(xf) = &self.xi_final {
            group.check_dim(xf)?;
        }
        if self.lagrangian.dim() != group.dim() {
            return Err(Error::DimensionMismatch {
                expected: group.dim(),
                got: self.lagrangian.dim(),
            });
        }
        if self.g0.group() != group || self.gt.group() != group {
            return Err(Error::GroupMismatch(self.g0.group().to_string(), group.to_string()));
        }
        Ok(())
    }

    fn dim(&self) -> usize {
        self.retraction.group().dim()
    }

    /// Number of free algebra samples.
    pub fn free_count(&self) -> usize {
        if self.xi_final.is_some() {
            self.n - 2
        } else {
            self.n - 1
        }
    }

    pub fn unknown_len(&self) -> usize {
        self.dim() * self.free_count()
    }

    /// `ξ₀..ξ_{N−1}` from the stacked unknowns.
    pub fn sequence(&self, x: &DVector<f64>) -> Result<Vec<AlgebraVector>> {
        if x.len() != self.unknown_len() {
            return Err(Error::DimensionMismatch {
                expected: self.unknown_len(),
                got: x.len(),
            });
        }
        let d = self.dim();
        let mut xis = Vec::with_capacity(self.n);
        xis.push(self.xi0.clone());
        for k in 0..self.free_count() {
            xis.push(x.rows(k * d, d).into_owned());
        }
        if let Some(xf) = &self.xi_final {
            xis.push(xf.clone());
        }
        Ok(xis)
    }

    /// Stacks `ξ₁..` (the free samples) back into one vector.
    pub fn stack(&self, xis: &[AlgebraVector]) -> DVector<f64> {
        let d = self.dim();
        let mut x = DVector::zeros(self.unknown_len());
        for k in 0..self.free_count() {
            x.rows_mut(k * d, d).copy_from(&xis[k + 1]);
        }
        x
    }

    /// `∂C_d/∂ξ_k` for `k = 0..N−1` with the truncated cost.
    fn cost_gradients(&self, xis: &[AlgebraVector]) -> Result<Vec<CoVector>> {
        let n = xis.len();
        let mut grads = vec![CoVector::zeros(self.dim()); n];
        for k in 0..n - 1 {
            grads[k] += self.lagrangian.d1(&xis[k], &xis[k + 1])?;
            grads[k + 1] += self.lagrangian.d2(&xis[k], &xis[k + 1])?;
        }
        Ok(grads)
    }

    /// Interior equations for `k = 2..=last` followed by the terminal constraint.
    pub fn residual(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let xis = self.sequence(x)?;
        let grads = self.cost_gradients(&xis)?;
        let d = self.dim();
        let last = if self.xi_final.is_some() { self.n - 2 } else { self.n - 1 };
        let mut out = DVector::zeros(self.unknown_len());
        for k in 2..=last {
            let block = dep2_algebra_from_sums(
                &self.retraction,
                self.h,
                &xis[k - 1],
                &xis[k],
                &grads[k - 1],
                &grads[k],
            )
            .map_err(|e| Error::DomainAt {
                index: k,
                message: e.to_string(),
            })?;
            out.rows_mut((k - 2) * d, d).copy_from(&block);
        }
        let term = terminal_constraint(&self.retraction, self.h, &xis, &self.g0, &self.gt)?;
        let off = self.unknown_len() - d;
        out.rows_mut(off, d).copy_from(&term);
        Ok(out)
    }

    pub fn cost(&self, xis: &[AlgebraVector]) -> Result<f64> {
        discrete_cost(self.lagrangian.as_ref(), xis)
    }

    /// Constant free samples `τ⁻¹(g₀⁻¹g(T))/(N h)`.
    pub fn initial_guess(&self) -> Result<DVector<f64>> {
        let rel = self.g0.inverse()?.compose(&self.gt)?;
        let xi = self.retraction.tau_inv(&rel)? / (self.n as f64 * self.h);
        let xis: Vec<_> = std::iter::repeat(xi).take(self.n).collect();
        Ok(self.stack(&xis))
    }

    pub fn solve_from(&self, x0: &DVector<f64>, config: &NewtonConfig) -> Result<AlgebraSolution> {
        self.validate()?;
        let (x, mut report) = newton_solve(|x: &DVector<f64>| self.residual(x), x0, config)?;
        let xis = self.sequence(&x)?;
        let trajectory = Trajectory::reconstruct(&self.g0, &xis, &self.retraction, self.h)?;
        let gn = trajectory.points.last().expect("non-empty");
        report.terminal_error = Some((gn.matrix() - self.gt.matrix()).norm());
        let cost = self.cost(&xis)?;
        Ok(AlgebraSolution {
            xis,
            trajectory,
            cost,
            report,
        })
    }

    pub fn solve(&self, config: &NewtonConfig) -> Result<AlgebraSolution> {
        self.validate()?;
        let x0 = self.initial_guess()?;
        self.solve_from(&x0, config)
    }
}

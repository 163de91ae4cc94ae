//! Fully actuated rigid body on SO(3):
//! `Ω̇₁ = ρ₁Ω₂Ω₃ + u₁`, `Ω̇₂ = ρ₂Ω₁Ω₃ + u₂`, `Ω̇₃ = ρ₃Ω₁Ω₂ + u₃`,
//! minimizing `∫ ½‖u‖² dt` between fixed attitudes.

use std::sync::Arc;

use nalgebra::{DVector, Matrix3, Vector3};

use super::algebra_ocp::{AlgebraControlProblem, AlgebraSolution};
use super::newton::{NewtonConfig, SolveReport};
use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, CoVector, Group, GroupElement};
use crate::mechanics::{ReducedDiscreteLagrangian, Trajectory};
use crate::retraction::{Retraction, RetractionKind};

fn coupling(omega: &Vector3<f64>, rho: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(
        rho.x * omega.y * omega.z,
        rho.y * omega.x * omega.z,
        rho.z * omega.x * omega.y,
    )
}

/// Jacobian of the coupling term with respect to `Ω`.
#[rustfmt::skip]
pub fn coupling_jacobian(omega: &Vector3<f64>, rho: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(
        0.0,             rho.x * omega.z, rho.x * omega.y,
        rho.y * omega.z, 0.0,             rho.y * omega.x,
        rho.z * omega.y, rho.z * omega.x, 0.0,
    )
}

/// Controls that realize `(Ω, Ω̇)`: `uᵢ = Ω̇ᵢ − ρᵢΩⱼΩₖ`.
pub fn rigid_controls(omega: &Vector3<f64>, omega_dot: &Vector3<f64>, rho: &Vector3<f64>) -> Vector3<f64> {
    omega_dot - coupling(omega, rho)
}

/// Inverse of [`rigid_controls`]: `Ω̇ = coupling(Ω) + u`.
pub fn rigid_dynamics(omega: &Vector3<f64>, u: &Vector3<f64>, rho: &Vector3<f64>) -> Vector3<f64> {
    coupling(omega, rho) + u
}

/// `l(Ω, Ω̇) = ½‖u(Ω, Ω̇)‖²`.
pub fn rigid_lagrangian(omega: &Vector3<f64>, omega_dot: &Vector3<f64>, rho: &Vector3<f64>) -> f64 {
    0.5 * rigid_controls(omega, omega_dot, rho).norm_squared()
}

fn v3(x: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(x[0], x[1], x[2])
}

fn dv(x: &Vector3<f64>) -> DVector<f64> {
    DVector::from_column_slice(x.as_slice())
}

/// `l_d(Ω_k, Ω_{k+1}) = h l(Ω_k, (Ω_{k+1} − Ω_k)/h)` with analytic gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidDiscreteLagrangian {
    pub rho: Vector3<f64>,
    pub h: f64,
}

impl RigidDiscreteLagrangian {
    pub fn new(rho: Vector3<f64>, h: f64) -> Self {
        Self { rho, h }
    }

    fn control(&self, w0: &AlgebraVector, w1: &AlgebraVector) -> Vector3<f64> {
        let a = v3(w0);
        rigid_controls(&a, &((v3(w1) - a) / self.h), &self.rho)
    }
}

impl ReducedDiscreteLagrangian for RigidDiscreteLagrangian {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, w0: &AlgebraVector, w1: &AlgebraVector) -> f64 {
        self.h * 0.5 * self.control(w0, w1).norm_squared()
    }

    fn d1(&self, w0: &AlgebraVector, w1: &AlgebraVector) -> Result<CoVector> {
        let u = self.control(w0, w1);
        let jc = coupling_jacobian(&v3(w0), &self.rho);
        Ok(dv(&(-u - jc.transpose() * u * self.h)))
    }

    fn d2(&self, w0: &AlgebraVector, w1: &AlgebraVector) -> Result<CoVector> {
        Ok(dv(&self.control(w0, w1)))
    }
}

/// Boundary data and discretization of the rigid-body problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidBodyProblem {
    pub rho: Vector3<f64>,
    pub r0: Matrix3<f64>,
    pub rt: Matrix3<f64>,
    pub omega0: Vector3<f64>,
    pub omega_t: Option<Vector3<f64>>,
    pub n: usize,
    pub h: f64,
    pub retraction: RetractionKind,
    /// Experimental: additionally pin `Ω_{N−1} = Ω(T)`.
    pub strict: bool,
}

/// Result of [`solve_rigid_body`].
#[derive(Debug, Clone)]
pub struct RigidSolution {
    /// `R₀..R_N` with `Ω₀..Ω_{N−1}` as algebra samples.
    pub trajectory: Trajectory,
    /// `u₀..u_{N−2}`; the last control would need `Ω_N`.
    pub controls: Vec<Vector3<f64>>,
    pub cost: f64,
    pub report: SolveReport,
}

impl RigidBodyProblem {
    pub fn new(
        rho: Vector3<f64>,
        r0: Matrix3<f64>,
        rt: Matrix3<f64>,
        omega0: Vector3<f64>,
        n: usize,
        h: f64,
    ) -> Self {
        Self {
            rho,
            r0,
            rt,
            omega0,
            omega_t: None,
            n,
            h,
            retraction: RetractionKind::Cayley,
            strict: false,
        }
    }

    pub fn retraction(&self) -> Retraction {
        Retraction::new(Group::So3, self.retraction)
    }

    pub fn to_algebra_problem(&self) -> Result<AlgebraControlProblem> {
        let xi_final = if self.strict {
            Some(dv(&self.omega_t.ok_or_else(|| {
                Error::InvalidArgument("strict mode needs a terminal velocity".into())
            })?))
        } else {
            None
        };
        let p = AlgebraControlProblem {
            retraction: self.retraction(),
            lagrangian: Arc::new(RigidDiscreteLagrangian::new(self.rho, self.h)),
            g0: GroupElement::from_so3(&self.r0)?,
            gt: GroupElement::from_so3(&self.rt)?,
            xi0: dv(&self.omega0),
            xi_final,
            n: self.n,
            h: self.h,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho.iter().chain(self.omega0.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("rho and Omega0 must be finite".into()));
        }
        self.to_algebra_problem().map(|_| ())
    }
}

/// Stacked residual for the unknowns `Ω₁..Ω_{N−1}`: the discrete second-order
/// Euler–Poincaré equations at `k = 2..N−1` and the terminal constraint,
/// `3(N−1)` entries in total.
pub fn assemble_rigid_residual(problem: &RigidBodyProblem, omegas: &DVector<f64>) -> Result<DVector<f64>> {
    problem.to_algebra_problem()?.residual(omegas)
}

/// `u_k = rigid_controls(Ω_k, (Ω_{k+1} − Ω_k)/h)` for `k = 0..len−2`.
pub fn recover_controls(omegas: &[AlgebraVector], rho: &Vector3<f64>, h: f64) -> Vec<Vector3<f64>> {
    omegas
        .windows(2)
        .map(|w| rigid_controls(&v3(&w[0]), &((v3(&w[1]) - v3(&w[0])) / h), rho))
        .collect()
}

fn finish(sol: AlgebraSolution, problem: &RigidBodyProblem) -> RigidSolution {
    let controls = recover_controls(&sol.xis, &problem.rho, problem.h);
    RigidSolution {
        trajectory: sol.trajectory,
        controls,
        cost: sol.cost,
        report: sol.report,
    }
}

/// Newton-solves the rigid-body problem from the constant initial guess.
pub fn solve_rigid_body(problem: &RigidBodyProblem, config: &NewtonConfig) -> Result<RigidSolution> {
    let p = problem.to_algebra_problem()?;
    Ok(finish(p.solve(config)?, problem))
}

/// As [`solve_rigid_body`], from caller-provided `Ω₁..` unknowns.
pub fn solve_rigid_body_from(
    problem: &RigidBodyProblem,
    x0: &DVector<f64>,
    config: &NewtonConfig,
) -> Result<RigidSolution> {
    let p = problem.to_algebra_problem()?;
    Ok(finish(p.solve_from(x0, config)?, problem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validation::fd_gradient;

    #[test]
    fn control_examples() {
        let rho = Vector3::new(1.0, 1.0, 1.0);
        let one = Vector3::new(1.0, 1.0, 1.0);
        assert_eq!(rigid_controls(&one, &Vector3::zeros(), &rho), -one);
        let wd = Vector3::new(0.3, -0.2, 0.9);
        assert_eq!(rigid_controls(&Vector3::zeros(), &wd, &rho), wd);
        assert_eq!(rigid_lagrangian(&one, &Vector3::zeros(), &rho), 1.5);
        let rho = Vector3::new(0.4, -1.0, 2.0);
        let w = Vector3::new(0.5, 1.5, -0.7);
        let u = rigid_controls(&w, &wd, &rho);
        assert!((rigid_dynamics(&w, &u, &rho) - wd).norm() < 1e-15);
    }

    #[test]
    fn discrete_lagrangian_examples_and_gradients() {
        let free = RigidDiscreteLagrangian::new(Vector3::zeros(), 0.1);
        let a = DVector::from_vec(vec![0.2, -0.1, 0.4]);
        let b = DVector::from_vec(vec![0.5, 0.3, -0.2]);
        assert_eq!(free.eval(&a, &a), 0.0);
        let expected = (&b - &a).norm_squared() / (2.0 * 0.1);
        assert!((free.eval(&a, &b) - expected).abs() < 1e-14);
        assert!((free.d2(&a, &b).unwrap() - (&b - &a) / 0.1).norm() < 1e-12);

        let ld = RigidDiscreteLagrangian::new(Vector3::new(1.0, -1.0, 0.5), 0.1);
        let g1 = fd_gradient(|x| ld.eval(x, &b), &a, 1e-6).unwrap();
        let g2 = fd_gradient(|x| ld.eval(&a, x), &b, 1e-6).unwrap();
        let d1 = ld.d1(&a, &b).unwrap();
        let d2 = ld.d2(&a, &b).unwrap();
        assert!((&g1 - &d1).norm() <= 1e-8 * d1.norm().max(1.0));
        assert!((&g2 - &d2).norm() <= 1e-8 * d2.norm().max(1.0));
    }
}

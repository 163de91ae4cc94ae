//! Fully actuated Cosserat rod on SE(3) with arclength as the evolution
//! variable. Strains are `φ = (u, v)`; the internal energy is
//! `V̄ = ½(φ − φ̄)ᵀK(φ − φ̄)` and the controls are the distributed force `f`
//! and moment `l` needed to hold the configuration.

use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DVector, Matrix3, Matrix4, Matrix6, SMatrix, Vector3, Vector6};

use super::algebra_ocp::{AlgebraControlProblem, AlgebraSolution};
use super::newton::{NewtonConfig, SolveReport};
use super::rod_direct;
use crate::error::{Error, Result};
use crate::lie::so3::hat3;
use crate::lie::{AlgebraVector, CoVector, Group, GroupElement};
use crate::mechanics::{ReducedDiscreteLagrangian, Trajectory};
use crate::retraction::{Retraction, RetractionKind};

type Matrix3x6 = SMatrix<f64, 3, 6>;

fn split(phi: &Vector6<f64>) -> (Vector3<f64>, Vector3<f64>) {
    (
        Vector3::new(phi[0], phi[1], phi[2]),
        Vector3::new(phi[3], phi[4], phi[5]),
    )
}

/// `(n, m)`: the translational and rotational parts of `K(φ − φ̄)`, i.e.
/// `∂V̄/∂v` and `∂V̄/∂u`.
pub fn rod_internal_forces(phi: &Vector6<f64>, k: &Matrix6<f64>, phi_bar: &Vector6<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let s = k * (phi - phi_bar);
    let (m, n) = split(&s);
    (n, m)
}

/// `f = −(ṅ + n×u)` and `l = −(ṁ + n×v + m×u)` with `(ṁ, ṅ) = Kφ̇`.
pub fn rod_controls(
    phi: &Vector6<f64>,
    phi_dot: &Vector6<f64>,
    k: &Matrix6<f64>,
    phi_bar: &Vector6<f64>,
) -> (Vector3<f64>, Vector3<f64>) {
    let (u, v) = split(phi);
    let (n, m) = rod_internal_forces(phi, k, phi_bar);
    let (m_dot, n_dot) = split(&(k * phi_dot));
    let f = -(n_dot + n.cross(&u));
    let l = -(m_dot + n.cross(&v) + m.cross(&u));
    (f, l)
}

/// `L(φ, φ̇) = ‖f‖² + ρ₁²‖l‖²`.
pub fn rod_lagrangian(
    phi: &Vector6<f64>,
    phi_dot: &Vector6<f64>,
    k: &Matrix6<f64>,
    phi_bar: &Vector6<f64>,
    rho1: f64,
) -> f64 {
    let (f, l) = rod_controls(phi, phi_dot, k, phi_bar);
    f.norm_squared() + rho1 * rho1 * l.norm_squared()
}

/// Rod model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RodModel {
    pub k: Matrix6<f64>,
    pub phi_bar: Vector6<f64>,
    pub rho1: f64,
}

impl RodModel {
    pub fn new(k: Matrix6<f64>, phi_bar: Vector6<f64>, rho1: f64) -> Self {
        Self { k, phi_bar, rho1 }
    }

    /// Symmetric with a positive smallest eigenvalue.
    pub fn validate(&self) -> Result<()> {
        let asym = (self.k - self.k.transpose()).norm();
        if asym > 1e-12 * self.k.norm().max(1.0) {
            return Err(Error::InvalidArgument(format!("K is not symmetric (asymmetry {asym:e})")));
        }
        let min_eig = self.k.symmetric_eigenvalues().min();
        if !(min_eig > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "K must be positive definite (smallest eigenvalue {min_eig:e})"
            )));
        }
        if !self.rho1.is_finite() || self.phi_bar.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("rho1 and phi_bar must be finite".into()));
        }
        Ok(())
    }

    pub fn controls(&self, phi: &Vector6<f64>, phi_dot: &Vector6<f64>) -> (Vector3<f64>, Vector3<f64>) {
        rod_controls(phi, phi_dot, &self.k, &self.phi_bar)
    }

    pub fn lagrangian(&self, phi: &Vector6<f64>, phi_dot: &Vector6<f64>) -> f64 {
        rod_lagrangian(phi, phi_dot, &self.k, &self.phi_bar, self.rho1)
    }

    /// `(∂L/∂φ, ∂L/∂φ̇)`.
    pub fn lagrangian_gradients(&self, phi: &Vector6<f64>, phi_dot: &Vector6<f64>) -> (Vector6<f64>, Vector6<f64>) {
        let (u, v) = split(phi);
        let (n, m) = rod_internal_forces(phi, &self.k, &self.phi_bar);
        let (f, l) = self.controls(phi, phi_dot);
        let km: Matrix3x6 = self.k.fixed_rows::<3>(0).into_owned();
        let kn: Matrix3x6 = self.k.fixed_rows::<3>(3).into_owned();
        let hu = hat3(&u);
        let hv = hat3(&v);
        // d(a×b) = −b̂ da + â db
        let hn = hat3(&n);
        let dnu = -hu * kn + place(&hn, 0);
        let dnv = -hv * kn + place(&hn, 3);
        let dmu = -hu * km + place(&hat3(&m), 0);
        let df_dphi = -dnu;
        let dl_dphi = -(dnv + dmu);
        let w = self.rho1 * self.rho1;
        let d_phi = (df_dphi.transpose() * f + dl_dphi.transpose() * l * w) * 2.0;
        let d_phi_dot = (kn.transpose() * f + km.transpose() * l * w) * -2.0;
        (d_phi, d_phi_dot)
    }
}

/// A 3×6 matrix holding `block` in columns `col..col+3`.
fn place(block: &Matrix3<f64>, col: usize) -> Matrix3x6 {
    let mut out = Matrix3x6::zeros();
    out.fixed_view_mut::<3, 3>(0, col).copy_from(block);
    out
}

pub(crate) fn v6(x: &DVector<f64>) -> Vector6<f64> {
    Vector6::from_column_slice(x.as_slice())
}

pub(crate) fn dv6(x: &Vector6<f64>) -> DVector<f64> {
    DVector::from_column_slice(x.as_slice())
}

/// `L_d(φ_k, φ_{k+1}) = h L(φ_k, (φ_{k+1} − φ_k)/h)` with analytic gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct RodDiscreteLagrangian {
    pub model: RodModel,
    pub h: f64,
}

impl RodDiscreteLagrangian {
    pub fn new(model: RodModel, h: f64) -> Self {
        Self { model, h }
    }

    /// `(D₁L_d, D₂L_d)` in one pass.
    pub fn gradients(&self, p0: &Vector6<f64>, p1: &Vector6<f64>) -> (Vector6<f64>, Vector6<f64>) {
        let (dp, dpd) = self.model.lagrangian_gradients(p0, &((p1 - p0) / self.h));
        (dp * self.h - dpd, dpd)
    }
}

impl ReducedDiscreteLagrangian for RodDiscreteLagrangian {
    fn dim(&self) -> usize {
        6
    }

    fn eval(&self, p0: &AlgebraVector, p1: &AlgebraVector) -> f64 {
        let a = v6(p0);
        self.h * self.model.lagrangian(&a, &((v6(p1) - a) / self.h))
    }

    fn d1(&self, p0: &AlgebraVector, p1: &AlgebraVector) -> Result<CoVector> {
        Ok(dv6(&self.gradients(&v6(p0), &v6(p1)).0))
    }

    fn d2(&self, p0: &AlgebraVector, p1: &AlgebraVector) -> Result<CoVector> {
        Ok(dv6(&self.gradients(&v6(p0), &v6(p1)).1))
    }
}

/// How the rod problem is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RodScheme {
    /// SE(3) reconstruction `Φ_{k+1} = Φ_k τ(hφ_k)` with the algebra-form equations.
    CayleyFull,
    /// `R_{k+1} = R_k cay(hu_k)`, `r_{k+1} = r_k + hR_kv_k`.
    DirectTruncated,
}

impl FromStr for RodScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cayley-full" => Ok(RodScheme::CayleyFull),
            "direct-truncated" => Ok(RodScheme::DirectTruncated),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme '{other}' (expected cayley-full or direct-truncated)"
            ))),
        }
    }
}

impl std::fmt::Display for RodScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RodScheme::CayleyFull => write!(f, "cayley-full"),
            RodScheme::DirectTruncated => write!(f, "direct-truncated"),
        }
    }
}

/// Boundary data and discretization of the rod problem.
#[derive(Debug, Clone, PartialEq)]
pub struct CosseratRodProblem {
    pub model: RodModel,
    pub frame0: Matrix4<f64>,
    pub frame_t: Matrix4<f64>,
    pub phi0: Vector6<f64>,
    pub phi_t: Option<Vector6<f64>>,
    pub n: usize,
    pub h: f64,
    pub scheme: RodScheme,
    /// Retraction of the cayley-full scheme.
    pub retraction: RetractionKind,
}

/// Result of [`solve_rod`].
#[derive(Debug, Clone)]
pub struct RodSolution {
    /// `Φ₀..Φ_N` with `φ₀..φ_{N−1}` as algebra samples.
    pub trajectory: Trajectory,
    /// `(f_k, l_k)` for `k = 0..N−2`.
    pub controls: Vec<(Vector3<f64>, Vector3<f64>)>,
    pub cost: f64,
    pub report: SolveReport,
}

impl CosseratRodProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        model: RodModel,
        frame0: Matrix4<f64>,
        frame_t: Matrix4<f64>,
        phi0: Vector6<f64>,
        n: usize,
        h: f64,
        scheme: RodScheme,
    ) -> Self {
        Self {
            model,
            frame0,
            frame_t,
            phi0,
            phi_t: None,
            n,
            h,
            scheme,
            retraction: RetractionKind::Cayley,
        }
    }

    pub fn discrete_lagrangian(&self) -> RodDiscreteLagrangian {
        RodDiscreteLagrangian::new(self.model.clone(), self.h)
    }

    pub fn to_algebra_problem(&self) -> Result<AlgebraControlProblem> {
        self.model.validate()?;
        let p = AlgebraControlProblem {
            retraction: Retraction::new(Group::Se3, self.retraction),
            lagrangian: Arc::new(self.discrete_lagrangian()),
            g0: GroupElement::from_se3(&self.frame0)?,
            gt: GroupElement::from_se3(&self.frame_t)?,
            xi0: dv6(&self.phi0),
            xi_final: None,
            n: self.n,
            h: self.h,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.phi0.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("phi0 must be finite".into()));
        }
        match self.scheme {
            RodScheme::CayleyFull => self.to_algebra_problem().map(|_| ()),
            RodScheme::DirectTruncated => rod_direct::DirectRodProblem::new(self).map(|_| ()),
        }
    }

    /// Unknown (and residual) length `6(N−1)`.
    pub fn unknown_len(&self) -> usize {
        6 * (self.n.saturating_sub(1))
    }
}

/// Residual of the cayley-full scheme for `φ₁..φ_{N−1}`: the SE(3)
/// algebra-form equations at `k = 2..N−1` plus the 6 terminal entries.
pub fn assemble_rod_residual(problem: &CosseratRodProblem, phis: &DVector<f64>) -> Result<DVector<f64>> {
    problem.to_algebra_problem()?.residual(phis)
}

/// `(f_k, l_k)` from consecutive strains, `k = 0..len−2`.
pub fn recover_rod_controls(model: &RodModel, phis: &[AlgebraVector], h: f64) -> Vec<(Vector3<f64>, Vector3<f64>)> {
    phis.windows(2)
        .map(|w| {
            let a = v6(&w[0]);
            model.controls(&a, &((v6(&w[1]) - a) / h))
        })
        .collect()
}

fn finish(sol: AlgebraSolution, problem: &CosseratRodProblem) -> RodSolution {
    RodSolution {
        controls: recover_rod_controls(&problem.model, &sol.xis, problem.h),
        trajectory: sol.trajectory,
        cost: sol.cost,
        report: sol.report,
    }
}

/// Solves the rod problem from the constant initial guess, dispatching on the scheme.
pub fn solve_rod(problem: &CosseratRodProblem, config: &NewtonConfig) -> Result<RodSolution> {
    match problem.scheme {
        RodScheme::CayleyFull => Ok(finish(problem.to_algebra_problem()?.solve(config)?, problem)),
        RodScheme::DirectTruncated => {
            let p = rod_direct::DirectRodProblem::new(problem)?;
            let x0 = p.initial_guess()?;
            p.solve_from(&x0, config)
        }
    }
}

/// As [`solve_rod`], from caller-provided unknowns `φ₁..φ_{N−1}`.
pub fn solve_rod_from(problem: &CosseratRodProblem, x0: &DVector<f64>, config: &NewtonConfig) -> Result<RodSolution> {
    match problem.scheme {
        RodScheme::CayleyFull => Ok(finish(problem.to_algebra_problem()?.solve_from(x0, config)?, problem)),
        RodScheme::DirectTruncated => rod_direct::DirectRodProblem::new(problem)?.solve_from(x0, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validation::fd_gradient;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(rng: &mut ChaCha8Rng) -> Matrix6<f64> {
        let a = Matrix6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        a * a.transpose() + Matrix6::identity()
    }

    #[test]
    fn internal_force_examples() {
        let k = Matrix6::identity();
        let bar = Vector6::zeros();
        let (n, m) = rod_internal_forces(&bar, &k, &bar);
        assert_eq!((n, m), (Vector3::zeros(), Vector3::zeros()));
        let phi = Vector6::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        let (n, m) = rod_internal_forces(&phi, &k, &bar);
        assert_eq!(n, Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(m, Vector3::zeros());
        let (f, l) = rod_controls(&phi, &Vector6::zeros(), &k, &bar);
        assert_eq!((f, l), (Vector3::zeros(), Vector3::zeros()));
    }

    #[test]
    fn forces_are_energy_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k = random_spd(&mut rng);
        let bar = Vector6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let phi = Vector6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let energy = |x: &DVector<f64>| {
            let d = v6(x) - bar;
            0.5 * d.dot(&(k * d))
        };
        let g = fd_gradient(energy, &dv6(&phi), 1e-6).unwrap();
        let (n, m) = rod_internal_forces(&phi, &k, &bar);
        let expected = DVector::from_vec(vec![m.x, m.y, m.z, n.x, n.y, n.z]);
        assert!((g - &expected).norm() <= 1e-8 * expected.norm().max(1.0));
    }

    #[test]
    fn lagrangian_matches_block_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let k = random_spd(&mut rng);
            let bar = Vector6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let phi = Vector6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let pd = Vector6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let rho1: f64 = rng.gen_range(0.1..2.0);
            let (u, v) = split(&phi);
            let (ud, vd) = split(&pd);
            let (n, m) = rod_internal_forces(&phi, &k, &bar);
            let h11 = k.fixed_view::<3, 3>(3, 0).into_owned();
            let h12 = k.fixed_view::<3, 3>(3, 3).into_owned();
            let h21 = k.fixed_view::<3, 3>(0, 0).into_owned();
            let h22 = k.fixed_view::<3, 3>(0, 3).into_owned();
            let a = h11 * ud + h12 * vd + n.cross(&u);
            let b = h21 * ud + h22 * vd + n.cross(&v) + m.cross(&u);
            let expanded = a.norm_squared() + rho1 * rho1 * b.norm_squared();
            let direct = rod_lagrangian(&phi, &pd, &k, &bar, rho1);
            assert!((expanded - direct).abs() <= 1e-12 * direct.max(1.0));
            assert!(direct >= 0.0);
        }
    }

    #[test]
    fn analytic_gradients_match_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let model = RodModel::new(
                random_spd(&mut rng),
                Vector6::from_fn(|_, _| rng.gen_range(-1.0..1.0)),
                rng.gen_range(0.1..2.0),
            );
            let ld = RodDiscreteLagrangian::new(model, 0.1);
            let a = DVector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0));
            let b = DVector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0));
            let g1 = fd_gradient(|x| ld.eval(x, &b), &a, 1e-6).unwrap();
            let g2 = fd_gradient(|x| ld.eval(&a, x), &b, 1e-6).unwrap();
            let d1 = ld.d1(&a, &b).unwrap();
            let d2 = ld.d2(&a, &b).unwrap();
            assert!((&g1 - &d1).norm() <= 1e-6 * d1.norm().max(1.0), "{g1} {d1}");
            assert!((&g2 - &d2).norm() <= 1e-6 * d2.norm().max(1.0));
        }
    }

    #[test]
    fn model_validation() {
        let mut k = Matrix6::identity();
        assert!(RodModel::new(k, Vector6::zeros(), 1.0).validate().is_ok());
        k[(0, 1)] = 0.5;
        assert!(RodModel::new(k, Vector6::zeros(), 1.0).validate().is_err());
        let neg = -Matrix6::identity();
        assert!(RodModel::new(neg, Vector6::zeros(), 1.0).validate().is_err());
        assert_eq!("direct-truncated".parse::<RodScheme>().unwrap(), RodScheme::DirectTruncated);
        assert!("other".parse::<RodScheme>().is_err());
    }
}

//! Rod problem with the truncated SE(3) reconstruction
//! `R_{k+1} = R_k cay(hu_k)`, `r_{k+1} = r_k + hR_kv_k`.
//!
//! Frame variations `δR_k = R_kΣ̂₁`, `δr_k = R_kΣ₂` act on the strains as
//! `hδu_k = dcay⁻¹_{hu_k}(−Σ₁,k + g_kΣ₁,k+1)` and
//! `hδv_k = g_kΣ₂,k+1 − Σ₂,k + h v̂_kΣ₁,k` with `g_k = cay(hu_k)`.
//! Collecting the coefficients of `Σ_k` gives the rotational block
//!
//! `g_{k−1}ᵀ[Υ_{k−1} − (h/2)ad*_{u_{k−1}}Υ_{k−1} − (h²/4)u*_{k−1}Υ_{k−1}u*_{k−1}]
//!  − Υ_k + (h/2)ad*_{u_k}Υ_k + (h²/4)u*_kΥ_ku*_k + h Υ³_k × v_k`
//!
//! and the translational block `g_{k−1}ᵀΥ³_{k−1} − Υ³_k`, both scaled by `h`.
//! `Υ_b` and `Υ³_b` are the rotational and translational parts of
//! `∂C_d/∂φ_b = D₁L_d(φ_b, φ_{b+1}) + D₂L_d(φ_{b−1}, φ_b)`.

use nalgebra::{DVector, Matrix3, Matrix4, Vector3, Vector6};

use super::algebra_ocp::{discrete_cost, MIN_STEPS};
use super::newton::{newton_solve, NewtonConfig};
use super::rod::{dv6, recover_rod_controls, CosseratRodProblem, RodDiscreteLagrangian, RodSolution};
use crate::error::{Error, Result};
use crate::lie::se3::{se3_from_parts, se3_parts};
use crate::lie::{AlgebraVector, Group, GroupElement};
use crate::mechanics::Trajectory;
use crate::retraction::{cay_inv_so3, cay_so3, Retraction};

/// `ad*_u μ = ûᵀμ`.
fn ad_star3(u: &Vector3<f64>, mu: &Vector3<f64>) -> Vector3<f64> {
    -u.cross(mu)
}

/// The dual sandwich `u*ωu*`, defined by `⟨u*ωu*, η⟩ = ⟨ω, ûη̂û⟩`; since
/// `ûη̂û = −(u·η)û` this is `−(u·ω)u`.
fn sandwich_star(u: &Vector3<f64>, omega: &Vector3<f64>) -> Vector3<f64> {
    -u * u.dot(omega)
}

fn split(phi: &Vector6<f64>) -> (Vector3<f64>, Vector3<f64>) {
    (
        Vector3::new(phi[0], phi[1], phi[2]),
        Vector3::new(phi[3], phi[4], phi[5]),
    )
}

/// Frames `(R_k, r_k)` from `(R₀, r₀)` under the truncated reconstruction.
pub fn reconstruct_truncated(
    r0: &Matrix3<f64>,
    p0: &Vector3<f64>,
    phis: &[Vector6<f64>],
    h: f64,
) -> Vec<(Matrix3<f64>, Vector3<f64>)> {
    let mut out = Vec::with_capacity(phis.len() + 1);
    out.push((*r0, *p0));
    for phi in phis {
        let (u, v) = split(phi);
        let (r, p) = *out.last().expect("non-empty");
        out.push((r * cay_so3(&(u * h)), p + r * v * h));
    }
    out
}

/// The truncated-reconstruction formulation of a [`CosseratRodProblem`].
#[derive(Debug, Clone)]
pub struct DirectRodProblem {
    ld: RodDiscreteLagrangian,
    r0: Matrix3<f64>,
    p0: Vector3<f64>,
    rt: Matrix3<f64>,
    pt: Vector3<f64>,
    frame0: Matrix4<f64>,
    frame_t: Matrix4<f64>,
    phi0: Vector6<f64>,
    n: usize,
    h: f64,
}

impl DirectRodProblem {
    pub fn new(problem: &CosseratRodProblem) -> Result<Self> {
        problem.model.validate()?;
        if problem.n < MIN_STEPS {
            return Err(Error::InvalidArgument(format!(
                "N must be at least {MIN_STEPS} (got {})",
                problem.n
            )));
        }
        if !(problem.h > 0.0) || !problem.h.is_finite() {
            return Err(Error::InvalidArgument(format!("h must be positive (got {})", problem.h)));
        }
        GroupElement::from_se3(&problem.frame0)?;
        GroupElement::from_se3(&problem.frame_t)?;
        let (r0, p0) = se3_parts(&problem.frame0);
        let (rt, pt) = se3_parts(&problem.frame_t);
        Ok(Self {
            ld: problem.discrete_lagrangian(),
            r0,
            p0,
            rt,
            pt,
            frame0: problem.frame0,
            frame_t: problem.frame_t,
            phi0: problem.phi0,
            n: problem.n,
            h: problem.h,
        })
    }

    pub fn unknown_len(&self) -> usize {
        6 * (self.n - 1)
    }

    /// `φ₀..φ_{N−1}` from the stacked unknowns.
    pub fn sequence(&self, x: &DVector<f64>) -> Result<Vec<Vector6<f64>>> {
        if x.len() != self.unknown_len() {
            return Err(Error::DimensionMismatch {
                expected: self.unknown_len(),
                got: x.len(),
            });
        }
        let mut phis = Vec::with_capacity(self.n);
        phis.push(self.phi0);
        for k in 0..self.n - 1 {
            phis.push(Vector6::from_fn(|i, _| x[6 * k + i]));
        }
        Ok(phis)
    }

    /// Interior blocks for `k = 2..N−1` and the terminal constraints
    /// `cay⁻¹(R_NᵀR(T))` and `r_N − r(T)`.
    pub fn residual(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let phis = self.sequence(x)?;
        let n = phis.len();
        let h = self.h;
        let mut grads = vec![Vector6::zeros(); n];
        for b in 0..n - 1 {
            let (d1, d2) = self.ld.gradients(&phis[b], &phis[b + 1]);
            grads[b] += d1;
            grads[b + 1] += d2;
        }
        let mut out = DVector::zeros(self.unknown_len());
        for k in 2..n {
            let (u_prev, _) = split(&phis[k - 1]);
            let (u, v) = split(&phis[k]);
            let (ups_prev, ups3_prev) = split(&grads[k - 1]);
            let (ups, ups3) = split(&grads[k]);
            let g_prev_t = cay_so3(&(u_prev * h)).transpose();
            let rot = g_prev_t
                * (ups_prev - ad_star3(&u_prev, &ups_prev) * (h / 2.0)
                    - sandwich_star(&u_prev, &ups_prev) * (h * h / 4.0))
                - ups
                + ad_star3(&u, &ups) * (h / 2.0)
                + sandwich_star(&u, &ups) * (h * h / 4.0)
                + ups3.cross(&v) * h;
            let trans = g_prev_t * ups3_prev - ups3;
            let off = 6 * (k - 2);
            out.fixed_rows_mut::<3>(off).copy_from(&rot);
            out.fixed_rows_mut::<3>(off + 3).copy_from(&trans);
        }
        let frames = reconstruct_truncated(&self.r0, &self.p0, &phis, h);
        let (rn, pn) = frames.last().expect("non-empty");
        let rot_err = cay_inv_so3(&(rn.transpose() * self.rt)).map_err(|e| Error::DomainAt {
            index: n,
            message: format!("terminal constraint: {e}"),
        })?;
        let off = self.unknown_len() - 6;
        out.fixed_rows_mut::<3>(off).copy_from(&rot_err);
        out.fixed_rows_mut::<3>(off + 3).copy_from(&(pn - self.pt));
        Ok(out)
    }

    /// Truncated cost `Σ_{k=0}^{N−2} L_d(φ_k, φ_{k+1})`.
    pub fn cost(&self, phis: &[Vector6<f64>]) -> Result<f64> {
        let seq: Vec<AlgebraVector> = phis.iter().map(dv6).collect();
        discrete_cost(&self.ld, &seq)
    }

    /// Constant strains `cay⁻¹(Φ₀⁻¹Φ(T))/(N h)` on SE(3).
    pub fn initial_guess(&self) -> Result<DVector<f64>> {
        let rel = GroupElement::from_se3(&self.frame0)?
            .inverse()?
            .compose(&GroupElement::from_se3(&self.frame_t)?)?;
        let xi = Retraction::cayley(Group::Se3).tau_inv(&rel)? / (self.n as f64 * self.h);
        Ok(DVector::from_fn(self.unknown_len(), |i, _| xi[i % 6]))
    }

    pub fn trajectory(&self, phis: &[Vector6<f64>]) -> Result<Trajectory> {
        let frames = reconstruct_truncated(&self.r0, &self.p0, phis, self.h);
        let points = frames
            .iter()
            .map(|(r, p)| GroupElement::from_se3(&se3_from_parts(r, p)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            points,
            algebra: Some(phis.iter().map(dv6).collect()),
            h: self.h,
        })
    }

    pub fn solve_from(&self, x0: &DVector<f64>, config: &NewtonConfig) -> Result<RodSolution> {
        let (x, mut report) = newton_solve(|x: &DVector<f64>| self.residual(x), x0, config)?;
        let phis = self.sequence(&x)?;
        let trajectory = self.trajectory(&phis)?;
        let last = trajectory.points.last().expect("non-empty");
        report.terminal_error = Some((last.to_se3() - self.frame_t).norm());
        let seq: Vec<AlgebraVector> = phis.iter().map(dv6).collect();
        Ok(RodSolution {
            controls: recover_rod_controls(&self.ld.model, &seq, self.h),
            cost: self.cost(&phis)?,
            trajectory,
            report,
        })
    }
}

/// Residual of the direct-truncated scheme for `(u, v)₁..(u, v)_{N−1}`.
pub fn assemble_rod_direct_residual(problem: &CosseratRodProblem, phis: &DVector<f64>) -> Result<DVector<f64>> {
    DirectRodProblem::new(problem)?.residual(phis)
}

/// Strain of one truncated step between two frames:
/// `u = cay⁻¹(R_kᵀR_{k+1})/h`, `v = R_kᵀ(r_{k+1} − r_k)/h`.
pub fn truncated_strain(
    a: &(Matrix3<f64>, Vector3<f64>),
    b: &(Matrix3<f64>, Vector3<f64>),
    h: f64,
) -> Result<Vector6<f64>> {
    let u = cay_inv_so3(&(a.0.transpose() * b.0))? / h;
    let v = a.0.transpose() * (b.1 - a.1) / h;
    Ok(Vector6::new(u.x, u.y, u.z, v.x, v.y, v.z))
}

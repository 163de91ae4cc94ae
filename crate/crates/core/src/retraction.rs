//! Retraction maps `τ: 𝔤 → G` with right-trivialized tangents.
//!
//! For every retraction the tangent satisfies
//! `d/dε τ(ξ + εη)|₀ = (dτ_ξ η)^ · τ(ξ)`, and `dτ⁻¹_ξ` is its inverse.
//! Two families are provided:
//!
//! * Cayley, `cay(ξ) = (I − ξ/2)⁻¹(I + ξ/2)`, exact on quadratic groups,
//!   with closed forms on so(3).
//! * Exponential with tangents truncated at order `p` (`exp1`, `exp2`,
//!   `exp4`). `τ` itself is the matrix exponential; only `dτ` and `dτ⁻¹` are
//!   truncated, so tangent identities hold to the truncation order.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::lie::so3::{hat3, vee3_unchecked};
use crate::lie::{AlgebraVector, CoVector, Group, GroupElement};

/// `I₃ + 4/(4+‖ω‖²)(ω̂ + ω̂²/2)`.
pub fn cay_so3(omega: &Vector3<f64>) -> Matrix3<f64> {
    let w = hat3(omega);
    Matrix3::identity() + (w + w * w * 0.5) * (4.0 / (4.0 + omega.norm_squared()))
}

/// Right-trivialized tangent of [`cay_so3`]: `2/(4+‖ω‖²)(2I₃ + ω̂)`.
pub fn dcay_so3(omega: &Vector3<f64>) -> Matrix3<f64> {
    (Matrix3::identity() * 2.0 + hat3(omega)) * (2.0 / (4.0 + omega.norm_squared()))
}

/// Inverse tangent: `I₃ − ω̂/2 + ωωᵀ/4`.
pub fn dcay_inv_so3(omega: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::identity() - hat3(omega) * 0.5 + omega * omega.transpose() * 0.25
}

/// Inverse Cayley map on SO(3): `ω = 2/(1 + tr R) · vee(R − Rᵀ)/…`, i.e. the
/// coordinates of `2(I + R)⁻¹(R − I)`. Fails near rotation angle π.
pub fn cay_inv_so3(r: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let denom = 1.0 + r.trace();
    if !(denom.abs() > 1e-10) || !denom.is_finite() {
        return Err(Error::Domain(format!(
            "inverse Cayley undefined at rotation angle pi (1 + tr R = {denom:e})"
        )));
    }
    // vee(R − Rᵀ) = 2 vee_unchecked(R)
    Ok(vee3_unchecked(r) * (4.0 / denom))
}

/// Coefficients `B_j / j!` of `x/(eˣ − 1)` for `j = 0..=n`, with `B₁ = −1/2`.
pub fn bernoulli_over_factorial(n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0;
    // Σ_{k=0}^{m} b_k / (m − k + 1)! = 0 for m ≥ 1
    let mut inv_fact = vec![1.0; n + 2];
    for i in 1..n + 2 {
        inv_fact[i] = inv_fact[i - 1] / i as f64;
    }
    for m in 1..=n {
        let s: f64 = (0..m).map(|k| b[k] * inv_fact[m - k + 1]).sum();
        b[m] = -s;
    }
    b
}

/// Bernoulli numbers `B_0..=B_n`.
pub fn bernoulli_numbers(n: usize) -> Vec<f64> {
    let mut fact = 1.0;
    bernoulli_over_factorial(n)
        .into_iter()
        .enumerate()
        .map(|(j, c)| {
            if j > 0 {
                fact *= j as f64;
            }
            c * fact
        })
        .collect()
}

fn series_matrix(ad: &DMatrix<f64>, coeffs: &[f64]) -> DMatrix<f64> {
    let d = ad.nrows();
    let mut acc = DMatrix::zeros(d, d);
    let mut power = DMatrix::identity(d, d);
    for (j, c) in coeffs.iter().enumerate() {
        if j > 0 {
            power = ad * &power;
        }
        if *c != 0.0 {
            acc += &power * *c;
        }
    }
    acc
}

fn dexp_coeffs(p: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(p + 1);
    let mut fact = 1.0;
    for j in 0..=p {
        fact *= (j + 1) as f64;
        out.push(1.0 / fact);
    }
    out
}

/// `Σ_{j=0}^{p} 1/(j+1)! ad_ξʲ η`.
pub fn dexp_truncated(
    group: &Group,
    xi: &AlgebraVector,
    eta: &AlgebraVector,
    p: usize,
) -> Result<AlgebraVector> {
    group.check_dim(eta)?;
    Ok(series_matrix(&group.ad_matrix(xi)?, &dexp_coeffs(p)) * eta)
}

/// `Σ_{j=0}^{p} B_j/j! ad_ξʲ η`.
pub fn dexp_inv_truncated(
    group: &Group,
    xi: &AlgebraVector,
    eta: &AlgebraVector,
    p: usize,
) -> Result<AlgebraVector> {
    group.check_dim(eta)?;
    Ok(series_matrix(&group.ad_matrix(xi)?, &bernoulli_over_factorial(p)) * eta)
}

/// Which retraction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetractionKind {
    Cayley,
    /// Exponential with tangent series truncated at the given order.
    Exp(usize),
}

impl RetractionKind {
    pub const NAMES: [&'static str; 4] = ["cayley", "exp1", "exp2", "exp4"];
}

impl FromStr for RetractionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cayley" => Ok(RetractionKind::Cayley),
            "exp1" => Ok(RetractionKind::Exp(1)),
            "exp2" => Ok(RetractionKind::Exp(2)),
            "exp4" => Ok(RetractionKind::Exp(4)),
            other => Err(Error::InvalidArgument(format!(
                "unknown retraction '{other}' (expected one of cayley, exp1, exp2, exp4)"
            ))),
        }
    }
}

impl fmt::Display for RetractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RetractionKind::Cayley => write!(f, "cayley"),
            RetractionKind::Exp(p) => write!(f, "exp{p}"),
        }
    }
}

/// A retraction bound to a group.
#[derive(Debug, Clone, PartialEq)]
pub struct Retraction {
    group: Group,
    kind: RetractionKind,
}

/// Number of series terms used when the exponential's tangent must be exact
/// (inverse exponential iteration).
const LOG_SERIES_TERMS: usize = 40;

impl Retraction {
    pub fn new(group: Group, kind: RetractionKind) -> Self {
        Self { group, kind }
    }

    pub fn cayley(group: Group) -> Self {
        Self::new(group, RetractionKind::Cayley)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn kind(&self) -> RetractionKind {
        self.kind
    }

    /// `τ(ξ)`.
    pub fn tau(&self, xi: &AlgebraVector) -> Result<GroupElement> {
        self.group.check_dim(xi)?;
        if let Some(i) = xi.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let mat = match (self.kind, &self.group) {
            (RetractionKind::Cayley, Group::So3) => {
                let r = cay_so3(&Vector3::new(xi[0], xi[1], xi[2]));
                DMatrix::from_column_slice(3, 3, r.as_slice())
            }
            (RetractionKind::Cayley, g) => cay_generic_matrix(g, xi)?,
            (RetractionKind::Exp(_), g) => g.wedge_unchecked(xi).exp(),
        };
        Ok(GroupElement::from_matrix_unchecked(self.group.clone(), mat))
    }

    /// `τ⁻¹(g)`.
    pub fn tau_inv(&self, g: &GroupElement) -> Result<AlgebraVector> {
        if g.group() != &self.group {
            return Err(Error::GroupMismatch(g.group().to_string(), self.group.to_string()));
        }
        match self.kind {
            RetractionKind::Cayley => cay_inv(g),
            RetractionKind::Exp(_) => log_by_iteration(g),
        }
    }

    /// Coordinate matrix of `dτ_ξ`.
    pub fn dtau_matrix(&self, xi: &AlgebraVector) -> Result<DMatrix<f64>> {
        self.group.check_dim(xi)?;
        match (self.kind, &self.group) {
            (RetractionKind::Cayley, Group::So3) => {
                let m = dcay_so3(&Vector3::new(xi[0], xi[1], xi[2]));
                Ok(DMatrix::from_column_slice(3, 3, m.as_slice()))
            }
            (RetractionKind::Cayley, g) => {
                let (a_inv, b_inv) = cayley_factor_inverses(g, xi)?;
                Ok(sandwich_matrix(g, &a_inv, &b_inv))
            }
            (RetractionKind::Exp(p), g) => Ok(series_matrix(&g.ad_matrix(xi)?, &dexp_coeffs(p))),
        }
    }

    /// Coordinate matrix of `dτ⁻¹_ξ`.
    pub fn dtau_inv_matrix(&self, xi: &AlgebraVector) -> Result<DMatrix<f64>> {
        self.group.check_dim(xi)?;
        match (self.kind, &self.group) {
            (RetractionKind::Cayley, Group::So3) => {
                let m = dcay_inv_so3(&Vector3::new(xi[0], xi[1], xi[2]));
                Ok(DMatrix::from_column_slice(3, 3, m.as_slice()))
            }
            (RetractionKind::Cayley, g) => {
                let x = g.wedge_unchecked(xi) * 0.5;
                let n = g.matrix_size();
                let a = DMatrix::identity(n, n) - &x;
                let b = DMatrix::identity(n, n) + &x;
                Ok(sandwich_matrix(g, &a, &b))
            }
            (RetractionKind::Exp(p), g) => Ok(series_matrix(
                &g.ad_matrix(xi)?,
                &bernoulli_over_factorial(p),
            )),
        }
    }

    pub fn dtau(&self, xi: &AlgebraVector, eta: &AlgebraVector) -> Result<AlgebraVector> {
        self.group.check_dim(eta)?;
        Ok(self.dtau_matrix(xi)? * eta)
    }

    pub fn dtau_inv(&self, xi: &AlgebraVector, eta: &AlgebraVector) -> Result<AlgebraVector> {
        self.group.check_dim(eta)?;
        Ok(self.dtau_inv_matrix(xi)? * eta)
    }

    /// `(dτ⁻¹_ξ)* μ`, the transpose of the `dτ⁻¹_ξ` coordinate matrix applied to `μ`.
    pub fn dtau_inv_star(&self, xi: &AlgebraVector, mu: &CoVector) -> Result<CoVector> {
        self.group.check_dim(mu)?;
        Ok(self.dtau_inv_matrix(xi)?.tr_mul(mu))
    }
}

/// Generic Cayley map `(I − ξ̂/2)⁻¹(I + ξ̂/2)` on any supported group.
pub fn cay_quadratic(group: &Group, xi: &AlgebraVector) -> Result<GroupElement> {
    Retraction::cayley(group.clone()).tau(xi)
}

/// Inverse Cayley map `2(I + g)⁻¹(g − I)` in coordinates.
pub fn cay_inv(g: &GroupElement) -> Result<AlgebraVector> {
    let group = g.group();
    if let Group::So3 = group {
        let w = cay_inv_so3(&g.to_so3())?;
        return Ok(DVector::from_column_slice(w.as_slice()));
    }
    let n = group.matrix_size();
    let m = g.matrix();
    let lhs = DMatrix::identity(n, n) + m;
    let rhs = (m - DMatrix::identity(n, n)) * 2.0;
    let sol = solve_checked(lhs, rhs, "I + g")?;
    Ok(group.vee_unchecked(&sol))
}

/// `dcay_ξ η` from the sandwich `(I − ξ̂/2)⁻¹ η̂ (I + ξ̂/2)⁻¹`.
pub fn dcay_generic(group: &Group, xi: &AlgebraVector, eta: &AlgebraVector) -> Result<AlgebraVector> {
    group.check_dim(eta)?;
    let (a_inv, b_inv) = cayley_factor_inverses(group, xi)?;
    Ok(group.vee_unchecked(&(a_inv * group.wedge_unchecked(eta) * b_inv)))
}

/// `dcay⁻¹_ξ η = (I − ξ̂/2) η̂ (I + ξ̂/2)`.
pub fn dcay_inv_generic(
    group: &Group,
    xi: &AlgebraVector,
    eta: &AlgebraVector,
) -> Result<AlgebraVector> {
    group.check_dim(xi)?;
    group.check_dim(eta)?;
    let n = group.matrix_size();
    let x = group.wedge_unchecked(xi) * 0.5;
    let a = DMatrix::identity(n, n) - &x;
    let b = DMatrix::identity(n, n) + &x;
    Ok(group.vee_unchecked(&(a * group.wedge_unchecked(eta) * b)))
}

fn solve_checked(lhs: DMatrix<f64>, rhs: DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let scale = lhs.norm();
    let lu = lhs.lu();
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Domain(format!("{what} is singular")))?;
    let growth = sol.norm() / rhs.norm().max(1e-300);
    if !sol.iter().all(|x| x.is_finite()) || growth * scale > 1e12 {
        return Err(Error::Domain(format!("{what} is numerically singular")));
    }
    Ok(sol)
}

fn cayley_factor_inverses(group: &Group, xi: &AlgebraVector) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    group.check_dim(xi)?;
    let n = group.matrix_size();
    let x = group.wedge_unchecked(xi) * 0.5;
    let eye = DMatrix::identity(n, n);
    let a_inv = solve_checked(&eye - &x, eye.clone(), "I - xi/2")?;
    let b_inv = solve_checked(&eye + &x, eye.clone(), "I + xi/2")?;
    Ok((a_inv, b_inv))
}

fn cay_generic_matrix(group: &Group, xi: &AlgebraVector) -> Result<DMatrix<f64>> {
    let n = group.matrix_size();
    let x = group.wedge_unchecked(xi) * 0.5;
    let eye = DMatrix::identity(n, n);
    solve_checked(&eye - &x, &eye + &x, "I - xi/2")
}

/// Coordinate matrix of `η ↦ vee(A η̂ B)`.
fn sandwich_matrix(group: &Group, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let d = group.dim();
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        let e = group.wedge_unchecked(&group.basis_vector(j));
        m.set_column(j, &group.vee_unchecked(&(a * e * b)));
    }
    m
}

/// Inverse of the matrix exponential by the iteration
/// `ξ ← ξ + dexp⁻¹_ξ(cay⁻¹(g·exp(−ξ)))`, started from `cay⁻¹(g)`.
fn log_by_iteration(g: &GroupElement) -> Result<AlgebraVector> {
    let group = g.group();
    let mut xi = cay_inv(g)?;
    let coeffs = bernoulli_over_factorial(LOG_SERIES_TERMS);
    for _ in 0..60 {
        let back = group.wedge_unchecked(&(-&xi)).exp();
        let y = GroupElement::from_matrix_unchecked(group.clone(), g.matrix() * back);
        let delta = cay_inv(&y)?;
        if delta.norm() <= 1e-15 * xi.norm().max(1.0) {
            return Ok(xi);
        }
        let step = series_matrix(&group.ad_matrix(&xi)?, &coeffs) * delta;
        xi += step;
    }
    Err(Error::Domain("inverse exponential iteration did not converge".into()))
}

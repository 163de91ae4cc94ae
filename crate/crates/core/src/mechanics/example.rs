//! Vector-space mechanics: the rectangle-rule discretization
//! `L_d(q₀, q₁) = h[½((q₁−q₀)/h)ᵀM((q₁−q₀)/h) − V(q₀)]` and its explicit
//! discrete Euler–Lagrange stepper, the discrete form of Newton's law.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::lagrangian::DiscreteLagrangian;
use crate::error::{Error, Result};
use crate::lie::{CoVector, Group, GroupElement};

/// A potential `V: ℝⁿ → ℝ` with its gradient.
pub trait Potential: Send + Sync {
    fn value(&self, q: &DVector<f64>) -> f64;
    fn gradient(&self, q: &DVector<f64>) -> DVector<f64>;
}

/// `V(q) = Σᵢ Σⱼ cⱼ qᵢʲ`, the same polynomial applied to every coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPotential {
    pub coeffs: Vec<f64>,
}

impl PolynomialPotential {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// `½‖q‖²`.
    pub fn harmonic() -> Self {
        Self::new(vec![0.0, 0.0, 0.5])
    }

    fn poly(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn dpoly(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * x + j as f64 * c)
    }
}

impl Potential for PolynomialPotential {
    fn value(&self, q: &DVector<f64>) -> f64 {
        q.iter().map(|x| self.poly(*x)).sum()
    }

    fn gradient(&self, q: &DVector<f64>) -> DVector<f64> {
        q.map(|x| self.dpoly(x))
    }
}

/// Pairwise spring `½k‖q_a − q_b‖²` between consecutive blocks of size `n`
/// in a stacked configuration; invariant under common translations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpringChain {
    pub n: usize,
    pub stiffness: f64,
}

impl Potential for SpringChain {
    fn value(&self, q: &DVector<f64>) -> f64 {
        let m = q.len() / self.n;
        (1..m)
            .map(|c| {
                let a = q.rows((c - 1) * self.n, self.n);
                let b = q.rows(c * self.n, self.n);
                0.5 * self.stiffness * (a - b).norm_squared()
            })
            .sum()
    }

    fn gradient(&self, q: &DVector<f64>) -> DVector<f64> {
        let m = q.len() / self.n;
        let mut g = DVector::zeros(q.len());
        for c in 1..m {
            let d = (q.rows((c - 1) * self.n, self.n) - q.rows(c * self.n, self.n)) * self.stiffness;
            let mut ga = g.rows_mut((c - 1) * self.n, self.n);
            ga += &d;
            let mut gb = g.rows_mut(c * self.n, self.n);
            gb -= &d;
        }
        g
    }
}

/// The discrete Lagrangian of a mechanical system on ℝⁿ, with analytic
/// gradients `D₁ = −M(q₁−q₀)/h − h∇V(q₀)` and `D₂ = M(q₁−q₀)/h`.
#[derive(Clone)]
pub struct NewtonLagrangian {
    group: Group,
    mass: DMatrix<f64>,
    h: f64,
    potential: Arc<dyn Potential>,
}

impl NewtonLagrangian {
    pub fn new(mass: DMatrix<f64>, h: f64, potential: Arc<dyn Potential>) -> Result<Self> {
        let n = mass.nrows();
        if mass.ncols() != n || n == 0 {
            return Err(Error::InvalidArgument("mass matrix must be square".into()));
        }
        if !(h > 0.0) {
            return Err(Error::InvalidArgument("step h must be positive".into()));
        }
        Ok(Self {
            group: Group::Abelian(n),
            mass,
            h,
            potential,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn potential(&self) -> &dyn Potential {
        self.potential.as_ref()
    }
}

impl DiscreteLagrangian for NewtonLagrangian {
    fn group(&self) -> &Group {
        &self.group
    }

    fn arity(&self) -> usize {
        2
    }

    fn eval(&self, points: &[GroupElement]) -> Result<f64> {
        if points.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: points.len(),
            });
        }
        let q0 = points[0].translation();
        let v = (points[1].translation() - &q0) / self.h;
        Ok(self.h * (0.5 * v.dot(&(&self.mass * &v)) - self.potential.value(&q0)))
    }

    fn slot_gradient(&self, points: &[GroupElement], slot: usize) -> Result<CoVector> {
        if points.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: points.len(),
            });
        }
        let q0 = points[0].translation();
        let p = &self.mass * (points[1].translation() - &q0) / self.h;
        match slot {
            0 => Ok(-p - self.potential.gradient(&q0) * self.h),
            1 => Ok(p),
            _ => Err(Error::IndexOutOfRange {
                index: slot,
                min: 0,
                max: 1,
            }),
        }
    }
}

/// Steps `q_{k+1} = 2q_k − q_{k−1} − h²M⁻¹∇V(q_k)` for `n_steps` steps from
/// `(q₀, q₁)`, returning `q₀..q_{n_steps}`.
pub fn integrate_newton(
    mass: &DMatrix<f64>,
    potential: &dyn Potential,
    q0: &DVector<f64>,
    q1: &DVector<f64>,
    n_steps: usize,
    h: f64,
) -> Result<Vec<DVector<f64>>> {
    let n = mass.nrows();
    if q0.len() != n || q1.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q0.len().max(q1.len()),
        });
    }
    let lu = mass.clone().lu();
    if !lu.is_invertible() {
        return Err(Error::Singular("mass matrix".into()));
    }
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(q0.clone());
    if n_steps >= 1 {
        out.push(q1.clone());
    }
    for k in 1..n_steps {
        let accel = lu
            .solve(&potential.gradient(&out[k]))
            .ok_or_else(|| Error::Singular("mass matrix".into()))?;
        let next = &out[k] * 2.0 - &out[k - 1] - accel * (h * h);
        if let Some(i) = next.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        out.push(next);
    }
    Ok(out)
}

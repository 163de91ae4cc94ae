//! Discrete Lagrangians on groups and on algebras, with trivialized
//! gradients.
//!
//! Gradients on a group are stored in the left (body) form
//! `⟨λ, η⟩ = d/dε F(W exp(εη))|₀`. The right (spatial) form
//! `⟨ρ, η⟩ = d/dε F(exp(εη) W)|₀` equals `Ad*_{W⁻¹} λ`.

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, CoVector, Group, GroupElement};
use crate::retraction::Retraction;
use crate::validation::fd_gradient;

/// Default central-difference step, the cube root of machine epsilon.
pub fn default_fd_step() -> f64 {
    f64::EPSILON.cbrt()
}

/// A scalar function of `arity` group elements (`L_d(q₀, q₁)` has arity 2,
/// a reduced `l̃_d(W)` has arity 1, second-order Lagrangians have arity 3).
pub trait DiscreteLagrangian: Send + Sync {
    fn group(&self) -> &Group;

    fn arity(&self) -> usize;

    fn eval(&self, points: &[GroupElement]) -> Result<f64>;

    /// Left-trivialized gradient with respect to argument `slot`.
    fn slot_gradient(&self, points: &[GroupElement], slot: usize) -> Result<CoVector> {
        fd_slot_gradient(self, points, slot, default_fd_step())
    }
}

fn check_points<L: DiscreteLagrangian + ?Sized>(l: &L, points: &[GroupElement], slot: usize) -> Result<()> {
    if points.len() != l.arity() {
        return Err(Error::DimensionMismatch {
            expected: l.arity(),
            got: points.len(),
        });
    }
    if slot >= l.arity() {
        return Err(Error::IndexOutOfRange {
            index: slot,
            min: 0,
            max: l.arity() - 1,
        });
    }
    Ok(())
}

/// Central differences along `W ↦ W·cay(±εη)` over the basis. Cayley agrees
/// with the exponential to second order, so the stencil stays O(ε²).
pub fn fd_slot_gradient<L: DiscreteLagrangian + ?Sized>(
    l: &L,
    points: &[GroupElement],
    slot: usize,
    step: f64,
) -> Result<CoVector> {
    check_points(l, points, slot)?;
    let group = points[slot].group().clone();
    let ret = Retraction::cayley(group.clone());
    let mut grad = CoVector::zeros(group.dim());
    let mut work = points.to_vec();
    for i in 0..group.dim() {
        let e = group.basis_vector(i) * step;
        work[slot] = points[slot].compose(&ret.tau(&e)?)?;
        let fp = l.eval(&work)?;
        work[slot] = points[slot].compose(&ret.tau(&(-e))?)?;
        let fm = l.eval(&work)?;
        let g = (fp - fm) / (2.0 * step);
        if !g.is_finite() {
            return Err(Error::NonFinite(i));
        }
        grad[i] = g;
    }
    Ok(grad)
}

/// Right-trivialized gradient `ρ = Ad*_{W⁻¹} λ` at argument `slot`.
pub fn right_gradient<L: DiscreteLagrangian + ?Sized>(
    l: &L,
    points: &[GroupElement],
    slot: usize,
) -> Result<CoVector> {
    let lambda = l.slot_gradient(points, slot)?;
    to_right_form(&points[slot], &lambda)
}

/// Converts a left-trivialized covector at `w` to the right-trivialized one.
pub fn to_right_form(w: &GroupElement, lambda: &CoVector) -> Result<CoVector> {
    w.inverse()?.coadjoint(lambda)
}

/// Wraps a closure as a [`DiscreteLagrangian`] with finite-difference gradients.
pub struct FnLagrangian<F> {
    group: Group,
    arity: usize,
    f: F,
}

impl<F> FnLagrangian<F>
where
    F: Fn(&[GroupElement]) -> f64 + Send + Sync,
{
    pub fn new(group: Group, arity: usize, f: F) -> Self {
        Self { group, arity, f }
    }
}

impl<F> DiscreteLagrangian for FnLagrangian<F>
where
    F: Fn(&[GroupElement]) -> f64 + Send + Sync,
{
    fn group(&self) -> &Group {
        &self.group
    }

    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, points: &[GroupElement]) -> Result<f64> {
        if points.len() != self.arity {
            return Err(Error::DimensionMismatch {
                expected: self.arity,
                got: points.len(),
            });
        }
        Ok((self.f)(points))
    }
}

/// A discrete Lagrangian in algebra variables, `l_d(ξ₀, ξ₁)`.
pub trait ReducedDiscreteLagrangian: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, xi0: &AlgebraVector, xi1: &AlgebraVector) -> f64;

    /// Euclidean gradient with respect to the first argument.
    fn d1(&self, xi0: &AlgebraVector, xi1: &AlgebraVector) -> Result<CoVector> {
        fd_gradient(|x| self.eval(x, xi1), xi0, default_fd_step())
    }

    /// Euclidean gradient with respect to the second argument.
    fn d2(&self, xi0: &AlgebraVector, xi1: &AlgebraVector) -> Result<CoVector> {
        fd_gradient(|x| self.eval(xi0, x), xi1, default_fd_step())
    }
}

/// Wraps a closure as a [`ReducedDiscreteLagrangian`] with finite-difference gradients.
pub struct FnReducedLagrangian<F> {
    dim: usize,
    f: F,
}

impl<F> FnReducedLagrangian<F>
where
    F: Fn(&AlgebraVector, &AlgebraVector) -> f64 + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> ReducedDiscreteLagrangian for FnReducedLagrangian<F>
where
    F: Fn(&AlgebraVector, &AlgebraVector) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, xi0: &AlgebraVector, xi1: &AlgebraVector) -> f64 {
        (self.f)(xi0, xi1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::so3::axis_angle;
    use nalgebra::{DVector, Matrix3, Vector3};

    #[test]
    fn right_form_is_coadjoint_of_left_form() {
        let j = Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 3.5));
        let l = FnLagrangian::new(Group::So3, 1, move |p: &[GroupElement]| {
            let r = p[0].to_so3();
            ((Matrix3::identity() - r) * j).trace() + r[(0, 1)].powi(2)
        });
        let w = GroupElement::from_so3(&axis_angle(&Vector3::new(0.3, -1.0, 0.4), 1.1)).unwrap();
        let pts = [w.clone()];
        let lambda = l.slot_gradient(&pts, 0).unwrap();
        let rho = right_gradient(&l, &pts, 0).unwrap();
        // independent route: perturb on the left directly
        let ret = Retraction::cayley(Group::So3);
        let h = 1e-6;
        for i in 0..3 {
            let e = Group::So3.basis_vector(i) * h;
            let fp = l.eval(&[ret.tau(&e).unwrap().compose(&w).unwrap()]).unwrap();
            let fm = l.eval(&[ret.tau(&(-e)).unwrap().compose(&w).unwrap()]).unwrap();
            assert!(((fp - fm) / (2.0 * h) - rho[i]).abs() < 1e-8);
        }
        let expected = w.inverse().unwrap().coadjoint(&lambda).unwrap();
        assert!((rho - expected).norm() < 1e-14);
    }

    #[test]
    fn abelian_gradient_is_euclidean() {
        let l = FnLagrangian::new(Group::Abelian(2), 1, |p: &[GroupElement]| {
            let x = p[0].translation();
            x[0] * x[0] + 3.0 * x[1]
        });
        let w = GroupElement::from_translation(&DVector::from_vec(vec![2.0, -1.0]));
        let g = l.slot_gradient(&[w], 0).unwrap();
        assert!((g - DVector::from_vec(vec![4.0, 3.0])).norm() < 1e-8);
    }

    #[test]
    fn arity_is_checked() {
        let l = FnLagrangian::new(Group::So3, 2, |_: &[GroupElement]| 0.0);
        assert!(l.eval(&[Group::So3.identity()]).is_err());
        assert!(l.slot_gradient(&[Group::So3.identity(), Group::So3.identity()], 2).is_err());
    }
}

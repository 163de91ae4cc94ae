//! First-order discrete mechanics: action sums, discrete Euler–Lagrange
//! residuals, Legendre transforms, momentum maps and the first-order
//! discrete Euler–Poincaré residual.

use super::lagrangian::{right_gradient, DiscreteLagrangian};
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, CoVector, Group, GroupElement};
use crate::retraction::Retraction;

fn require_arity<L: DiscreteLagrangian + ?Sized>(l: &L, arity: usize) -> Result<()> {
    if l.arity() != arity {
        return Err(Error::InvalidArgument(format!(
            "expected a Lagrangian of arity {arity}, got {}",
            l.arity()
        )));
    }
    Ok(())
}

/// `Σ_{k=1}^{N} L_d(q_{k−1}, q_k)`.
pub fn action_sum<L: DiscreteLagrangian + ?Sized>(ld: &L, traj: &Trajectory) -> Result<f64> {
    require_arity(ld, 2)?;
    if traj.points.len() < 2 {
        return Err(Error::WindowTooShort {
            needed: 2,
            got: traj.points.len(),
        });
    }
    traj.points
        .windows(2)
        .map(|w| ld.eval(w))
        .sum::<Result<f64>>()
}

/// `D₁L_d(q_k, q_{k+1}) + D₂L_d(q_{k−1}, q_k)`, left-trivialized at `q_k`.
pub fn del_residual<L: DiscreteLagrangian + ?Sized>(
    ld: &L,
    traj: &Trajectory,
    k: usize,
) -> Result<CoVector> {
    require_arity(ld, 2)?;
    let n = traj.steps();
    if n < 2 || k < 1 || k > n - 1 {
        return Err(Error::IndexOutOfRange {
            index: k,
            min: 1,
            max: n.saturating_sub(1),
        });
    }
    let p = &traj.points;
    let d1 = ld.slot_gradient(&p[k..k + 2], 0)?;
    let d2 = ld.slot_gradient(&p[k - 1..k + 1], 1)?;
    Ok(d1 + d2)
}

/// `(q₀, −D₁L_d(q₀, q₁))`.
pub fn discrete_legendre_minus<L: DiscreteLagrangian + ?Sized>(
    ld: &L,
    q0: &GroupElement,
    q1: &GroupElement,
) -> Result<(GroupElement, CoVector)> {
    require_arity(ld, 2)?;
    let d1 = ld.slot_gradient(&[q0.clone(), q1.clone()], 0)?;
    Ok((q0.clone(), -d1))
}

/// `(q₁, D₂L_d(q₀, q₁))`.
pub fn discrete_legendre_plus<L: DiscreteLagrangian + ?Sized>(
    ld: &L,
    q0: &GroupElement,
    q1: &GroupElement,
) -> Result<(GroupElement, CoVector)> {
    require_arity(ld, 2)?;
    let d2 = ld.slot_gradient(&[q0.clone(), q1.clone()], 1)?;
    Ok((q1.clone(), d2))
}

/// A left action of a group `H` on a configuration group `Q`.
pub trait GroupAction: Send + Sync {
    fn acting_group(&self) -> &Group;

    fn act(&self, g: &GroupElement, q: &GroupElement) -> Result<GroupElement>;

    /// Infinitesimal generator `ξ_Q(q)`, left-trivialized at `q`: the
    /// coordinates of `q⁻¹ · d/dt act(exp(tξ), q)|₀`.
    fn generator(&self, xi: &AlgebraVector, q: &GroupElement) -> Result<AlgebraVector> {
        fd_generator(self, xi, q, super::lagrangian::default_fd_step())
    }
}

/// Central difference of `t ↦ act(cay(tξ), q)`, pulled back to the algebra at `q`.
pub fn fd_generator<A: GroupAction + ?Sized>(
    action: &A,
    xi: &AlgebraVector,
    q: &GroupElement,
    step: f64,
) -> Result<AlgebraVector> {
    let ret = Retraction::cayley(action.acting_group().clone());
    let plus = action.act(&ret.tau(&(xi * step))?, q)?;
    let minus = action.act(&ret.tau(&(xi * -step))?, q)?;
    let diff = (plus.matrix() - minus.matrix()) / (2.0 * step);
    let body = q.inverse()?.matrix() * diff;
    q.group().vee(&body)
}

/// `H = Q` acting by left multiplication, `ξ_Q(q) = ξ̂q`.
#[derive(Debug, Clone)]
pub struct LeftMultiplication {
    group: Group,
}

impl LeftMultiplication {
    pub fn new(group: Group) -> Self {
        Self { group }
    }
}

impl GroupAction for LeftMultiplication {
    fn acting_group(&self) -> &Group {
        &self.group
    }

    fn act(&self, g: &GroupElement, q: &GroupElement) -> Result<GroupElement> {
        g.compose(q)
    }

    fn generator(&self, xi: &AlgebraVector, q: &GroupElement) -> Result<AlgebraVector> {
        q.inverse()?.adjoint(xi)
    }
}

/// ℝⁿ translating `copies` stacked copies of ℝⁿ simultaneously (a system of
/// particles moved rigidly), acting on `Abelian(n · copies)`.
#[derive(Debug, Clone)]
pub struct DiagonalTranslation {
    group: Group,
    copies: usize,
}

impl DiagonalTranslation {
    pub fn new(n: usize, copies: usize) -> Self {
        Self {
            group: Group::Abelian(n),
            copies,
        }
    }
}

impl GroupAction for DiagonalTranslation {
    fn acting_group(&self) -> &Group {
        &self.group
    }

    fn act(&self, g: &GroupElement, q: &GroupElement) -> Result<GroupElement> {
        let n = self.group.dim();
        if q.group() != &Group::Abelian(n * self.copies) {
            return Err(Error::GroupMismatch(
                q.group().to_string(),
                Group::Abelian(n * self.copies).to_string(),
            ));
        }
        let shift = g.translation();
        let mut x = q.translation();
        for c in 0..self.copies {
            for i in 0..n {
                x[c * n + i] += shift[i];
            }
        }
        Ok(GroupElement::from_translation(&x))
    }

    fn generator(&self, xi: &AlgebraVector, _q: &GroupElement) -> Result<AlgebraVector> {
        self.group.check_dim(xi)?;
        let n = self.group.dim();
        Ok(AlgebraVector::from_fn(n * self.copies, |i, _| xi[i % n]))
    }
}

/// Discrete momentum map: `⟨J_d, ξ⟩ = ⟨D₂L_d(q_k, q_{k+1}), ξ_Q(q_{k+1})⟩`
/// evaluated over the basis of the acting algebra.
pub fn discrete_momentum_map<L, A>(
    ld: &L,
    action: &A,
    qk: &GroupElement,
    qk1: &GroupElement,
) -> Result<CoVector>
where
    L: DiscreteLagrangian + ?Sized,
    A: GroupAction + ?Sized,
{
    let (_, p) = discrete_legendre_plus(ld, qk, qk1)?;
    let h = action.acting_group();
    let mut j = CoVector::zeros(h.dim());
    for i in 0..h.dim() {
        j[i] = p.dot(&action.generator(&h.basis_vector(i), qk1)?);
    }
    Ok(j)
}

/// First-order discrete Euler–Poincaré residual `ρ(W_k) − λ(W_{k−1})` for a
/// reduced Lagrangian `l̃_d` of arity 1. Its zeros are exactly the solutions
/// of the discrete Euler–Lagrange equations of the lift
/// `L_d(g₀, g₁) = l̃_d(g₀⁻¹g₁)`; the residual equals minus that lift's
/// [`del_residual`].
pub fn dep1_residual<L: DiscreteLagrangian + ?Sized>(
    ld: &L,
    w_prev: &GroupElement,
    w: &GroupElement,
) -> Result<CoVector> {
    require_arity(ld, 1)?;
    let rho = right_gradient(ld, std::slice::from_ref(w), 0)?;
    let lambda = ld.slot_gradient(std::slice::from_ref(w_prev), 0)?;
    Ok(rho - lambda)
}

/// The lift `L_d(g₀, g₁) = l̃_d(g₀⁻¹g₁)` of an arity-1 reduced Lagrangian.
pub struct LeftInvariantLift<'a, L: ?Sized> {
    reduced: &'a L,
}

impl<'a, L: DiscreteLagrangian + ?Sized> LeftInvariantLift<'a, L> {
    pub fn new(reduced: &'a L) -> Result<Self> {
        require_arity(reduced, 1)?;
        Ok(Self { reduced })
    }
}

impl<L: DiscreteLagrangian + ?Sized> DiscreteLagrangian for LeftInvariantLift<'_, L> {
    fn group(&self) -> &Group {
        self.reduced.group()
    }

    fn arity(&self) -> usize {
        2
    }

    fn eval(&self, points: &[GroupElement]) -> Result<f64> {
        self.reduced.eval(&[self.increment(points)?])
    }

    /// Moving `g₁` moves `W` on the right, moving `g₀` moves it on the left
    /// with the opposite sign, so both slots come from the reduced gradient.
    fn slot_gradient(&self, points: &[GroupElement], slot: usize) -> Result<CoVector> {
        let w = [self.increment(points)?];
        match slot {
            0 => Ok(-right_gradient(self.reduced, &w, 0)?),
            1 => self.reduced.slot_gradient(&w, 0),
            _ => Err(Error::IndexOutOfRange {
                index: slot,
                min: 0,
                max: 1,
            }),
        }
    }
}

impl<L: DiscreteLagrangian + ?Sized> LeftInvariantLift<'_, L> {
    fn increment(&self, points: &[GroupElement]) -> Result<GroupElement> {
        if points.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: points.len(),
            });
        }
        points[0].inverse()?.compose(&points[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanics::lagrangian::FnLagrangian;
    use nalgebra::DVector;

    #[test]
    fn abelian_dep1_is_difference() {
        let l = FnLagrangian::new(Group::Abelian(3), 1, |p: &[GroupElement]| {
            0.5 * p[0].translation().norm_squared()
        });
        let a = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let b = DVector::from_vec(vec![0.5, 2.5, 0.0]);
        let r = dep1_residual(
            &l,
            &GroupElement::from_translation(&a),
            &GroupElement::from_translation(&b),
        )
        .unwrap();
        assert!((r - (&b - &a)).norm() < 1e-9);
        let same = dep1_residual(
            &l,
            &GroupElement::from_translation(&a),
            &GroupElement::from_translation(&a),
        )
        .unwrap();
        assert!(same.norm() < 1e-9);
    }

    #[test]
    fn diagonal_translation_generator_matches_fd() {
        let act = DiagonalTranslation::new(3, 2);
        let q = GroupElement::from_translation(&DVector::from_fn(6, |i, _| i as f64));
        let xi = DVector::from_vec(vec![0.3, -1.0, 2.0]);
        let exact = act.generator(&xi, &q).unwrap();
        let fd = fd_generator(&act, &xi, &q, 1e-6).unwrap();
        assert!((exact - fd).norm() < 1e-8);
    }

    #[test]
    fn left_multiplication_generator_matches_fd() {
        let act = LeftMultiplication::new(Group::Se3);
        let ret = Retraction::cayley(Group::Se3);
        let q = ret.tau(&DVector::from_vec(vec![0.4, -0.2, 0.9, 1.0, 2.0, -0.5])).unwrap();
        let xi = DVector::from_vec(vec![0.1, 0.7, -0.3, 0.2, 0.0, 1.0]);
        let exact = act.generator(&xi, &q).unwrap();
        let fd = fd_generator(&act, &xi, &q, 1e-6).unwrap();
        assert!((&exact - &fd).norm() < 1e-7 * exact.norm().max(1.0));
    }

    #[test]
    fn lift_gradients_match_fd_of_the_lift() {
        use crate::mechanics::lagrangian::fd_slot_gradient;
        let reduced = FnLagrangian::new(Group::Se3, 1, |p: &[GroupElement]| {
            let m = p[0].matrix();
            m[(0, 1)] * m[(2, 3)] + 0.5 * m[(1, 3)].powi(2) - m.trace()
        });
        let lift = LeftInvariantLift::new(&reduced).unwrap();
        let ret = Retraction::cayley(Group::Se3);
        let g0 = ret.tau(&DVector::from_vec(vec![0.3, -0.5, 0.2, 1.0, 0.1, -0.4])).unwrap();
        let g1 = ret.tau(&DVector::from_vec(vec![-0.2, 0.6, 0.4, 0.3, -1.0, 0.7])).unwrap();
        let pts = [g0, g1];
        for slot in 0..2 {
            let exact = lift.slot_gradient(&pts, slot).unwrap();
            let fd = fd_slot_gradient(&lift, &pts, slot, 1e-5).unwrap();
            assert!((&exact - &fd).norm() < 1e-7, "slot {slot}");
        }
    }
}

//! Second-order and higher-order discrete Euler–Poincaré residuals.
//!
//! The group forms act on increments `W_k = g_k⁻¹ g_{k+1}`. Varying
//! `g_k ↦ g_k exp(εΣ_k)` moves `W_{k−1}` on the right and `W_k` on the left,
//! so each residual collects left-trivialized gradients at `W_{k−1}` and
//! right-trivialized gradients at `W_k`.

use super::lagrangian::{right_gradient, DiscreteLagrangian, ReducedDiscreteLagrangian};
use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, CoVector, GroupElement};
use crate::retraction::Retraction;

fn require_len<T>(items: &[T], needed: usize) -> Result<()> {
    if items.len() != needed {
        return Err(Error::WindowTooShort {
            needed,
            got: items.len(),
        });
    }
    Ok(())
}

fn require_arity<L: DiscreteLagrangian + ?Sized>(l: &L, arity: usize) -> Result<()> {
    if l.arity() != arity {
        return Err(Error::InvalidArgument(format!(
            "expected a Lagrangian of arity {arity}, got {}",
            l.arity()
        )));
    }
    Ok(())
}

/// Combines the two summed momenta of the algebra form:
/// `Ad*_{τ(hΩ_{k−1})} (dτ⁻¹_{hΩ_{k−1}})* a − (dτ⁻¹_{hΩ_k})* b`.
pub fn dep2_algebra_from_sums(
    retraction: &Retraction,
    h: f64,
    omega_prev: &AlgebraVector,
    omega: &AlgebraVector,
    a: &CoVector,
    b: &CoVector,
) -> Result<CoVector> {
    let xi_prev = omega_prev * h;
    let xi = omega * h;
    let left = retraction
        .tau(&xi_prev)?
        .coadjoint(&retraction.dtau_inv_star(&xi_prev, a)?)?;
    let right = retraction.dtau_inv_star(&xi, b)?;
    Ok(left - right)
}

/// Discrete second-order Euler–Poincaré residual in algebra variables for
/// the window `Ω_{k−2}, Ω_{k−1}, Ω_k, Ω_{k+1}`:
///
/// `Ad*_{τ(hΩ_{k−1})}(dτ⁻¹_{hΩ_{k−1}})*(D₁l_d(Ω_{k−1},Ω_k) + D₂l_d(Ω_{k−2},Ω_{k−1}))
///  − (dτ⁻¹_{hΩ_k})*(D₁l_d(Ω_k,Ω_{k+1}) + D₂l_d(Ω_{k−1},Ω_k))`.
///
/// This is `h` times the derivative of `Σ l_d` along `R_k ↦ R_k exp(εη)`
/// with the neighbouring velocities recomputed through `τ⁻¹`.
pub fn dep2_algebra_residual<L: ReducedDiscreteLagrangian + ?Sized>(
    ld: &L,
    retraction: &Retraction,
    h: f64,
    omegas: &[AlgebraVector],
) -> Result<CoVector> {
    require_len(omegas, 4)?;
    let a = ld.d1(&omegas[1], &omegas[2])? + ld.d2(&omegas[0], &omegas[1])?;
    let b = ld.d1(&omegas[2], &omegas[3])? + ld.d2(&omegas[1], &omegas[2])?;
    dep2_algebra_from_sums(retraction, h, &omegas[1], &omegas[2], &a, &b)
}

/// Discrete second-order Euler–Poincaré residual on the group for the window
/// `W_{k−2}, W_{k−1}, W_k, W_{k+1}`:
///
/// `λ_{W_{k−1}}D₁l_d(W_{k−1},W_k) − ρ_{W_k}D₁l_d(W_k,W_{k+1})
///  − ρ_{W_k}D₂l_d(W_{k−1},W_k) + λ_{W_{k−1}}D₂l_d(W_{k−2},W_{k−1})`.
pub fn dep2_group_residual<L: DiscreteLagrangian + ?Sized>(
    ld: &L,
    w: &[GroupElement],
) -> Result<CoVector> {
    require_arity(ld, 2)?;
    require_len(w, 4)?;
    let a = ld.slot_gradient(&w[1..3], 0)?;
    let b = right_gradient(ld, &w[2..4], 0)?;
    let c = right_gradient(ld, &w[1..3], 1)?;
    let d = ld.slot_gradient(&w[0..2], 1)?;
    Ok(a - b - c + d)
}

/// Discrete second-order Euler–Lagrange residual for `L_d(g, W, W′)` with
/// `g = g_{k−2..k}` and `w = W_{k−2..k+1}`:
///
/// `λ_{g_k}D₁L_d(g_k,W_k,W_{k+1}) + λ_{W_{k−1}}D₂L_d(g_{k−1},W_{k−1},W_k)
///  − ρ_{W_k}D₂L_d(g_k,W_k,W_{k+1}) − ρ_{W_k}D₃L_d(g_{k−1},W_{k−1},W_k)
///  + λ_{W_{k−1}}D₃L_d(g_{k−2},W_{k−2},W_{k−1})`.
///
/// The `D₁` term is evaluated at `(g_k, W_k, W_{k+1})` with the pullback at
/// `g_k`: the variation `g_k ↦ g_k exp(εΣ_k)` only enters the first slot of
/// the `k`-th term. Writing it at `g_{k−1}` disagrees with the
/// finite-difference derivative of the action.
pub fn del2_group_residual<L: DiscreteLagrangian + ?Sized>(
    ld: &L,
    g: &[GroupElement],
    w: &[GroupElement],
) -> Result<CoVector> {
    require_arity(ld, 3)?;
    require_len(g, 3)?;
    require_len(w, 4)?;
    for j in 0..2 {
        let expected = g[j].inverse()?.compose(&g[j + 1])?;
        let err = (expected.matrix() - w[j].matrix()).norm();
        if err > 1e-10 * w[j].matrix().norm().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "increment {j} violates W = g_j^-1 g_(j+1) (error {err:e})"
            )));
        }
    }
    let t_k = [g[2].clone(), w[2].clone(), w[3].clone()];
    let t_km1 = [g[1].clone(), w[1].clone(), w[2].clone()];
    let t_km2 = [g[0].clone(), w[0].clone(), w[1].clone()];
    let d1 = ld.slot_gradient(&t_k, 0)?;
    let d2_prev = ld.slot_gradient(&t_km1, 1)?;
    let d2_next = right_gradient(ld, &t_k, 1)?;
    let d3_prev = right_gradient(ld, &t_km1, 2)?;
    let d3_prev2 = ld.slot_gradient(&t_km2, 2)?;
    Ok(d1 + d2_prev - d2_next - d3_prev + d3_prev2)
}

/// Discrete `k`-th order Euler–Poincaré residual for `l_d` of arity `k`, on
/// the window `W_{i−k}, …, W_{i+k−1}` (length `2k`):
///
/// `Σ_{j=2}^{k+1} λ_{W_{i−1}} D_j l_d(W_{i−j+1}, …, W_{i−j+k})
///  − Σ_{j=2}^{k+1} ρ_{W_i} D_j l_d(W_{i−j+2}, …, W_{i−j+k+1})`,
///
/// where `D_j` differentiates the `(j−1)`-th `W` argument. For `k = 2` this
/// is [`dep2_group_residual`]; for `k = 1` it is the negative of
/// [`super::first_order::dep1_residual`].
pub fn depk_residual<L: DiscreteLagrangian + ?Sized>(
    ld: &L,
    window: &[GroupElement],
    k: usize,
) -> Result<CoVector> {
    if k == 0 {
        return Err(Error::InvalidArgument("order k must be at least 1".into()));
    }
    require_arity(ld, k)?;
    require_len(window, 2 * k)?;
    let d = window[0].group().dim();
    let mut total = CoVector::zeros(d);
    // window[m] = W_{i−k+m}; W_{i−1} sits at m = k−1, W_i at m = k.
    for j in 2..=k + 1 {
        let start = k + 1 - j;
        let slot = j - 2;
        // W_{i−j+1..i−j+k} starts at W_{i−j+1} = window[k−j+1]; W_{i−1} is its slot j−2
        total += ld.slot_gradient(&window[start..start + k], slot)?;
        let start = k + 2 - j;
        // W_{i−j+2..i−j+k+1}; W_i is its slot j−2
        total -= right_gradient(ld, &window[start..start + k], slot)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Group;
    use crate::mechanics::first_order::dep1_residual;
    use crate::mechanics::lagrangian::FnLagrangian;
    use nalgebra::DVector;

    fn tr(x: f64) -> GroupElement {
        GroupElement::from_translation(&DVector::from_vec(vec![x]))
    }

    #[test]
    fn abelian_dep2_on_affine_increments() {
        let l = FnLagrangian::new(Group::Abelian(1), 2, |p: &[GroupElement]| {
            0.5 * (p[1].translation()[0] - p[0].translation()[0]).powi(2)
        });
        let w: Vec<_> = (0..4).map(|i| tr(0.3 + 0.7 * i as f64)).collect();
        assert!(dep2_group_residual(&l, &w).unwrap().norm() < 1e-8);
        // the residual is the third difference W_{k+1} − 3W_k + 3W_{k−1} − W_{k−2}
        let w: Vec<_> = (0..4).map(|i| tr((i * i) as f64)).collect();
        assert!(dep2_group_residual(&l, &w).unwrap().norm() < 1e-8);
        let w: Vec<_> = (0..4).map(|i| tr((i * i * i) as f64)).collect();
        let r = dep2_group_residual(&l, &w).unwrap();
        let hand = 27.0 - 3.0 * 8.0 + 3.0 * 1.0 - 0.0;
        assert!((r[0] - hand).abs() < 1e-6);
    }

    #[test]
    fn depk_specializations_on_abelian() {
        let l1 = FnLagrangian::new(Group::Abelian(1), 1, |p: &[GroupElement]| {
            0.5 * p[0].translation()[0].powi(2)
        });
        let w = [tr(0.4), tr(1.3)];
        let a = depk_residual(&l1, &w, 1).unwrap();
        let b = dep1_residual(&l1, &w[0], &w[1]).unwrap();
        assert!((a + b).norm() < 1e-12);
        assert!(depk_residual(&l1, &w[..1], 1).is_err());
    }
}

//! Algebraic invariants of the Lie group kernels and retractions, checked on
//! random inputs.

use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use lievar::mechanics::{dep1_residual, depk_residual, FnLagrangian};
use lievar::validation::convergence_order;
use lievar::{Group, GroupElement, Retraction, RetractionKind};

fn lorentz() -> Group {
    Group::quadratic(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]))).unwrap()
}

fn groups() -> Vec<Group> {
    vec![Group::So3, Group::Se3, lorentz()]
}

fn coords(max_dim: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, max_dim)
}

fn take(group: &Group, xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(&xs[..group.dim()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cayley_round_trip(xs in coords(6, 1.5)) {
        for g in groups() {
            let ret = Retraction::cayley(g.clone());
            let xi = take(&g, &xs);
            let back = ret.tau_inv(&ret.tau(&xi).unwrap()).unwrap();
            assert_abs_diff_eq!(back, xi, epsilon = 1e-10);
        }
    }

    #[test]
    fn cayley_tangent_inverts(xs in coords(6, 1.5), ys in coords(6, 1.0)) {
        for g in groups() {
            let ret = Retraction::cayley(g.clone());
            let (xi, eta) = (take(&g, &xs), take(&g, &ys));
            let there = ret.dtau(&xi, &eta).unwrap();
            assert_abs_diff_eq!(ret.dtau_inv(&xi, &there).unwrap(), eta, epsilon = 1e-10);
        }
    }

    #[test]
    fn cayley_stays_on_the_group(xs in coords(6, 5.0)) {
        for g in groups() {
            let m = Retraction::cayley(g.clone()).tau(&take(&g, &xs)).unwrap();
            // Boosts make the entries large, so the defect is relative to |Y|².
            let rel = m.defect() / m.matrix().norm_squared().max(1.0);
            prop_assert!(rel < 1e-13, "{g}: {rel}");
        }
    }

    #[test]
    fn exponential_round_trip(xs in coords(6, 1.0)) {
        for g in [Group::So3, Group::Se3] {
            let ret = Retraction::new(g.clone(), RetractionKind::Exp(4));
            let xi = take(&g, &xs);
            assert_abs_diff_eq!(ret.tau_inv(&ret.tau(&xi).unwrap()).unwrap(), xi, epsilon = 1e-9);
        }
    }

    #[test]
    fn bracket_is_a_lie_bracket(a in coords(6, 2.0), b in coords(6, 2.0), c in coords(6, 2.0)) {
        for g in groups() {
            let (x, y, z) = (take(&g, &a), take(&g, &b), take(&g, &c));
            let br = |p: &DVector<f64>, q: &DVector<f64>| g.bracket(p, q).unwrap();
            assert_abs_diff_eq!(br(&x, &y), -br(&y, &x), epsilon = 1e-12);
            let jacobi = br(&x, &br(&y, &z)) + br(&y, &br(&z, &x)) + br(&z, &br(&x, &y));
            assert_abs_diff_eq!(jacobi.norm(), 0.0, epsilon = 1e-10);
            // The bracket is the matrix commutator.
            let (hx, hy) = (g.wedge(&x).unwrap(), g.wedge(&y).unwrap());
            assert_abs_diff_eq!(g.wedge(&br(&x, &y)).unwrap(), &hx * &hy - &hy * &hx, epsilon = 1e-10);
        }
    }

    #[test]
    fn coadjoint_is_dual_to_adjoint(a in coords(6, 2.0), b in coords(6, 2.0), m in coords(6, 2.0)) {
        for g in groups() {
            let (x, y, mu) = (take(&g, &a), take(&g, &b), take(&g, &m));
            let lhs = g.ad_star(&x, &mu).unwrap().dot(&y);
            let rhs = mu.dot(&g.ad(&x, &y).unwrap());
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }

    #[test]
    fn adjoint_is_a_homomorphism(a in coords(6, 1.5), b in coords(6, 1.5), c in coords(6, 1.0)) {
        for g in groups() {
            let ret = Retraction::cayley(g.clone());
            let p = ret.tau(&take(&g, &a)).unwrap();
            let q = ret.tau(&take(&g, &b)).unwrap();
            let eta = take(&g, &c);
            let pq = p.compose(&q).unwrap();
            let lhs = pq.adjoint(&eta).unwrap();
            let rhs = p.adjoint(&q.adjoint(&eta).unwrap()).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
            // Ad_g η is the conjugate g η̂ g⁻¹.
            let conj = p.matrix() * g.wedge(&eta).unwrap() * p.inverse().unwrap().matrix();
            assert_abs_diff_eq!(g.wedge(&p.adjoint(&eta).unwrap()).unwrap(), conj, epsilon = 1e-9);
        }
    }

    #[test]
    fn power_laws_have_their_exponent(order in 0.5f64..4.0, c in 0.1f64..10.0) {
        let hs = [0.1f64, 0.05, 0.025, 0.0125];
        let norms: Vec<f64> = hs.iter().map(|h| c * h.powf(order)).collect();
        let rep = convergence_order(&hs, &norms).unwrap();
        assert_abs_diff_eq!(rep.slope, order, epsilon = 1e-9);
    }

    #[test]
    fn first_order_depk_is_minus_dep1(a in coords(6, 0.8), b in coords(6, 0.8)) {
        let g = Group::Se3;
        let l = FnLagrangian::new(g.clone(), 1, |p: &[GroupElement]| {
            let m = p[0].matrix();
            m[(0, 3)].powi(2) + m[(1, 2)] * m[(2, 3)] - 2.0 * m[(0, 0)]
        });
        let ret = Retraction::cayley(g.clone());
        let w0 = ret.tau(&take(&g, &a)).unwrap();
        let w1 = ret.tau(&take(&g, &b)).unwrap();
        let d1 = dep1_residual(&l, &w0, &w1).unwrap();
        let dk = depk_residual(&l, &[w0, w1], 1).unwrap();
        assert_abs_diff_eq!(dk, -d1, epsilon = 1e-12);
    }
}

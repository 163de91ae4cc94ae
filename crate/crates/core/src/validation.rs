//! Independent numerical oracles: finite-difference derivatives, residuals
//! of the continuous equations, conservation diagnostics and convergence
//! order estimation.

use nalgebra::{DMatrix, DVector, Matrix6, Vector3, Vector6};
use serde::Serialize;

use crate::control::rigid::coupling_jacobian;
use crate::control::{rigid_controls, rod_internal_forces};
use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, CoVector, Group};
use crate::mechanics::Trajectory;

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be positive (got {step})")));
    }
    Ok(())
}

/// Central-difference gradient of a scalar function.
pub fn fd_gradient<F>(f: F, x: &DVector<f64>, step: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> f64,
{
    check_step(step)?;
    let mut g = DVector::zeros(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        xp[i] = x[i] + step;
        let fp = f(&xp);
        xp[i] = x[i] - step;
        let fm = f(&xp);
        xp[i] = x[i];
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFinite(i));
        }
        g[i] = (fp - fm) / (2.0 * step);
    }
    Ok(g)
}

/// Central-difference Jacobian of a vector function; column `i` is the
/// derivative along `eᵢ`.
pub fn fd_jacobian<F>(f: F, x: &DVector<f64>, step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    check_step(step)?;
    let mut cols = Vec::with_capacity(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        xp[i] = x[i] + step;
        let fp = f(&xp)?;
        xp[i] = x[i] - step;
        let fm = f(&xp)?;
        xp[i] = x[i];
        let col = (fp - fm) / (2.0 * step);
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        cols.push(col);
    }
    if cols.is_empty() {
        let rows = f(x)?.len();
        return Ok(DMatrix::zeros(rows, 0));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Second-order derivative estimate at every sample: central inside, one-sided
/// three-point at both ends.
fn time_derivative<T>(samples: &[T], h: f64) -> Vec<T>
where
    T: Clone + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = samples.len();
    let s = |i: usize| samples[i].clone();
    (0..n)
        .map(|i| {
            if i == 0 {
                (s(1) * 4.0 - s(0) * 3.0 - s(2)) * (0.5 / h)
            } else if i == n - 1 {
                (s(n - 1) * 3.0 - s(n - 2) * 4.0 + s(n - 3)) * (0.5 / h)
            } else {
                (s(i + 1) - s(i - 1)) * (0.5 / h)
            }
        })
        .collect()
}

fn check_samples(n: usize, needed: usize, h: f64) -> Result<()> {
    if n < needed {
        return Err(Error::WindowTooShort { needed, got: n });
    }
    check_step(h)
}

/// Residual of the continuous second-order Euler–Poincaré equations
/// `p̈ − q̇ + ad*_ξ q − ad*_ξ ṗ` with `p = ∂L/∂ξ̇`, `q = ∂L/∂ξ`, given the
/// partial derivatives of `L` in closed form.
///
/// `ξ̇` is taken at samples `1..n−1` and the time derivatives of `p`, `q` at
/// samples `2..n−2`, all by central stencils. Entry `j` of the result belongs
/// to sample `j + 2`.
pub fn continuous_ep2_residual_with<P>(
    group: &Group,
    partials: P,
    samples: &[AlgebraVector],
    h: f64,
) -> Result<Vec<CoVector>>
where
    P: Fn(&AlgebraVector, &AlgebraVector) -> Result<(CoVector, CoVector)>,
{
    let n = samples.len();
    check_samples(n, 5, h)?;
    for s in samples {
        group.check_dim(s)?;
    }
    let mut p = Vec::with_capacity(n - 2);
    let mut q = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        let xi_dot = (&samples[i + 1] - &samples[i - 1]) / (2.0 * h);
        let (dq, dp) = partials(&samples[i], &xi_dot)?;
        q.push(dq);
        p.push(dp);
    }
    // p[j], q[j] belong to sample j + 1.
    let mut out = Vec::with_capacity(n - 4);
    for j in 1..n - 3 {
        let xi = &samples[j + 1];
        let p_ddot = (&p[j + 1] - &p[j] * 2.0 + &p[j - 1]) / (h * h);
        let p_dot = (&p[j + 1] - &p[j - 1]) / (2.0 * h);
        let q_dot = (&q[j + 1] - &q[j - 1]) / (2.0 * h);
        let r = p_ddot - q_dot + group.ad_star(xi, &q[j])? - group.ad_star(xi, &p_dot)?;
        out.push(r);
    }
    Ok(out)
}

/// As [`continuous_ep2_residual_with`] for a scalar `L(ξ, ξ̇)`, with its
/// partial derivatives taken by central differences.
pub fn continuous_ep2_residual<L>(group: &Group, l: L, samples: &[AlgebraVector], h: f64) -> Result<Vec<CoVector>>
where
    L: Fn(&AlgebraVector, &AlgebraVector) -> f64,
{
    let step = 1e-5;
    continuous_ep2_residual_with(
        group,
        |xi, xi_dot| {
            let q = fd_gradient(|x| l(x, xi_dot), xi, step)?;
            let p = fd_gradient(|x| l(xi, x), xi_dot, step)?;
            Ok((q, p))
        },
        samples,
        h,
    )
}

fn check_aligned(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    Ok(())
}

/// `Ω̇ − coupling(Ω) − u` at every sample. The two end samples use one-sided
/// stencils and are best left out of norms.
pub fn rigid_continuous_residual(
    omegas: &[Vector3<f64>],
    us: &[Vector3<f64>],
    rho: &Vector3<f64>,
    h: f64,
) -> Result<Vec<Vector3<f64>>> {
    check_aligned(omegas.len(), us.len())?;
    check_samples(omegas.len(), 3, h)?;
    let dots = time_derivative(omegas, h);
    Ok(omegas
        .iter()
        .zip(&dots)
        .zip(us)
        .map(|((w, wd), u)| rigid_controls(w, wd, rho) - u)
        .collect())
}

/// `(ṅ + n×u + f, ṁ + n×v + m×u + l)` at every sample, where `(m, n)` are
/// the internal moment and force. Ends use one-sided stencils.
pub fn rod_continuous_residual(
    phis: &[Vector6<f64>],
    controls: &[(Vector3<f64>, Vector3<f64>)],
    k: &Matrix6<f64>,
    phi_bar: &Vector6<f64>,
    h: f64,
) -> Result<Vec<Vector6<f64>>> {
    check_aligned(phis.len(), controls.len())?;
    check_samples(phis.len(), 3, h)?;
    let stress: Vec<Vector6<f64>> = phis
        .iter()
        .map(|phi| {
            let (n, m) = rod_internal_forces(phi, k, phi_bar);
            Vector6::new(n.x, n.y, n.z, m.x, m.y, m.z)
        })
        .collect();
    let dots = time_derivative(&stress, h);
    Ok((0..phis.len())
        .map(|i| {
            let u = phis[i].fixed_rows::<3>(0).into_owned();
            let v = phis[i].fixed_rows::<3>(3).into_owned();
            let n = stress[i].fixed_rows::<3>(0).into_owned();
            let m = stress[i].fixed_rows::<3>(3).into_owned();
            let n_dot = dots[i].fixed_rows::<3>(0).into_owned();
            let m_dot = dots[i].fixed_rows::<3>(3).into_owned();
            let (f, l) = controls[i];
            let a = n_dot + n.cross(&u) + f;
            let b = m_dot + n.cross(&v) + m.cross(&u) + l;
            Vector6::new(a.x, a.y, a.z, b.x, b.y, b.z)
        })
        .collect())
}

/// Log-log fit of residual norms against step sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub hs: Vec<f64>,
    pub norms: Vec<f64>,
    /// Least-squares slope of `log(norm)` against `log(h)`.
    pub slope: f64,
    /// `log(r_i/r_{i+1}) / log(h_i/h_{i+1})` for consecutive pairs.
    pub local_orders: Vec<f64>,
    /// Set when a zero norm was floored to machine epsilon.
    pub floored: bool,
}

pub fn convergence_order(hs: &[f64], norms: &[f64]) -> Result<ConvergenceReport> {
    check_aligned(hs.len(), norms.len())?;
    if hs.len() < 3 {
        return Err(Error::WindowTooShort { needed: 3, got: hs.len() });
    }
    if hs.iter().any(|h| !(*h > 0.0)) || hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("step sizes must be positive and strictly decreasing".into()));
    }
    if let Some(i) = norms.iter().position(|r| !r.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if norms.iter().any(|r| *r < 0.0) {
        return Err(Error::InvalidArgument("norms must be non-negative".into()));
    }
    let floored = norms.iter().any(|r| *r == 0.0);
    let clean: Vec<f64> = norms.iter().map(|r| r.max(f64::EPSILON)).collect();
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = clean.iter().map(|r| r.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let local_orders = (0..xs.len() - 1)
        .map(|i| (ys[i] - ys[i + 1]) / (xs[i] - xs[i + 1]))
        .collect();
    Ok(ConvergenceReport {
        hs: hs.to_vec(),
        norms: norms.to_vec(),
        slope: sxy / sxx,
        local_orders,
        floored,
    })
}

/// Membership defect of every point of a trajectory.
pub fn group_defect(traj: &Trajectory) -> Vec<f64> {
    traj.points.iter().map(|g| g.defect()).collect()
}

/// Order estimates `log(e_{k+1}/e_k) / log(e_k/e_{k−1})` from a sequence of
/// iterate errors, skipping triples that touch zero.
pub fn iterate_orders(errors: &[f64]) -> Vec<f64> {
    errors
        .windows(3)
        .filter(|w| w.iter().all(|e| *e > 0.0) && w[1] != w[0])
        .map(|w| (w[2] / w[1]).ln() / (w[1] / w[0]).ln())
        .collect()
}

/// Classical fourth-order Runge–Kutta with a fixed step. Returns the states
/// at `t₀ + i·dt` for `i = 0..=steps`.
pub fn rk4<F>(f: F, t0: f64, y0: &DVector<f64>, dt: f64, steps: usize) -> Vec<DVector<f64>>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0.clone();
    out.push(y.clone());
    for i in 0..steps {
        let t = t0 + i as f64 * dt;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * dt, &(&y + &k1 * (0.5 * dt)));
        let k3 = f(t + 0.5 * dt, &(&y + &k2 * (0.5 * dt)));
        let k4 = f(t + dt, &(&y + &k3 * dt));
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        out.push(y.clone());
    }
    out
}

/// Right-hand side of the second-order Euler–Poincaré equations of the
/// controlled rigid body, state `(Ω, u, u̇)`:
/// `Ω̇ = coupling(Ω) + u`, `ü = q̇ − ad*_Ω q + ad*_Ω u̇` with `q = −J(Ω)ᵀu`.
pub fn rigid_ep2_rhs(rho: &Vector3<f64>, y: &DVector<f64>) -> DVector<f64> {
    let w = Vector3::new(y[0], y[1], y[2]);
    let u = Vector3::new(y[3], y[4], y[5]);
    let ud = Vector3::new(y[6], y[7], y[8]);
    let wd = crate::control::rigid_dynamics(&w, &u, rho);
    let q = -coupling_jacobian(&w, rho).tr_mul(&u);
    // The coupling Jacobian is linear in Ω.
    let q_dot = -(coupling_jacobian(&wd, rho).tr_mul(&u) + coupling_jacobian(&w, rho).tr_mul(&ud));
    // ad*_Ω μ = μ × Ω.
    let udd = q_dot - q.cross(&w) + ud.cross(&w);
    DVector::from_column_slice(&[wd.x, wd.y, wd.z, ud.x, ud.y, ud.z, udd.x, udd.y, udd.z])
}

/// Partial derivatives `(∂L/∂Ω, ∂L/∂Ω̇)` of the rigid-body cost
/// `L = ½‖Ω̇ − coupling(Ω)‖²`.
pub fn rigid_partials(rho: &Vector3<f64>, w: &AlgebraVector, wd: &AlgebraVector) -> (CoVector, CoVector) {
    let w3 = Vector3::new(w[0], w[1], w[2]);
    let u = rigid_controls(&w3, &Vector3::new(wd[0], wd[1], wd[2]), rho);
    let q = -coupling_jacobian(&w3, rho).tr_mul(&u);
    (
        DVector::from_column_slice(q.as_slice()),
        DVector::from_column_slice(u.as_slice()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::rod_controls;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fd_gradient_examples() {
        let x = DVector::from_vec(vec![3.0]);
        let g = fd_gradient(|x| x[0] * x[0], &x, 1e-6).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-6);
        let c = fd_gradient(|_| 4.2, &DVector::from_vec(vec![1.0, 2.0]), 1e-6).unwrap();
        assert_eq!(c, DVector::zeros(2));
        assert!(fd_gradient(|x| x[0], &x, 0.0).is_err());
        let e = fd_gradient(|x| if x[1] > 0.0 { f64::NAN } else { 0.0 }, &DVector::from_vec(vec![0.0, 0.0]), 1e-3);
        assert_eq!(e, Err(Error::NonFinite(1)));
    }

    #[test]
    fn fd_jacobian_of_linear_map() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 3.0, 0.0, 4.0]);
        let x = DVector::from_vec(vec![0.3, -1.0, 2.0]);
        let j = fd_jacobian(|x| Ok(&a * x), &x, 1e-6).unwrap();
        assert!((j - a).amax() < 1e-9);
    }

    #[test]
    fn ep2_residual_linear_and_constant_curves() {
        let h = 0.1;
        let free = |_: &AlgebraVector, xd: &AlgebraVector| 0.5 * xd.norm_squared();
        let line: Vec<_> = (0..8).map(|i| DVector::from_vec(vec![i as f64 * h, 0.0, 0.0])).collect();
        for r in continuous_ep2_residual(&Group::So3, free, &line, h).unwrap() {
            assert!(r.norm() < 1e-8);
        }
        let constant = vec![DVector::from_vec(vec![0.3, -0.1, 0.7]); 6];
        for r in continuous_ep2_residual(&Group::So3, free, &constant, h).unwrap() {
            assert!(r.norm() < 1e-12);
        }
        assert!(continuous_ep2_residual(&Group::So3, free, &constant[..4], h).is_err());
    }

    #[test]
    fn ep2_residual_on_curve_with_torsion() {
        // ξ(t) = (cos t, sin t, t): ξ⃛ − ξ̈×ξ computed analytically.
        let h = 1e-3;
        let samples: Vec<_> = (0..7)
            .map(|i| {
                let t = 0.4 + i as f64 * h;
                DVector::from_vec(vec![t.cos(), t.sin(), t])
            })
            .collect();
        let res = continuous_ep2_residual_with(
            &Group::So3,
            |_, xd| Ok((DVector::zeros(3), xd.clone())),
            &samples,
            h,
        )
        .unwrap();
        let t = 0.4 + 2.0 * h;
        let xi = Vector3::new(t.cos(), t.sin(), t);
        let xdd = Vector3::new(-t.cos(), -t.sin(), 0.0);
        let xddd = Vector3::new(t.sin(), -t.cos(), 0.0);
        let expected = xddd - xdd.cross(&xi);
        assert!((Vector3::new(res[0][0], res[0][1], res[0][2]) - expected).norm() < 1e-5);
    }

    #[test]
    fn rigid_residual_examples() {
        let rho = Vector3::new(1.0, -1.0, 0.5);
        let w = Vector3::new(0.4, 0.2, -0.3);
        // u cancels the coupling terms.
        let u = rigid_controls(&w, &Vector3::zeros(), &rho);
        let res = rigid_continuous_residual(&[w; 5], &[u; 5], &rho, 0.1).unwrap();
        assert!(res.iter().all(|r| r.norm() < 1e-15));
        let slope = Vector3::new(0.5, -1.0, 2.0);
        let ws: Vec<_> = (0..5).map(|i| slope * (i as f64 * 0.1)).collect();
        let res = rigid_continuous_residual(&ws, &[slope; 5], &Vector3::zeros(), 0.1).unwrap();
        assert!(res.iter().all(|r| r.norm() < 1e-13));
        assert!(rigid_continuous_residual(&ws, &[slope; 4], &rho, 0.1).is_err());
    }

    #[test]
    fn rod_residual_is_second_order_on_smooth_curves() {
        let k = Matrix6::from_diagonal(&Vector6::new(2.0, 2.0, 2.0, 1.0, 1.0, 1.0));
        let phi_bar = Vector6::new(0.1, 0.0, 0.0, 1.0, 0.0, 0.0);
        let rest = rod_continuous_residual(&[phi_bar; 4], &[(Vector3::zeros(), Vector3::zeros()); 4], &k, &phi_bar, 0.1)
            .unwrap();
        assert!(rest.iter().all(|r| r.norm() < 1e-15));

        let curve = |s: f64| Vector6::new(s.sin(), 0.3 * s, s * s, 1.0 + 0.2 * s.cos(), -0.1 * s, 0.5);
        let dcurve = |s: f64| Vector6::new(s.cos(), 0.3, 2.0 * s, -0.2 * s.sin(), -0.1, 0.0);
        let err = |h: f64| {
            let phis: Vec<_> = (0..9).map(|i| curve(i as f64 * h)).collect();
            let ctrl: Vec<_> = (0..9).map(|i| rod_controls(&curve(i as f64 * h), &dcurve(i as f64 * h), &k, &phi_bar)).collect();
            let res = rod_continuous_residual(&phis, &ctrl, &k, &phi_bar, h).unwrap();
            res[1..8].iter().map(|r| r.norm()).fold(0.0, f64::max)
        };
        let hs = [0.1, 0.05, 0.025];
        let norms: Vec<f64> = hs.iter().map(|h| err(*h)).collect();
        let rep = convergence_order(&hs, &norms).unwrap();
        assert!(rep.slope > 1.9, "{rep:?}");
    }

    #[test]
    fn convergence_order_examples() {
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let sq: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
        assert!((convergence_order(&hs, &sq).unwrap().slope - 2.0).abs() < 1e-10);
        let lin: Vec<f64> = hs.iter().map(|h| 0.7 * h).collect();
        assert!((convergence_order(&hs, &lin).unwrap().slope - 1.0).abs() < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let hs: Vec<f64> = (0..6).map(|i| 0.1 / 2f64.powi(i)).collect();
        let noisy: Vec<f64> = hs.iter().map(|h| h * (1.0 + rng.gen_range(-0.1..0.1))).collect();
        let s = convergence_order(&hs, &noisy).unwrap().slope;
        assert!((0.8..=1.2).contains(&s));

        let z = convergence_order(&[0.1, 0.05, 0.025], &[1e-3, 0.0, 1e-5]).unwrap();
        assert!(z.floored);
        assert!(convergence_order(&[0.1, 0.2, 0.05], &[1.0, 1.0, 1.0]).is_err());
        assert!(convergence_order(&[0.1, 0.05], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn defects_of_exact_and_perturbed_points() {
        use crate::lie::GroupElement;
        let r = crate::retraction::cay_so3(&Vector3::new(0.3, -0.2, 1.1));
        let g = GroupElement::from_so3(&r).unwrap();
        let traj = Trajectory::new(vec![g.clone(), g], 0.1);
        assert!(group_defect(&traj).iter().all(|d| *d <= 1e-15));

        let mut m = DMatrix::<f64>::identity(3, 3);
        m[(0, 0)] += 1e-6;
        let d = Group::So3.defect(&m);
        // (1 + ε)² − 1 ≈ 2ε in a single entry.
        assert!((d - 2e-6).abs() < 1e-11);
    }

    #[test]
    fn iterate_orders_detect_quadratic_convergence() {
        let errs = [1e-1, 1e-2, 1e-4, 1e-8];
        let q = iterate_orders(&errs);
        assert!(q.iter().all(|o| (o - 2.0).abs() < 1e-12));
    }

    #[test]
    fn rk4_is_fourth_order() {
        let f = |_: f64, y: &DVector<f64>| -y;
        let err = |steps: usize| {
            let y = rk4(f, 0.0, &DVector::from_vec(vec![1.0]), 1.0 / steps as f64, steps);
            (y.last().unwrap()[0] - (-1f64).exp()).abs()
        };
        let rep = convergence_order(&[0.1, 0.05, 0.025], &[err(10), err(20), err(40)]).unwrap();
        assert!((rep.slope - 4.0).abs() < 0.1);
    }

    #[test]
    fn rigid_reference_solves_the_continuous_equations() {
        let rho = Vector3::new(1.0, -1.0, 0.5);
        let y0 = DVector::from_vec(vec![0.3, -0.2, 0.5, 0.1, 0.4, -0.3, 0.2, 0.0, 0.1]);
        let dt = 1e-3;
        let ys = rk4(|_, y| rigid_ep2_rhs(&rho, y), 0.0, &y0, dt, 40);
        let samples: Vec<_> = ys.iter().map(|y| y.rows(0, 3).into_owned()).collect();
        let res = continuous_ep2_residual_with(&Group::So3, |w, wd| Ok(rigid_partials(&rho, w, wd)), &samples, dt)
            .unwrap();
        assert!(res.iter().all(|r| r.norm() < 1e-4), "{:?}", res[0]);
    }
}

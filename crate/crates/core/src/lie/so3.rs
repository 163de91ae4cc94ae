//! Fixed-size kernels for SO(3) and so(3) ≅ ℝ³.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Antisymmetry tolerance accepted by [`vee3`].
pub const ANTISYMMETRY_TOL: f64 = 1e-9;

/// Hat operator: `hat3(x) * y == x.cross(&y)`.
#[rustfmt::skip]
pub fn hat3(x: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(
         0.0, -x.z,  x.y,
         x.z,  0.0, -x.x,
        -x.y,  x.x,  0.0,
    )
}

/// Inverse of [`hat3`]. Rejects matrices whose symmetric part exceeds
/// [`ANTISYMMETRY_TOL`] in Frobenius norm.
pub fn vee3(m: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let sym = (m + m.transpose()).norm();
    if !(sym <= ANTISYMMETRY_TOL) {
        return Err(Error::NotAntisymmetric(sym));
    }
    Ok(vee3_unchecked(m))
}

/// Reads the axial vector of the antisymmetric part without validation.
pub fn vee3_unchecked(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// Rotation by `angle` about the unit axis `axis` (Rodrigues). Used for
/// building test data and boundary conditions, not as a retraction.
pub fn axis_angle(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    let n = axis.normalize();
    let k = hat3(&n);
    Matrix3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos())
}

/// Orthogonality defect `||RᵀR − I||_F`.
pub fn orthogonality_defect(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).norm()
}

/// Closest rotation in Frobenius norm (polar projection through the SVD).
pub fn project_to_so3(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let svd = m.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Singular("SVD failed during projection".into())),
    };
    let mut d = Matrix3::identity();
    if (u * vt).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    Ok(u * d * vt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hat_zero_and_layout() {
        assert_eq!(hat3(&Vector3::zeros()), Matrix3::zeros());
        #[rustfmt::skip]
        let expected = Matrix3::new(
            0.0, -3.0, 2.0,
            3.0, 0.0, -1.0,
            -2.0, 1.0, 0.0,
        );
        assert_eq!(hat3(&Vector3::new(1.0, 2.0, 3.0)), expected);
        assert_eq!(vee3(&expected).unwrap(), Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(vee3(&Matrix3::zeros()).unwrap(), Vector3::zeros());
    }

    #[test]
    fn vee_rejects_symmetric_part() {
        let mut m = hat3(&Vector3::new(1.0, 0.0, 0.0));
        m[(0, 1)] += 1e-6;
        assert!(matches!(vee3(&m), Err(Error::NotAntisymmetric(_))));
    }

    #[test]
    fn projection_recovers_rotation() {
        let r = axis_angle(&Vector3::new(1.0, 2.0, -0.5), 0.7);
        let noisy = r + Matrix3::from_element(1e-4);
        let p = project_to_so3(&noisy).unwrap();
        assert!(orthogonality_defect(&p) < 1e-12);
        assert!((p - r).norm() < 1e-3);
        assert!(p.determinant() > 0.0);
    }
}

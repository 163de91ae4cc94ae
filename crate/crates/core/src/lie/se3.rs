//! Fixed-size kernels for SE(3) in its homogeneous 4×4 representation.
//!
//! Algebra coordinates are ordered `(u, v)`: rotational part first,
//! translational part second.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector6};

use super::so3::{hat3, vee3};
use crate::error::{Error, Result};

/// `[[û, v], [0, 0]]`.
pub fn wedge_se3(phi: &Vector6<f64>) -> Matrix4<f64> {
    let u = Vector3::new(phi[0], phi[1], phi[2]);
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat3(&u));
    m[(0, 3)] = phi[3];
    m[(1, 3)] = phi[4];
    m[(2, 3)] = phi[5];
    m
}

/// Inverse of [`wedge_se3`].
pub fn vee_se3(m: &Matrix4<f64>) -> Result<Vector6<f64>> {
    let bottom: f64 = (0..4).map(|j| m[(3, j)].abs()).sum();
    if bottom > super::so3::ANTISYMMETRY_TOL {
        return Err(Error::NotInAlgebra {
            group: "SE(3)".into(),
            residual: bottom,
        });
    }
    let u = vee3(&m.fixed_view::<3, 3>(0, 0).into_owned())?;
    Ok(Vector6::new(u.x, u.y, u.z, m[(0, 3)], m[(1, 3)], m[(2, 3)]))
}

/// Assembles `[[R, r], [0, 1]]`.
pub fn se3_from_parts(rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(rotation);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(translation);
    m
}

/// Splits a homogeneous matrix into its rotation block and translation column.
pub fn se3_parts(m: &Matrix4<f64>) -> (Matrix3<f64>, Vector3<f64>) {
    (
        m.fixed_view::<3, 3>(0, 0).into_owned(),
        m.fixed_view::<3, 1>(0, 3).into_owned(),
    )
}

/// Closed-form inverse `[[Rᵀ, −Rᵀr], [0, 1]]`.
pub fn se3_inverse(m: &Matrix4<f64>) -> Matrix4<f64> {
    let (r, t) = se3_parts(m);
    let rt = r.transpose();
    se3_from_parts(&rt, &(-(rt * t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_block_layout() {
        assert_eq!(wedge_se3(&Vector6::zeros()), Matrix4::zeros());
        let m = wedge_se3(&Vector6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0));
        assert_eq!(
            m.fixed_view::<3, 3>(0, 0).into_owned(),
            hat3(&Vector3::new(1.0, 2.0, 3.0))
        );
        assert_eq!(m.fixed_view::<3, 1>(0, 3).into_owned(), Vector3::new(4.0, 5.0, 6.0));
        assert_eq!(m.row(3).into_owned(), nalgebra::RowVector4::zeros());
        assert_eq!(vee_se3(&m).unwrap(), Vector6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0));
    }

    #[test]
    fn closed_form_inverse() {
        let r = super::super::so3::axis_angle(&Vector3::x(), std::f64::consts::FRAC_PI_2);
        let g = se3_from_parts(&r, &Vector3::new(1.0, 0.0, 0.0));
        let inv = se3_inverse(&g);
        let (ri, ti) = se3_parts(&inv);
        assert!((ri - r.transpose()).norm() < 1e-15);
        assert!((ti - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((g * inv - Matrix4::identity()).norm() < 1e-15);
    }
}

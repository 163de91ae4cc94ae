//! Matrix Lie groups and their algebras.
//!
//! Every group is represented by square matrices and every algebra element
//! by its coordinates in a fixed basis. Covectors are coordinate vectors
//! under the Euclidean pairing `⟨μ, η⟩ = Σ μᵢηᵢ`, so every starred
//! operator is the transpose of the corresponding coordinate matrix.
//!
//! Bracket convention: `ad_ξ η = [ξ, η] = ξη − ηξ`; on so(3) this is the
//! cross product, `[x̂, ŷ] = (x × y)^`.

mod quadratic;
pub mod se3;
pub mod so3;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, Vector3};

pub use quadratic::QuadraticGroup;

use crate::error::{Error, Result};

/// Coordinates of a Lie-algebra element.
pub type AlgebraVector = DVector<f64>;

/// Coordinates of a dual-algebra element under the Euclidean pairing.
pub type CoVector = DVector<f64>;

/// Default membership tolerance for validated group elements.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// The supported matrix groups.
#[derive(Debug, Clone, PartialEq)]
pub enum Group {
    /// Rotations, 3×3, algebra coordinates in ℝ³.
    So3,
    /// Rigid motions, 4×4 homogeneous, algebra coordinates `(u, v)` in ℝ⁶.
    Se3,
    /// ℝⁿ under addition, represented by `(n+1)×(n+1)` translation matrices.
    Abelian(usize),
    /// `{Y : YᵀPY = P}` for a user supplied `P`.
    Quadratic(Arc<QuadraticGroup>),
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::So3 => write!(f, "SO(3)"),
            Group::Se3 => write!(f, "SE(3)"),
            Group::Abelian(n) => write!(f, "R^{n}"),
            Group::Quadratic(q) => write!(f, "quadratic group (n = {})", q.matrix_size()),
        }
    }
}

impl Group {
    pub fn quadratic(p: DMatrix<f64>) -> Result<Self> {
        Ok(Group::Quadratic(Arc::new(QuadraticGroup::new(p)?)))
    }

    /// Dimension of the Lie algebra.
    pub fn dim(&self) -> usize {
        match self {
            Group::So3 => 3,
            Group::Se3 => 6,
            Group::Abelian(n) => *n,
            Group::Quadratic(q) => q.dim(),
        }
    }

    /// Side length of the representing matrices.
    pub fn matrix_size(&self) -> usize {
        match self {
            Group::So3 => 3,
            Group::Se3 => 4,
            Group::Abelian(n) => n + 1,
            Group::Quadratic(q) => q.matrix_size(),
        }
    }

    pub fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// The matrix `P` of the quadratic form the group preserves. SE(3) and ℝⁿ
    /// use `diag(0, …, 0, 1)`, which fixes the homogeneous bottom row.
    pub fn quadratic_form(&self) -> DMatrix<f64> {
        match self {
            Group::So3 => DMatrix::identity(3, 3),
            Group::Se3 | Group::Abelian(_) => {
                let n = self.matrix_size();
                let mut p = DMatrix::zeros(n, n);
                p[(n - 1, n - 1)] = 1.0;
                p
            }
            Group::Quadratic(q) => q.p().clone(),
        }
    }

    /// Matrix representative of the algebra element with coordinates `x`.
    pub fn wedge(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        Ok(self.wedge_unchecked(x))
    }

    pub(crate) fn wedge_unchecked(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match self {
            Group::So3 => {
                let m = so3::hat3(&Vector3::new(x[0], x[1], x[2]));
                DMatrix::from_column_slice(3, 3, m.as_slice())
            }
            Group::Se3 => {
                let mut m = DMatrix::zeros(4, 4);
                let h = so3::hat3(&Vector3::new(x[0], x[1], x[2]));
                m.view_mut((0, 0), (3, 3)).copy_from(&h);
                m[(0, 3)] = x[3];
                m[(1, 3)] = x[4];
                m[(2, 3)] = x[5];
                m
            }
            Group::Abelian(n) => {
                let mut m = DMatrix::zeros(n + 1, n + 1);
                for i in 0..*n {
                    m[(i, *n)] = x[i];
                }
                m
            }
            Group::Quadratic(q) => q.wedge(x),
        }
    }

    /// Coordinates of an algebra matrix; rejects matrices outside the algebra.
    pub fn vee(&self, m: &DMatrix<f64>) -> Result<DVector<f64>> {
        let n = self.matrix_size();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.nrows(),
            });
        }
        match self {
            Group::So3 => {
                let v = so3::vee3(&Matrix3::from_column_slice(m.as_slice()))?;
                Ok(DVector::from_column_slice(v.as_slice()))
            }
            Group::Se3 => {
                let v = se3::vee_se3(&Matrix4::from_column_slice(m.as_slice()))?;
                Ok(DVector::from_column_slice(v.as_slice()))
            }
            Group::Abelian(k) => {
                let mut off = m.clone();
                for i in 0..*k {
                    off[(i, *k)] = 0.0;
                }
                let residual = off.norm();
                if residual > MEMBERSHIP_TOL {
                    return Err(Error::NotInAlgebra {
                        group: self.to_string(),
                        residual,
                    });
                }
                Ok(DVector::from_fn(*k, |i, _| m[(i, *k)]))
            }
            Group::Quadratic(q) => q.vee(m),
        }
    }

    /// Projects the commutator or similar expressions back to coordinates
    /// without membership checks (used on internally built algebra matrices).
    pub(crate) fn vee_unchecked(&self, m: &DMatrix<f64>) -> DVector<f64> {
        match self {
            Group::So3 => {
                let v = so3::vee3_unchecked(&Matrix3::from_column_slice(m.as_slice()));
                DVector::from_column_slice(v.as_slice())
            }
            Group::Se3 => {
                let v = so3::vee3_unchecked(&m.fixed_view::<3, 3>(0, 0).into_owned());
                DVector::from_vec(vec![v.x, v.y, v.z, m[(0, 3)], m[(1, 3)], m[(2, 3)]])
            }
            Group::Abelian(k) => DVector::from_fn(*k, |i, _| m[(i, *k)]),
            Group::Quadratic(q) => {
                DVector::from_iterator(q.dim(), q.basis().iter().map(|b| b.dot(m)))
            }
        }
    }

    /// Coordinate matrix of `ad_ξ = [ξ, ·]`.
    pub fn ad_matrix(&self, xi: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(xi)?;
        Ok(match self {
            Group::So3 => {
                let h = so3::hat3(&Vector3::new(xi[0], xi[1], xi[2]));
                DMatrix::from_column_slice(3, 3, h.as_slice())
            }
            Group::Se3 => {
                let hu = so3::hat3(&Vector3::new(xi[0], xi[1], xi[2]));
                let hv = so3::hat3(&Vector3::new(xi[3], xi[4], xi[5]));
                let mut m = DMatrix::zeros(6, 6);
                m.view_mut((0, 0), (3, 3)).copy_from(&hu);
                m.view_mut((3, 0), (3, 3)).copy_from(&hv);
                m.view_mut((3, 3), (3, 3)).copy_from(&hu);
                m
            }
            Group::Abelian(n) => DMatrix::zeros(*n, *n),
            Group::Quadratic(q) => {
                let x = q.wedge(xi);
                let d = q.dim();
                let mut m = DMatrix::zeros(d, d);
                for (j, b) in q.basis().iter().enumerate() {
                    let c = &x * b - b * &x;
                    m.set_column(j, &self.vee_unchecked(&c));
                }
                m
            }
        })
    }

    /// `ad_ξ η = [ξ, η]` in coordinates.
    pub fn ad(&self, xi: &DVector<f64>, eta: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(eta)?;
        Ok(self.ad_matrix(xi)? * eta)
    }

    /// `ad*_ξ μ`, defined by `⟨ad*_ξ μ, η⟩ = ⟨μ, ad_ξ η⟩`.
    pub fn ad_star(&self, xi: &DVector<f64>, mu: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(mu)?;
        Ok(self.ad_matrix(xi)?.tr_mul(mu))
    }

    /// Matrix commutator of the wedged representatives, read back in
    /// coordinates. Slower than [`Group::ad`]; kept as an independent route.
    pub fn bracket(&self, xi: &DVector<f64>, eta: &DVector<f64>) -> Result<DVector<f64>> {
        let a = self.wedge(xi)?;
        let b = self.wedge(eta)?;
        self.vee(&(&a * &b - &b * &a))
    }

    pub fn identity(&self) -> GroupElement {
        let n = self.matrix_size();
        GroupElement {
            group: self.clone(),
            mat: DMatrix::identity(n, n),
        }
    }

    /// Distance of `m` from the group: the quadratic-form defect plus, for
    /// groups with a homogeneous row, the deviation of that row.
    pub fn defect(&self, m: &DMatrix<f64>) -> f64 {
        let n = self.matrix_size();
        if m.nrows() != n || m.ncols() != n {
            return f64::INFINITY;
        }
        match self {
            Group::So3 => (m.transpose() * m - DMatrix::identity(3, 3)).norm(),
            Group::Se3 => {
                let r = m.view((0, 0), (3, 3));
                let orth = (r.transpose() * r - DMatrix::identity(3, 3)).norm();
                orth + bottom_row_defect(m)
            }
            Group::Abelian(k) => {
                let block = m.view((0, 0), (*k, *k)) - DMatrix::identity(*k, *k);
                block.norm() + bottom_row_defect(m)
            }
            Group::Quadratic(q) => q.defect(m),
        }
    }

    /// Algebra element of the `i`-th basis vector.
    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        let mut e = DVector::zeros(self.dim());
        e[i] = 1.0;
        e
    }
}

fn bottom_row_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    (0..n)
        .map(|j| {
            let target = if j == n - 1 { 1.0 } else { 0.0 };
            (m[(n - 1, j)] - target).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// A validated group element.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    group: Group,
    mat: DMatrix<f64>,
}

impl GroupElement {
    /// Validates membership at [`MEMBERSHIP_TOL`].
    pub fn new(group: Group, mat: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(group, mat, MEMBERSHIP_TOL)
    }

    pub fn with_tolerance(group: Group, mat: DMatrix<f64>, tol: f64) -> Result<Self> {
        if let Some(i) = mat.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let defect = group.defect(&mat);
        if !(defect <= tol) {
            return Err(Error::NotMember {
                group: group.to_string(),
                defect,
            });
        }
        if matches!(group, Group::So3) && mat.determinant() <= 0.0 {
            return Err(Error::NotMember {
                group: group.to_string(),
                defect: f64::INFINITY,
            });
        }
        if matches!(group, Group::Se3) && mat.view((0, 0), (3, 3)).determinant() <= 0.0 {
            return Err(Error::NotMember {
                group: group.to_string(),
                defect: f64::INFINITY,
            });
        }
        Ok(Self { group, mat })
    }

    /// Wraps a matrix produced by closed-form group operations.
    pub(crate) fn from_matrix_unchecked(group: Group, mat: DMatrix<f64>) -> Self {
        Self { group, mat }
    }

    pub fn from_so3(r: &Matrix3<f64>) -> Result<Self> {
        Self::new(Group::So3, DMatrix::from_column_slice(3, 3, r.as_slice()))
    }

    pub fn from_se3(m: &Matrix4<f64>) -> Result<Self> {
        Self::new(Group::Se3, DMatrix::from_column_slice(4, 4, m.as_slice()))
    }

    /// Element of ℝⁿ with translation `x`.
    pub fn from_translation(x: &DVector<f64>) -> Self {
        let n = x.len();
        let mut m = DMatrix::identity(n + 1, n + 1);
        for i in 0..n {
            m[(i, n)] = x[i];
        }
        Self {
            group: Group::Abelian(n),
            mat: m,
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn to_so3(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.mat[(i, j)])
    }

    pub fn to_se3(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.mat[(i, j)])
    }

    /// Last column without the homogeneous entry (translation for SE(3) and ℝⁿ).
    pub fn translation(&self) -> DVector<f64> {
        let n = self.mat.nrows();
        DVector::from_fn(n - 1, |i, _| self.mat[(i, n - 1)])
    }

    fn same_group(&self, other: &GroupElement) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch(
                self.group.to_string(),
                other.group.to_string(),
            ));
        }
        Ok(())
    }

    /// Group product `self · other`.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        self.same_group(other)?;
        Ok(Self {
            group: self.group.clone(),
            mat: &self.mat * &other.mat,
        })
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        let mat = match &self.group {
            Group::So3 => self.mat.transpose(),
            Group::Se3 => {
                let inv = se3::se3_inverse(&self.to_se3());
                DMatrix::from_column_slice(4, 4, inv.as_slice())
            }
            Group::Abelian(n) => {
                let mut m = self.mat.clone();
                for i in 0..*n {
                    m[(i, *n)] = -m[(i, *n)];
                }
                m
            }
            Group::Quadratic(_) => self
                .mat
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Singular("group element is not invertible".into()))?,
        };
        Ok(Self {
            group: self.group.clone(),
            mat,
        })
    }

    /// Coordinate matrix of `Ad_g η = g η g⁻¹`.
    pub fn adjoint_matrix(&self) -> Result<DMatrix<f64>> {
        Ok(match &self.group {
            Group::So3 => self.mat.clone(),
            Group::Se3 => {
                let (r, t) = se3::se3_parts(&self.to_se3());
                let tr = so3::hat3(&t) * r;
                let mut m = DMatrix::zeros(6, 6);
                m.view_mut((0, 0), (3, 3)).copy_from(&r);
                m.view_mut((3, 0), (3, 3)).copy_from(&tr);
                m.view_mut((3, 3), (3, 3)).copy_from(&r);
                m
            }
            Group::Abelian(n) => DMatrix::identity(*n, *n),
            Group::Quadratic(_) => {
                let inv = self.inverse()?;
                let d = self.group.dim();
                let mut m = DMatrix::zeros(d, d);
                for j in 0..d {
                    let e = self.group.wedge_unchecked(&self.group.basis_vector(j));
                    let c = &self.mat * e * &inv.mat;
                    m.set_column(j, &self.group.vee_unchecked(&c));
                }
                m
            }
        })
    }

    /// `Ad_g η`.
    pub fn adjoint(&self, eta: &DVector<f64>) -> Result<DVector<f64>> {
        self.group.check_dim(eta)?;
        Ok(self.adjoint_matrix()? * eta)
    }

    /// `Ad*_g μ`, defined by `⟨Ad*_g μ, η⟩ = ⟨μ, Ad_g η⟩`.
    pub fn coadjoint(&self, mu: &DVector<f64>) -> Result<DVector<f64>> {
        self.group.check_dim(mu)?;
        Ok(self.adjoint_matrix()?.tr_mul(mu))
    }

    pub fn defect(&self) -> f64 {
        self.group.defect(&self.mat)
    }

    /// Re-orthonormalizes the rotation block by polar projection. Never
    /// applied implicitly.
    pub fn project(group: Group, mat: &DMatrix<f64>) -> Result<GroupElement> {
        match group {
            Group::So3 => {
                let r = so3::project_to_so3(&Matrix3::from_fn(|i, j| mat[(i, j)]))?;
                Self::from_so3(&r)
            }
            Group::Se3 => {
                let r = so3::project_to_so3(&Matrix3::from_fn(|i, j| mat[(i, j)]))?;
                let t = Vector3::new(mat[(0, 3)], mat[(1, 3)], mat[(2, 3)]);
                Self::from_se3(&se3::se3_from_parts(&r, &t))
            }
            Group::Abelian(n) => {
                Ok(Self::from_translation(&DVector::from_fn(n, |i, _| mat[(i, n)])))
            }
            Group::Quadratic(_) => Err(Error::InvalidArgument(
                "projection is only available for SO(3), SE(3) and R^n".into(),
            )),
        }
    }
}

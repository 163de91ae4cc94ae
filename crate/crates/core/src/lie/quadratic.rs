//! Generic quadratic matrix groups `{Y : YᵀPY = P}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A quadratic group together with an orthonormal (Frobenius) basis of its
/// Lie algebra `{Ω : ΩᵀP + PΩ = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGroup {
    p: DMatrix<f64>,
    basis: Vec<DMatrix<f64>>,
}

impl QuadraticGroup {
    /// Builds the group for the square matrix `p`; the algebra basis is the
    /// numerical null space of `Ω ↦ ΩᵀP + PΩ`.
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        let n = p.nrows();
        if n == 0 || p.ncols() != n {
            return Err(Error::InvalidArgument("P must be a non-empty square matrix".into()));
        }
        let nn = n * n;
        let mut op = DMatrix::zeros(nn, nn);
        for col in 0..nn {
            let mut e = DMatrix::zeros(n, n);
            e[(col / n, col % n)] = 1.0;
            let image = e.transpose() * &p + &p * &e;
            for row in 0..nn {
                op[(row, col)] = image[(row / n, row % n)];
            }
        }
        let svd = op.svd(false, true);
        let vt = svd
            .v_t
            .ok_or_else(|| Error::Singular("SVD of the algebra constraint failed".into()))?;
        let smax = svd.singular_values.max().max(1.0);
        let basis: Vec<DMatrix<f64>> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, s)| **s <= 1e-10 * smax)
            .map(|(i, _)| DMatrix::from_fn(n, n, |r, c| vt[(i, r * n + c)]))
            .collect();
        if basis.is_empty() {
            return Err(Error::InvalidArgument("quadratic group has a trivial algebra".into()));
        }
        Ok(Self { p, basis })
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn matrix_size(&self) -> usize {
        self.p.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub(crate) fn wedge(&self, coords: &DVector<f64>) -> DMatrix<f64> {
        let n = self.matrix_size();
        self.basis
            .iter()
            .zip(coords.iter())
            .fold(DMatrix::zeros(n, n), |acc, (b, c)| acc + b * *c)
    }

    pub(crate) fn vee(&self, m: &DMatrix<f64>) -> Result<DVector<f64>> {
        let coords = DVector::from_iterator(self.dim(), self.basis.iter().map(|b| b.dot(m)));
        let residual = (self.wedge(&coords) - m).norm();
        if residual > 1e-9 * m.norm().max(1.0) {
            return Err(Error::NotInAlgebra {
                group: "quadratic group".into(),
                residual,
            });
        }
        Ok(coords)
    }

    /// `||YᵀPY − P||_F`.
    pub fn defect(&self, y: &DMatrix<f64>) -> f64 {
        (y.transpose() * &self.p * y - &self.p).norm()
    }
}

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, Group, GroupElement};
use crate::retraction::Retraction;

/// Group samples `g₀..g_N`, optionally with the algebra samples `ξ₀..ξ_{N−1}`
/// that generate them through `g_{k+1} = g_k τ(hξ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<GroupElement>,
    pub algebra: Option<Vec<AlgebraVector>>,
    pub h: f64,
}

impl Trajectory {
    pub fn new(points: Vec<GroupElement>, h: f64) -> Self {
        Self {
            points,
            algebra: None,
            h,
        }
    }

    /// Builds `g_{k+1} = g_k τ(hξ_k)` from `g₀`. The result keeps the algebra
    /// samples. Domain failures report the offending step.
    pub fn reconstruct(
        g0: &GroupElement,
        algebra: &[AlgebraVector],
        retraction: &Retraction,
        h: f64,
    ) -> Result<Self> {
        let mut points = Vec::with_capacity(algebra.len() + 1);
        points.push(g0.clone());
        for (k, xi) in algebra.iter().enumerate() {
            let step = retraction.tau(&(xi * h)).map_err(|e| Error::DomainAt {
                index: k,
                message: e.to_string(),
            })?;
            let next = points[k].compose(&step)?;
            points.push(next);
        }
        Ok(Self {
            points,
            algebra: Some(algebra.to_vec()),
            h,
        })
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn group(&self) -> Option<&Group> {
        self.points.first().map(|g| g.group())
    }

    /// Largest `‖g_{k+1} − g_k τ(hξ_k)‖_F` over the stored algebra samples;
    /// zero when no algebra samples are stored.
    pub fn reconstruction_error(&self, retraction: &Retraction) -> Result<f64> {
        let Some(alg) = &self.algebra else {
            return Ok(0.0);
        };
        if alg.len() + 1 < self.points.len() {
            return Err(Error::DimensionMismatch {
                expected: self.points.len() - 1,
                got: alg.len(),
            });
        }
        let mut worst: f64 = 0.0;
        for k in 0..self.steps() {
            let pred = self.points[k].compose(&retraction.tau(&(&alg[k] * self.h))?)?;
            worst = worst.max((pred.matrix() - self.points[k + 1].matrix()).norm());
        }
        Ok(worst)
    }

    /// Body increments `W_k = g_k⁻¹ g_{k+1}`.
    pub fn increments(&self) -> Result<Vec<GroupElement>> {
        self.points
            .windows(2)
            .map(|w| w[0].inverse()?.compose(&w[1]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn reconstruction_examples() {
        let ret = Retraction::cayley(Group::So3);
        let zero = vec![DVector::zeros(3); 5];
        let t = Trajectory::reconstruct(&Group::So3.identity(), &zero, &ret, 0.1).unwrap();
        assert_eq!(t.points.len(), 6);
        assert!(t.points.iter().all(|g| g == &Group::So3.identity()));

        let one = vec![DVector::from_vec(vec![2.0, 0.0, 0.0])];
        let t = Trajectory::reconstruct(&Group::So3.identity(), &one, &ret, 1.0).unwrap();
        let r = t.points[1].to_so3();
        assert!((r[(1, 2)] + 1.0).abs() < 1e-15 && (r[(2, 1)] - 1.0).abs() < 1e-15);
        assert_eq!(t.reconstruction_error(&ret).unwrap(), 0.0);
        let w = t.increments().unwrap();
        assert!((w[0].matrix() - t.points[1].matrix()).norm() < 1e-15);
    }
}

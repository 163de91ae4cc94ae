//! JSON problem configurations.

use std::path::Path;

use nalgebra::{DMatrix, Matrix3, Matrix4, Matrix6, Vector3, Vector6};
use serde::Deserialize;

use crate::control::{CosseratRodProblem, NewtonConfig, RigidBodyProblem, RodModel, RodScheme, MIN_STEPS};
use crate::lie::se3::se3_from_parts;
use crate::lie::so3::project_to_so3;
use crate::lie::{Group, MEMBERSHIP_TOL};
use crate::retraction::RetractionKind;

/// Largest membership defect accepted on input; anything between
/// [`MEMBERSHIP_TOL`] and this is re-orthonormalized with a warning.
pub const INPUT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    RigidBody,
    Rod,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonSettings {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub problem: ProblemKind,
    pub rho: Option<[f64; 3]>,
    #[serde(rename = "R0")]
    pub r0: Option<Vec<f64>>,
    #[serde(rename = "RT")]
    pub rt: Option<Vec<f64>>,
    #[serde(rename = "Omega0")]
    pub omega0: Option<[f64; 3]>,
    #[serde(rename = "OmegaT")]
    pub omega_t: Option<[f64; 3]>,
    #[serde(rename = "K")]
    pub k: Option<Vec<f64>>,
    pub phi_bar: Option<[f64; 6]>,
    pub rho1: Option<f64>,
    #[serde(rename = "Phi0")]
    pub frame0: Option<Vec<f64>>,
    #[serde(rename = "PhiT")]
    pub frame_t: Option<Vec<f64>>,
    pub phi0: Option<[f64; 6]>,
    #[serde(rename = "phiT")]
    pub phi_t: Option<[f64; 6]>,
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
    pub retraction: Option<String>,
    pub scheme: Option<String>,
    /// Pins the last algebra sample to `OmegaT` (rigid body only).
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub newton: NewtonSettings,
}

/// Overrides taken from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub retraction: Option<String>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum Problem {
    RigidBody(RigidBodyProblem),
    Rod(CosseratRodProblem),
}

impl Problem {
    pub fn n(&self) -> usize {
        match self {
            Problem::RigidBody(p) => p.n,
            Problem::Rod(p) => p.n,
        }
    }

    pub fn h(&self) -> f64 {
        match self {
            Problem::RigidBody(p) => p.h,
            Problem::Rod(p) => p.h,
        }
    }
}

pub fn read_config(path: &Path) -> Result<ProblemConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ProblemConfig, String> {
    serde_json::from_str(text).map_err(|e| format!("malformed config: {e}"))
}

fn require<T: Clone>(v: &Option<T>, field: &str) -> Result<T, String> {
    v.clone().ok_or_else(|| format!("missing field `{field}`"))
}

fn finite(field: &str, xs: &[f64]) -> Result<(), String> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(format!("field `{field}` must contain finite numbers"));
    }
    Ok(())
}

/// Parses a row-major rotation and checks membership. Small defects are
/// projected away with a warning on stderr.
pub fn rotation(field: &str, xs: &[f64]) -> Result<Matrix3<f64>, String> {
    if xs.len() != 9 {
        return Err(format!("field `{field}` needs 9 row-major entries, got {}", xs.len()));
    }
    finite(field, xs)?;
    let r = Matrix3::from_row_slice(xs);
    let defect = Group::So3.defect(&DMatrix::from_row_slice(3, 3, xs));
    let det = r.determinant();
    if defect > INPUT_TOL || det <= 0.0 {
        return Err(format!(
            "field `{field}` is not a rotation matrix: membership defect {defect:.3e} exceeds {INPUT_TOL:e} (det {det:.6})"
        ));
    }
    if defect > MEMBERSHIP_TOL {
        eprintln!("warning: `{field}` has membership defect {defect:.3e}; re-orthonormalized by polar projection");
        return project_to_so3(&r).map_err(|e| format!("field `{field}`: {e}"));
    }
    Ok(r)
}

/// Rotation (9 row-major entries) followed by a translation (3 entries).
pub fn frame(field: &str, xs: &[f64]) -> Result<Matrix4<f64>, String> {
    if xs.len() != 12 {
        return Err(format!(
            "field `{field}` needs 12 entries (rotation row-major, then translation), got {}",
            xs.len()
        ));
    }
    let r = rotation(field, &xs[..9])?;
    finite(field, &xs[9..])?;
    Ok(se3_from_parts(&r, &Vector3::new(xs[9], xs[10], xs[11])))
}

impl ProblemConfig {
    pub fn newton_config(&self, overrides: &Overrides) -> Result<NewtonConfig, String> {
        let mut cfg = NewtonConfig::default();
        if let Some(t) = overrides.tol.or(self.newton.tol) {
            cfg.tol = t;
        }
        if let Some(m) = overrides.max_iter.or(self.newton.max_iter) {
            cfg.max_iter = m;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    fn retraction_kind(&self, overrides: &Overrides) -> Result<RetractionKind, String> {
        match overrides.retraction.as_ref().or(self.retraction.as_ref()) {
            None => Ok(RetractionKind::Cayley),
            Some(name) => name.parse().map_err(|e: crate::error::Error| e.to_string()),
        }
    }

    pub fn build(&self, overrides: &Overrides) -> Result<Problem, String> {
        if self.n < MIN_STEPS {
            return Err(format!("N must be at least {MIN_STEPS} (got {})", self.n));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(format!("h must be positive (got {})", self.h));
        }
        let retraction = self.retraction_kind(overrides)?;
        let problem = match self.problem {
            ProblemKind::RigidBody => {
                let rho = Vector3::from(require(&self.rho, "rho")?);
                let omega0 = Vector3::from(require(&self.omega0, "Omega0")?);
                finite("rho", rho.as_slice())?;
                finite("Omega0", omega0.as_slice())?;
                let r0 = rotation("R0", &require(&self.r0, "R0")?)?;
                let rt = rotation("RT", &require(&self.rt, "RT")?)?;
                let mut p = RigidBodyProblem::new(rho, r0, rt, omega0, self.n, self.h);
                p.retraction = retraction;
                p.omega_t = self.omega_t.map(Vector3::from);
                p.strict = self.strict;
                p.validate().map_err(|e| e.to_string())?;
                Problem::RigidBody(p)
            }
            ProblemKind::Rod => {
                let k = require(&self.k, "K")?;
                if k.len() != 36 {
                    return Err(format!("field `K` needs 36 row-major entries, got {}", k.len()));
                }
                finite("K", &k)?;
                let phi_bar = Vector6::from(require(&self.phi_bar, "phi_bar")?);
                let phi0 = Vector6::from(require(&self.phi0, "phi0")?);
                finite("phi0", phi0.as_slice())?;
                let model = RodModel::new(
                    Matrix6::from_row_slice(&k),
                    phi_bar,
                    require(&self.rho1, "rho1")?,
                );
                let scheme: RodScheme = match &self.scheme {
                    None => RodScheme::CayleyFull,
                    Some(s) => s.parse().map_err(|e: crate::error::Error| e.to_string())?,
                };
                let f0 = frame("Phi0", &require(&self.frame0, "Phi0")?)?;
                let ft = frame("PhiT", &require(&self.frame_t, "PhiT")?)?;
                let mut p = CosseratRodProblem::new(model, f0, ft, phi0, self.n, self.h, scheme);
                p.retraction = retraction;
                p.phi_t = self.phi_t.map(Vector6::from);
                p.validate().map_err(|e| e.to_string())?;
                Problem::Rod(p)
            }
        };
        Ok(problem)
    }
}

/// Vector-space configuration of the `integrate` command.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateConfig {
    /// Mass matrix, row-major `n × n`.
    #[serde(rename = "M")]
    pub mass: Vec<f64>,
    /// Coefficients `c₀, c₁, …` of the polynomial applied to every coordinate.
    #[serde(rename = "V", default)]
    pub potential: Vec<f64>,
    pub q0: Vec<f64>,
    pub q1: Vec<f64>,
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
}

impl IntegrateConfig {
    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| format!("malformed config: {e}"))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn dim(&self) -> usize {
        self.q0.len()
    }

    fn check(&self) -> Result<(), String> {
        let n = self.dim();
        if self.q1.len() != n || self.mass.len() != n * n {
            return Err(format!(
                "dimensions disagree: q0 has {n} entries, q1 {}, M {} (expected {})",
                self.q1.len(),
                self.mass.len(),
                n * n
            ));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(format!("h must be positive (got {})", self.h));
        }
        finite("M", &self.mass)?;
        finite("V", &self.potential)?;
        finite("q0", &self.q0)?;
        finite("q1", &self.q1)
    }
}

use thiserror::Error;

/// Errors raised by the group kernels, residual assemblers and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("group mismatch: {0} vs {1}")]
    GroupMismatch(String, String),

    #[error("matrix is not antisymmetric (||X + X^T|| = {0:e})")]
    NotAntisymmetric(f64),

    #[error("matrix is not in the Lie algebra of {group} (residual {residual:e})")]
    NotInAlgebra { group: String, residual: f64 },

    #[error("matrix is not a member of {group} (defect {defect:e})")]
    NotMember { group: String, defect: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("retraction domain error: {0}")]
    Domain(String),

    #[error("retraction domain error at step {index}: {message}")]
    DomainAt { index: usize, message: String },

    #[error("index {index} out of range (valid: {min}..={max})")]
    IndexOutOfRange { index: usize, min: usize, max: usize },

    #[error("window too short: need {needed}, got {got}")]
    WindowTooShort { needed: usize, got: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by every computation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("potential is not strictly convex at the evaluated point")]
    NonConvexPotential,

    #[error("matrix is not symmetric positive definite")]
    NotSpd,

    #[error("linear map is not self-adjoint")]
    NotSelfAdjoint,

    #[error("linear map is not unimodular (det = {det})")]
    NotUnimodular { det: f64 },

    #[error("generator evaluated outside its domain (t = {t})")]
    DomainError { t: f64 },

    #[error("integral diverged: {reason}")]
    IntegralDiverged { reason: String },

    #[error("negative factor {value:e} inside a fractional power")]
    NegativeFactor { value: f64 },

    #[error("Hessian is singular where a negative power of its determinant is required")]
    SingularHessian,

    #[error("optimization failed after {iterations} iterations (residual {residual:e})")]
    OptimizationFailed { iterations: usize, residual: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gate violated for check {check}: {reason}")]
    GateViolation { check: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn diverged(reason: impl Into<String>) -> Self {
        Error::IntegralDiverged {
            reason: reason.into(),
        }
    }

    pub(crate) fn gate(check: &str, reason: impl Into<String>) -> Self {
        Error::GateViolation {
            check: check.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

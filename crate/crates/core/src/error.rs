use thiserror::Error;

/// Errors raised by the solver, the ground-state oracle and the run driver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid needs an even number of modes >= 8, got {0}")]
    InvalidModes(usize),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("grid mismatch between fields")]
    GridMismatch,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("peak value N = {0} is outside [0, 1)")]
    PeakOutOfRange(f64),

    #[error("kappa = {0} is outside (0, 1); no odd zero-up ground state exists")]
    KappaOutOfRange(f64),

    #[error("root solve for the peak value did not converge (|g - target| = {residual:e})")]
    PeakSolveFailed { residual: f64 },

    #[error("implicit Euler inner iteration did not converge after {iterations} iterations (last update {last_update:e})")]
    InnerSolveFailed { iterations: usize, last_update: f64 },

    #[error("exact reaction flow has non-positive denominator at u = {0}")]
    ReactionBlowUp(f64),

    #[error("state became non-finite at step {step}")]
    NonFinite { step: usize },

    #[error("no steady state in the catalogue within mismatch {threshold:e} (best {best:e})")]
    Unclassified { best: f64, threshold: f64 },

    #[error("kappa = {0} >= 1 admits only constant steady states, but the field is not constant")]
    NonConstantAboveThreshold(f64),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

use thiserror::Error;

use crate::hamiltonian::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Malformed input shape: wrong block count, non-square matrix, empty signature.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("matrices do not form a quaternionic triple (residual {residual:e})")]
    InvalidStructure { residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("zero frequency (nu = {nu:e}); the flow is stationary")]
    ZeroFrequency { nu: f64 },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("profile cannot be written as hamiltonians: {0}")]
    NotRepresentable(String),

    #[error("action-spin coordinates are singular: block {block} has zero radius")]
    SingularCoordinates { block: usize },

    #[error("integration diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("inconsistent result: {0}")]
    Inconsistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("basis does not close under the bracket (residual {residual:e})")]
    NonClosure { residual: f64 },
}

impl Error {
    /// Whether the failure comes from the numerics rather than from malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroFrequency { .. }
                | Error::Divergence { .. }
                | Error::Inconsistency(_)
                | Error::NonClosure { .. }
                | Error::Degenerate(_)
        )
    }
}

use thiserror::Error;

/// Failures reported by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operand dimensions are incompatible with the requested operation.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An input violates a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The eigenvector matrix is too ill-conditioned to treat the input as diagonalizable.
    #[error("matrix is not diagonalizable within tolerance (eigenvector condition estimate {condition:.3e})")]
    NonDiagonalizable { condition: f64 },

    /// A computed result drifted outside its physical tolerance.
    #[error("numeric health check failed: {0}")]
    NumericHealth(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

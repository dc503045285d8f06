//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shape or size mismatch between fields, matrices, or lattices.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid input that violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A matrix is singular or an eigenvalue fell below the configured floor.
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// A self-adjointness or positivity contract was violated at runtime.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input family not covered by the implemented example catalog.
    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// The adaptive flow could not take a step at any admissible dt.
    #[error("flow step failure: {0}")]
    StepFailure(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the recovery pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes of matrices or index sets disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Linear algebra kernel failure (eigensolver, SVD).
    #[error("solver error: {0}")]
    Solver(String),

    /// The Toeplitz block has no low-rank Vandermonde form.
    #[error("no low-rank structure: rank {rank} of {n}; decomposition not unique")]
    NotLowRank { rank: usize, n: usize },

    /// Steering vectors are too close to be separated numerically.
    #[error("ill-conditioned: {0}")]
    Conditioning(String),

    /// A randomized generator exhausted its retry budget.
    #[error("sampling failed after {attempts} attempts: {reason}")]
    SamplingBudget { attempts: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

use thiserror::Error;

/// Errors raised by the analytic and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no convergence after {evaluations} evaluations (best estimate {estimate}, error {error_estimate})")]
    Convergence {
        estimate: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("non-finite value while evaluating {0}")]
    Evaluation(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("ill-posed boundary problem: {0}")]
    IllPosedBoundary(String),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

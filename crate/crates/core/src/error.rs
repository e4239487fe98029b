use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate outcome: {0}")]
    DegenerateOutcome(String),

    #[error("truncation leakage {leakage:e} exceeds bound {bound:e} (lambda = {lambda}, cutoff = {cutoff})")]
    Leakage {
        lambda: f64,
        cutoff: usize,
        leakage: f64,
        bound: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn invalid_state<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidState(msg.into()))
}

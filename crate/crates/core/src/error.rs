use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("t must be positive, got {0}")]
    NonPositiveT(f64),
    #[error("regular-variation constants (C0, alpha) unavailable for {0}")]
    HypothesisUnavailable(String),
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },
    #[error("alpha must lie in (1, 2), got {0}")]
    BadAlpha(f64),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("sample is empty")]
    EmptySample,
    #[error("evaluation times are not sorted ascending")]
    UnsortedTimes,
    #[error("n = {0} is too large for the explicit partition simulator (max 12)")]
    TooLarge(usize),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("unknown density {0:?}")]
    UnknownDensity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(what: &'static str, detail: impl Into<String>) -> Error {
    Error::OutOfRange {
        what,
        detail: detail.into(),
    }
}

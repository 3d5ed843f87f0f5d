use thiserror::Error;

/// Errors produced by the gap-check toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("point outside chart domain: {0}")]
    OutsideDomain(String),

    #[error("metric is not invertible at the requested point")]
    SingularMetric,

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("quantity undefined: {0}")]
    Undefined(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

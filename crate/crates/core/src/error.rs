use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid signature (p={p}, q={q}): {reason}")]
    InvalidSignature { p: usize, q: usize, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("band capacity {capacity} exceeded: product needs degree {needed}")]
    CapacityExceeded { capacity: i32, needed: i32 },

    #[error("module has no real structure")]
    MissingRealStructure,

    #[error("module has no opposite Clifford action")]
    MissingOppositeAction,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid literal: {0}")]
    Literal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}

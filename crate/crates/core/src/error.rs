use thiserror::Error;

/// Errors surfaced by the library. Numerical routines never panic on bad
/// user input; they return `InvalidInput` instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vertex {0:?} lies outside the box")]
    OutsideBox(Vec<i64>),

    #[error(
        "state space has 2^{sites} configurations, above the cap of 2^{cap_log2}; \
         reduce the side length or dimension, or raise the cap"
    )]
    StateSpaceTooLarge { sites: usize, cap_log2: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

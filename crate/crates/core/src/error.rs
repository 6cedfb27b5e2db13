use thiserror::Error;

/// Errors raised by the family calculus and the search engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("weight construction failed: {0}")]
    Weight(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("instance exceeds the {what} cap ({size} > {cap})")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

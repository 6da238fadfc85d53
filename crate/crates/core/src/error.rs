use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates a standing assumption; the payload names the condition.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("numerical limit: {0}")]
    NumericalLimit(String),
    #[error("too few points for a fit: need {needed}, have {have}")]
    TooFewPoints { needed: usize, have: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn is_invalid_params(&self) -> bool {
        matches!(self, Error::InvalidParams(_) | Error::Parse(_))
    }
}

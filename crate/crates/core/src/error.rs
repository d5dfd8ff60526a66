use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the set or domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),
    /// A one-sided limit was requested where that side does not exist.
    #[error("boundary error: {0}")]
    Boundary(String),
    /// The representable function or measure class cannot hold the result.
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("distance undefined: {0}")]
    UndefinedDistance(String),
}

impl Error {
    /// True for errors caused by the input data rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numeric(_))
    }
}

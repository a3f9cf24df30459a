use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation was called outside its domain (bad generator, non-spherical
    /// subset, non-opposite pair, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Inconsistent internal structure (mismatched Coxeter systems, a family
    /// whose normal forms are not unique, ...).
    #[error("structural error: {0}")]
    Structural(String),
    /// The instance is valid but not supported by this implementation.
    #[error("unsupported instance: {0}")]
    Unsupported(String),
    /// Externally supplied data failed validation; the message carries a witness.
    #[error("validation failed: {0}")]
    Validation(String),
    /// A constructed object failed its own axiom check.
    #[error("construction check failed: {0}")]
    Construction(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

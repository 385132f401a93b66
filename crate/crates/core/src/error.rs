use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Bad input: unknown mode, duplicate mode, malformed pairing, invalid parameter.
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested object would exceed a configured size limit.
    #[error("resource error: {0}")]
    Resource(String),

    /// A numerical procedure did not meet its tolerance.
    #[error("numeric error: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    /// Two objects that must live on the same Fock space do not.
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numeric { message: msg.into(), residual }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

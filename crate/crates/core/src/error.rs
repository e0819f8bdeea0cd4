use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("t = {t} lies outside the sampled range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("domain error at t = {t}: {reason}")]
    Domain { t: f64, reason: String },

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("sector n = {n}: {source}")]
    Sector { n: usize, source: Box<Error> },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn in_sector(self, n: usize) -> Self {
        Error::Sector {
            n,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

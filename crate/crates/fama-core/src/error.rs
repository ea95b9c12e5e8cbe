//! Error taxonomy shared by all engine modules.

use thiserror::Error;

/// Errors produced by the numerical engine.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or quadrature failed to reach its accuracy target.
    #[error("accuracy error: {what} (after {terms} terms/intervals)")]
    Accuracy { what: String, terms: usize },

    /// Linear-algebra failure (singular matrix, failed factorization).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed external input (impedance file, config values).
    #[error("format error: {0}")]
    Format(String),

    /// Degenerate input of probability zero (all-zero channel, zero-norm link).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn accuracy(what: impl Into<String>, terms: usize) -> Self {
        Error::Accuracy {
            what: what.into(),
            terms,
        }
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

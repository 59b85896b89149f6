use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sizing error: {0}")]
    Sizing(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point outside the unit cube: {0}")]
    OutOfDomain(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0} (supported: 1..=5)")]
    UnsupportedDimension(usize),

    #[error("invalid quadrature order {0} (must be >= 2)")]
    InvalidOrder(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel violation: {0}")]
    KernelViolation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// True for errors caused by invalid inputs, as opposed to failures
    /// that happen while computing or writing results.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::KernelViolation(_) | Error::Io { .. } | Error::Csv { .. }
        )
    }
}

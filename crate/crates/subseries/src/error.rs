//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a precondition (shape mismatch, even kernel, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input data violated an invariant (NaN, unparseable cell, zero variance, ...).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A configuration is self-consistent but unusable for the requested run.
    #[error("configuration error: {0}")]
    Config(String),

    /// Training produced a non-finite loss and was aborted.
    #[error("numerical failure at step {step}: {message}")]
    Numerical { step: u64, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag for the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InvalidData(_) => "invalid_data",
            Error::Config(_) => "configuration",
            Error::Numerical { .. } => "numerical",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Json(_) => "json",
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Each variant maps to a stable machine-readable code (see [`Error::code`])
/// that the command-line runner prints as a prefix.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("integrity violation in `{field}`: {message}")]
    Integrity { field: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("design matrix is rank deficient; collinear columns {columns:?}")]
    Collinear { columns: Vec<usize> },

    #[error("collinear nuisance features: {0}")]
    CollinearBlock(String),

    #[error("labels contain a single class")]
    SingleClass,

    #[error("zero pooled standard deviation")]
    ZeroVariance,

    #[error("missing data: {0}")]
    Missing(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "E_PARSE",
            Error::Integrity { .. } => "E_INTEGRITY",
            Error::Io { .. } => "E_IO",
            Error::InvalidInput(_) | Error::DimensionMismatch { .. } => "E_INPUT",
            Error::Collinear { .. } | Error::CollinearBlock(_) => "E_COLLINEAR",
            Error::SingleClass => "E_SINGLE_CLASS",
            Error::ZeroVariance => "E_ZERO_VARIANCE",
            Error::Missing(_) => "E_MISSING",
            Error::Config(_) => "E_CONFIG",
        }
    }

    pub(crate) fn integrity(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Integrity {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

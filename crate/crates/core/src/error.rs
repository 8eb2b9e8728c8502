//! Crate-wide error type.
//!
//! A single enum keeps the CLI's exit-code mapping trivial: configuration
//! problems, data problems and training-consistency problems are distinct
//! variants rather than distinct types.

use thiserror::Error;

/// All fallible operations in this crate return this error.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid option, parameter combination or value range.
    #[error("config error: {0}")]
    Config(String),

    /// I/O failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed file content, annotated with path and 1-based line.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// Structurally valid but semantically unusable data
    /// (wrong lengths, non-finite samples, degenerate geometry, ...).
    #[error("data error: {0}")]
    Data(String),

    /// Training data that contradicts itself (same pattern in both
    /// classes, or a learned formula that misclassifies its own
    /// training set).
    #[error("consistency error: {0}")]
    Inconsistent(String),
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn parse(
        path: impl AsRef<std::path::Path>,
        line: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

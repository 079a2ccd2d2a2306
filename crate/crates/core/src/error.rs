//! Toolkit-wide error type with CLI exit-code mapping.

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by corpus I/O, model training/loading and scoring.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad invocation: invalid flag values, inconsistent options.
    #[error("usage error: {0}")]
    Usage(String),

    /// Malformed or inconsistent input data. Carries a location when one exists.
    #[error("data error: {0}")]
    Data(String),

    /// Malformed, missing or version-incompatible model artifact.
    #[error("model error: {0}")]
    Model(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// Data error pinned to a 1-based line of a named file.
    pub fn data_at(path: &std::path::Path, line: usize, msg: impl std::fmt::Display) -> Self {
        Error::Data(format!("{}:{}: {}", path.display(), line, msg))
    }

    pub fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// I/O failure while touching a model artifact; maps to exit code 3.
    pub fn io_model(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Model(format!("{}: {}", path.display(), source))
    }

    /// Process exit code contract: 1 usage, 2 data, 3 model/artifact.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Data(_) | Error::Io { .. } => 2,
            Error::Model(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

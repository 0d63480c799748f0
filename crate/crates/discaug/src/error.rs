//! Error type shared across the crate.

use std::io;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by callers that map errors to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Invalid configuration (flags, hyperparameters, empty grids).
    Config,
    /// Unusable input data (missing files, malformed lines, empty classes).
    Data,
    /// Training failure (divergence, non-finite gradients).
    Train,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    EmptyInput(String),

    #[error("class {0:?} has no samples")]
    EmptyClass(crate::corpus::Label),

    #[error("{0}")]
    Train(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidConfig(_) => ErrorKind::Config,
            Error::Train(_) => ErrorKind::Train,
            _ => ErrorKind::Data,
        }
    }
}

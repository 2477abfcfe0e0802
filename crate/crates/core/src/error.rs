//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SavqeError {
    #[error("format error: {0}")]
    Format(String),

    #[error("index error at line {line}: {msg}")]
    Index { line: usize, msg: String },

    #[error("inconsistent data at line {line}: {msg}")]
    Inconsistent { line: usize, msg: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("basis error: {0}")]
    Basis(String),

    #[error("spin coupling error: {0}")]
    Coupling(String),

    #[error("orbital partition error: {0}")]
    Partition(String),

    #[error("unknown generator id {0}")]
    Reference(usize),

    #[error("eigensolver did not converge: {msg}")]
    Convergence { msg: String },

    #[error("label alignment error: {0}")]
    Alignment(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown method spec '{0}'")]
    UnknownMethod(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SavqeError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SavqeError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, SavqeError>;

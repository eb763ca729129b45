use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ingestion error at {path}: {reason}")]
    Ingest { path: PathBuf, reason: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("degenerate normalization range: min == max ({0})")]
    DegenerateRange(f64),

    #[error("simulation error: {0}")]
    Sim(String),

    #[error(transparent)]
    Compute(#[from] ndcompute::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("manifest: {0}")]
    Manifest(String),
}

impl Error {
    pub fn ingest(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Ingest {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

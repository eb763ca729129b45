use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("hypersphere collapse: distance variance {0} below 1e-12")]
    Collapse(f64),

    #[error("generator mode collapse: pixel variance below threshold for {0} consecutive checks")]
    ModeCollapse(usize),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("model bundle at {path}: {reason}")]
    Bundle { path: String, reason: String },

    #[error(transparent)]
    Compute(#[from] ndcompute::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn bundle(path: impl std::fmt::Display, reason: impl Into<String>) -> Self {
        Error::Bundle {
            path: path.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error(transparent)]
    Compute(#[from] ndcompute::Error),

    #[error(transparent)]
    Models(#[from] occmodels::Error),

    #[error(transparent)]
    Baselines(#[from] baselines::Error),

    #[error(transparent)]
    Data(#[from] flowdata::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

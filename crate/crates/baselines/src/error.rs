use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("degenerate kernel matrix: {0}")]
    DegenerateKernel(String),

    #[error("solver did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error(transparent)]
    Compute(#[from] ndcompute::Error),

    #[error(transparent)]
    Models(#[from] occmodels::Error),

    #[error(transparent)]
    Data(#[from] flowdata::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

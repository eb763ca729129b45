use thiserror::Error;

/// Exit codes: 0 success, 2 config error, 3 dependency error, 4 numeric
/// failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("dependency error: {0}")]
    Dependency(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Dependency(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<flowdata::Error> for CliError {
    fn from(e: flowdata::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<occmodels::Error> for CliError {
    fn from(e: occmodels::Error) -> Self {
        match &e {
            occmodels::Error::Collapse(_)
            | occmodels::Error::ModeCollapse(_)
            | occmodels::Error::Diverged(_) => CliError::Numeric(e.to_string()),
            occmodels::Error::Compute(inner) => from_compute(inner, e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ndcompute::Error> for CliError {
    fn from(e: ndcompute::Error) -> Self {
        from_compute(&e, e.to_string())
    }
}

fn from_compute(e: &ndcompute::Error, msg: String) -> CliError {
    match e {
        ndcompute::Error::NonFinite(_) => CliError::Numeric(msg),
        _ => CliError::Config(msg),
    }
}

impl From<baselines::Error> for CliError {
    fn from(e: baselines::Error) -> Self {
        match e {
            baselines::Error::Models(inner) => inner.into(),
            baselines::Error::Compute(inner) => inner.into(),
            baselines::Error::NoConvergence(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<evalkit::Error> for CliError {
    fn from(e: evalkit::Error) -> Self {
        match e {
            evalkit::Error::Models(inner) => inner.into(),
            evalkit::Error::Baselines(inner) => inner.into(),
            evalkit::Error::Compute(inner) => inner.into(),
            evalkit::Error::Data(inner) => inner.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

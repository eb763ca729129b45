//! Pipeline orchestration for the one-class flow toolkit: simulate,
//! staged training, evaluation, ablation and gallery commands over a
//! single JSON config with OCCFLOW_* environment overrides.

pub mod commands;
pub mod config;
mod error;
pub mod stages;

pub use config::{EvalConfig, RunConfig, Seeds, ENV_PREFIX};
pub use error::{CliError, Result};

//! Experiment harness behind the `alcove` binary: configuration, the
//! thresholded acceptance criteria, experiment drivers and report output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod criteria;
pub mod experiments;
pub mod report;
pub mod svg;

pub use config::ExperimentConfig;
pub use criteria::CriterionResult;
pub use report::{Check, RunReport, Status};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] alcove_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

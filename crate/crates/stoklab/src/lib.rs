//! Experiment runner for `stoklab-core`: every verification is a named
//! experiment producing a report of checks against oracles.

pub mod executor;
pub mod experiments;
pub mod params;
pub mod report;
pub mod runner;

pub use executor::Pool;
pub use report::{Format, Relation, Report, Row};
pub use runner::{run_experiment, Ctx, ExperimentConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Bad command line or configuration; maps to exit status 2.
    #[error("usage: {0}")]
    Usage(String),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_status(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Io(_) => 1,
        }
    }
}

//! Configuration-driven experiments: simulation loop, CSV and SVG output, CLI.

pub mod cli;
pub mod config;
pub mod output;
pub mod plot;
pub mod sim;

use thiserror::Error;

use crate::environment::EnvError;
use crate::estimation::EstimationError;
use crate::gaps::GapError;
use crate::instance::InstanceError;
use crate::metrics::MetricsError;
use crate::policy::PolicyError;

pub use config::{ExperimentConfig, GeometrySetting};
pub use sim::{run_all, simulate, Run, RunSetup};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Gap(#[from] GapError),
}

impl HarnessError {
    /// 1 for usage and input problems, 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) | HarnessError::Csv(_) => 1,
            HarnessError::Instance(InstanceError::Parse(_) | InstanceError::Io(_) | InstanceError::Serialize(_)) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

//! Experiment orchestration: seeds, intervals, scheduling, configs and
//! CSV/JSON output.

mod config;
mod exec;
mod experiment;
mod output;
mod seeds;
mod stats;

pub use config::{BoundsConfig, CuttingTable, ExperimentConfig, ModelKind, ModelParams, Sweep};
pub use exec::{map_runs, Parallelism};
pub use experiment::{bound_reports, run_experiment, ExperimentResult};
pub use output::{
    format_bounds_table, read_runs_csv, write_bounds_json, write_outputs, write_runs_csv, RunRecord,
    SummaryRow,
};
pub use seeds::derive_run_seed;
pub use stats::{overlaps, wilson_interval, DEFAULT_Z};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Process exit code for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::InvalidConfig(_) => 2,
            HarnessError::Io(_) | HarnessError::Csv(_) => 3,
        }
    }
}

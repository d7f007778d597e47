//! Benchmark harness: runs planner experiments over seeded scenarios and
//! writes per-run and per-cell CSV.

pub mod experiment;
pub mod report;

pub use experiment::{run_experiment, run_one, run_seed, Experiment, ExperimentSpec, RunRecord, RunRow, RUN_HEADER};
pub use report::{aggregate, compare, AggregateRow, ComparisonRow, Metadata, Winner};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error("output directory {0} already exists (pass --force to overwrite)")]
    OutputExists(PathBuf),
    #[error(transparent)]
    Planner(#[from] rtfmt::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

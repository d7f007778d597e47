//! Per-cell aggregates, planner comparison and the output directory layout.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::experiment::{ExperimentSpec, RunRow};
use crate::BenchError;

pub const RUNS_FILE: &str = "runs.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const METADATA_FILE: &str = "metadata.json";

/// Mean and sample standard deviation; `None` for an empty input, and a
/// deviation of 0 for a single value.
pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (Some(mean), Some(0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub experiment: u8,
    pub env: String,
    pub planner: String,
    pub samples: usize,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub planning_time_mean_s: Option<f64>,
    pub planning_time_std_s: Option<f64>,
    pub executed_cost_mean_m: Option<f64>,
    pub executed_cost_std_m: Option<f64>,
    pub arrival_time_mean_s: Option<f64>,
    pub arrival_time_std_s: Option<f64>,
}

type CellKey = (u8, String, String, usize);

fn key(r: &RunRow) -> CellKey {
    (r.experiment, r.env.clone(), r.planner.clone(), r.samples)
}

/// One row per cell, in cell order. Time and cost statistics use the
/// successful runs only; failures count toward the success rate.
pub fn aggregate(rows: &[RunRow]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<CellKey, Vec<&RunRow>> = BTreeMap::new();
    for r in rows {
        cells.entry(key(r)).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((experiment, env, planner, samples), runs)| {
            let ok: Vec<&RunRow> = runs.iter().copied().filter(|r| r.success).collect();
            let collect = |f: fn(&RunRow) -> Option<f64>| ok.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
            let (pt, pt_sd) = mean_std(&collect(|r| r.planning_time_s));
            let (ec, ec_sd) = mean_std(&collect(|r| Some(r.executed_cost_m)));
            let (at, at_sd) = mean_std(&collect(|r| r.arrival_time_s));
            AggregateRow {
                experiment,
                env,
                planner,
                samples,
                runs: runs.len(),
                successes: ok.len(),
                success_rate: ok.len() as f64 / runs.len() as f64,
                planning_time_mean_s: pt,
                planning_time_std_s: pt_sd,
                executed_cost_mean_m: ec,
                executed_cost_std_m: ec_sd,
                arrival_time_mean_s: at,
                arrival_time_std_s: at_sd,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    A,
    B,
    Tie,
    /// One side has no successful run to compare.
    Undecided,
}

fn lower_wins(a: Option<f64>, b: Option<f64>) -> (Option<f64>, Winner) {
    match (a, b) {
        (Some(a), Some(b)) => {
            let w = if a < b {
                Winner::A
            } else if b < a {
                Winner::B
            } else {
                Winner::Tie
            };
            (Some(a - b), w)
        }
        _ => (None, Winner::Undecided),
    }
}

/// Differences are `A - B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub experiment: u8,
    pub env: String,
    pub samples: usize,
    pub planner_a: String,
    pub planner_b: String,
    pub success_rate_diff: f64,
    pub planning_time_diff_s: Option<f64>,
    pub executed_cost_diff_m: Option<f64>,
    pub arrival_time_diff_s: Option<f64>,
    pub success_winner: Winner,
    pub planning_time_winner: Winner,
    pub executed_cost_winner: Winner,
    pub arrival_time_winner: Winner,
}

/// Pairs cells of `a` and `b` that share experiment, environment and sample
/// count. Cells present on one side only are skipped.
pub fn compare(a: &[AggregateRow], b: &[AggregateRow]) -> Vec<ComparisonRow> {
    let mut out = Vec::new();
    for x in a {
        let Some(y) = b
            .iter()
            .find(|y| y.experiment == x.experiment && y.env == x.env && y.samples == x.samples)
        else {
            continue;
        };
        let success_winner = if x.success_rate > y.success_rate {
            Winner::A
        } else if y.success_rate > x.success_rate {
            Winner::B
        } else {
            Winner::Tie
        };
        let (pt, pt_w) = lower_wins(x.planning_time_mean_s, y.planning_time_mean_s);
        let (ec, ec_w) = lower_wins(x.executed_cost_mean_m, y.executed_cost_mean_m);
        let (at, at_w) = lower_wins(x.arrival_time_mean_s, y.arrival_time_mean_s);
        out.push(ComparisonRow {
            experiment: x.experiment,
            env: x.env.clone(),
            samples: x.samples,
            planner_a: x.planner.clone(),
            planner_b: y.planner.clone(),
            success_rate_diff: x.success_rate - y.success_rate,
            planning_time_diff_s: pt,
            executed_cost_diff_m: ec,
            arrival_time_diff_s: at,
            success_winner,
            planning_time_winner: pt_w,
            executed_cost_winner: ec_w,
            arrival_time_winner: at_w,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub spec: ExperimentSpec,
    pub workers: usize,
    pub tool_version: String,
    pub samples_meaning: String,
    pub failed_runs: String,
    pub std_definition: String,
}

impl Metadata {
    pub fn new(spec: &ExperimentSpec, workers: usize) -> Self {
        Metadata {
            spec: spec.clone(),
            workers,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            samples_meaning: "rtfmt: free-space samples drawn up front; rtrrt: sample-and-extend attempts".into(),
            failed_runs: "excluded from time and cost statistics, counted in success_rate".into(),
            std_definition: "sample standard deviation (n - 1); 0 for a single run".into(),
        }
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, BenchError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(BenchError::from)).collect()
}

/// Writes runs, aggregates and metadata into `dir`, which must not exist
/// unless `force` is set.
pub fn write_output(
    dir: &Path,
    rows: &[RunRow],
    aggregates: &[AggregateRow],
    metadata: &Metadata,
    force: bool,
) -> Result<(), BenchError> {
    if dir.exists() {
        if !force {
            return Err(BenchError::OutputExists(dir.to_path_buf()));
        }
    } else {
        fs::create_dir_all(dir)?;
    }
    write_csv(&dir.join(RUNS_FILE), rows)?;
    write_csv(&dir.join(AGGREGATE_FILE), aggregates)?;
    fs::write(dir.join(METADATA_FILE), serde_json::to_string_pretty(metadata)? + "\n")?;
    Ok(())
}

pub fn read_runs(dir: &Path) -> Result<Vec<RunRow>, BenchError> {
    read_csv(&dir.join(RUNS_FILE))
}

pub fn read_aggregates(dir: &Path) -> Result<Vec<AggregateRow>, BenchError> {
    read_csv(&dir.join(AGGREGATE_FILE))
}

pub fn write_comparison<W: std::io::Write>(out: W, rows: &[ComparisonRow]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

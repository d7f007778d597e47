//! Experiment grid: which scenario, mode and planner each run uses, and the
//! per-run result rows.

use rayon::prelude::*;
use rtfmt::sim::{derive_seed, simulate, Clock, EnvKind, Mode, PlannerKind, RunMetrics, SimOptions};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Experiment {
    /// Plan fully, then move. No dynamic obstacles.
    NonRealTime,
    /// Move from the first tick. No dynamic obstacles.
    RealTime,
    /// Move from the first tick among moving obstacles.
    Dynamic,
}

impl Experiment {
    pub fn id(self) -> u8 {
        match self {
            Experiment::NonRealTime => 1,
            Experiment::RealTime => 2,
            Experiment::Dynamic => 3,
        }
    }

    pub fn from_id(id: u8) -> Result<Self, BenchError> {
        match id {
            1 => Ok(Experiment::NonRealTime),
            2 => Ok(Experiment::RealTime),
            3 => Ok(Experiment::Dynamic),
            _ => Err(BenchError::Spec(format!("experiment must be 1, 2 or 3, got {id}"))),
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Experiment::NonRealTime => Mode::NonRealTime,
            _ => Mode::RealTime,
        }
    }

    pub fn dynamic_obstacles(self) -> bool {
        self == Experiment::Dynamic
    }
}

impl From<Experiment> for u8 {
    fn from(e: Experiment) -> u8 {
        e.id()
    }
}

impl TryFrom<u8> for Experiment {
    type Error = BenchError;

    fn try_from(id: u8) -> Result<Self, BenchError> {
        Experiment::from_id(id)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

impl FromStr for Experiment {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        let id: u8 = s.trim().parse().map_err(|_| BenchError::Spec(format!("bad experiment id `{s}`")))?;
        Experiment::from_id(id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub env: EnvKind,
    pub planner: PlannerKind,
    /// Free-space samples (RT-FMT) or sample-and-extend attempts (RT-RRT*).
    pub samples: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub clock: Clock,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.samples.is_empty() {
            return Err(BenchError::Spec("at least one sample count is required".into()));
        }
        if self.samples.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BenchError::Spec(format!("sample counts must be strictly ascending: {:?}", self.samples)));
        }
        if self.samples[0] < 2 {
            return Err(BenchError::Spec("sample counts must be at least 2".into()));
        }
        if self.repeats == 0 {
            return Err(BenchError::Spec("repeats must be at least 1".into()));
        }
        Ok(())
    }

    /// Every (samples, repeat) pair, in output order.
    pub fn runs(&self) -> Vec<(usize, usize)> {
        self.samples
            .iter()
            .flat_map(|&n| (0..self.repeats).map(move |r| (n, r)))
            .collect()
    }
}

fn env_tag(env: EnvKind) -> u64 {
    match env {
        EnvKind::Maze => 0x6d617a65,
        EnvKind::Mine => 0x6d696e65,
    }
}

/// Scenario seed of one run. Experiment and planner are deliberately left
/// out so that every experiment and both planners face the same worlds.
pub fn run_seed(base: u64, env: EnvKind, samples: usize, repeat: usize) -> u64 {
    let s = derive_seed(base, env_tag(env));
    let s = derive_seed(s, samples as u64);
    derive_seed(s, repeat as u64)
}

/// One line of the per-run CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub experiment: u8,
    pub env: String,
    pub planner: String,
    pub samples: usize,
    pub repeat: usize,
    pub seed: u64,
    pub success: bool,
    pub failure_reason: String,
    pub planning_time_s: Option<f64>,
    pub executed_cost_m: f64,
    pub arrival_time_s: Option<f64>,
}

pub const RUN_HEADER: &str = "experiment,env,planner,samples,repeat,seed,success,failure_reason,planning_time_s,executed_cost_m,arrival_time_s";

/// A run row plus the safety figures that are not written to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub row: RunRow,
    pub metrics: RunMetrics,
}

pub fn run_one(spec: &ExperimentSpec, samples: usize, repeat: usize) -> Result<RunRecord, BenchError> {
    let seed = run_seed(spec.seed, spec.env, samples, repeat);
    let scenario = spec.env.scenario(seed);
    let mut opts = SimOptions::new(spec.experiment.mode(), spec.experiment.dynamic_obstacles());
    opts.clock = spec.clock;
    let m = simulate(&scenario, spec.planner, samples, opts)?.metrics;
    let row = RunRow {
        experiment: spec.experiment.id(),
        env: spec.env.as_str().to_string(),
        planner: spec.planner.as_str().to_string(),
        samples,
        repeat,
        seed,
        success: m.success,
        failure_reason: m.failure_reason.map_or("none", |f| f.as_str()).to_string(),
        planning_time_s: m.planning_time,
        executed_cost_m: m.executed_cost,
        arrival_time_s: m.arrival_time,
    };
    Ok(RunRecord { row, metrics: m })
}

/// Runs the whole grid on `workers` threads. Records come back in grid order
/// regardless of scheduling.
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<Vec<RunRecord>, BenchError> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| BenchError::Spec(e.to_string()))?;
    let runs = spec.runs();
    pool.install(|| runs.par_iter().map(|&(n, r)| run_one(spec, n, r)).collect())
}

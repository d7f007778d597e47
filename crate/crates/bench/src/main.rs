use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use plan_bench::report::{self, Metadata};
use plan_bench::{aggregate, compare, run_experiment, Experiment, ExperimentSpec};
use rtfmt::sim::{simulate, Clock, EnvKind, Mode, PlannerKind, Scenario, SimOptions};
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "plan-bench", version, about = "Benchmark real-time planners on seeded maze and mine scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write runs.csv, aggregate.csv and metadata.json.
    Run(RunArgs),
    /// Compare the aggregates of two output directories (differences are A - B).
    Compare { dir_a: PathBuf, dir_b: PathBuf },
    /// Print the scenario JSON for an environment and seed.
    Scenario {
        #[arg(long)]
        env: EnvKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run one simulation from a scenario file.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// 1: plan then move, 2: real time, 3: real time with moving obstacles.
    #[arg(long)]
    experiment: Experiment,
    #[arg(long)]
    env: EnvKind,
    #[arg(long)]
    planner: PlannerKind,
    /// Free-space samples for rtfmt, sample-and-extend attempts for rtrrt.
    #[arg(long, value_delimiter = ',', default_value = "500,1500,2500,3500,4500")]
    samples: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "virtual")]
    clock: Clock,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
    /// Overwrite an existing output directory.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    planner: PlannerKind,
    #[arg(long)]
    samples: usize,
    /// Wait for the full plan before moving.
    #[arg(long)]
    non_real_time: bool,
    /// Remove the scenario's moving obstacles.
    #[arg(long)]
    no_dynamic: bool,
    /// Write the trajectory CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the per-tick planner log here.
    #[arg(long)]
    events: Option<PathBuf>,
}

fn run(args: RunArgs) -> Result<()> {
    let spec = ExperimentSpec {
        experiment: args.experiment,
        env: args.env,
        planner: args.planner,
        samples: args.samples,
        repeats: args.repeats,
        seed: args.seed,
        clock: args.clock,
    };
    spec.validate()?;
    if args.out.exists() && !args.force {
        bail!("output directory {} already exists (pass --force to overwrite)", args.out.display());
    }
    let records = run_experiment(&spec, args.workers)?;
    let rows: Vec<_> = records.into_iter().map(|r| r.row).collect();
    let aggregates = aggregate(&rows);
    report::write_output(&args.out, &rows, &aggregates, &Metadata::new(&spec, args.workers), args.force)?;
    let mut out = io::stdout().lock();
    for a in &aggregates {
        writeln!(
            out,
            "exp {} {} {} N={}: success {}/{}, planning {}, cost {}, arrival {}",
            a.experiment,
            a.env,
            a.planner,
            a.samples,
            a.successes,
            a.runs,
            fmt_opt(a.planning_time_mean_s),
            fmt_opt(a.executed_cost_mean_m),
            fmt_opt(a.arrival_time_mean_s),
        )?;
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

fn simulate_cmd(args: SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.scenario).with_context(|| format!("reading {}", args.scenario.display()))?;
    let scenario = Scenario::from_json(&text)?;
    let mode = if args.non_real_time { Mode::NonRealTime } else { Mode::RealTime };
    let mut opts = SimOptions::new(mode, !args.no_dynamic);
    opts.record = args.trace.is_some() || args.events.is_some();
    let outcome = simulate(&scenario, args.planner, args.samples, opts)?;
    if let Some(trace) = &outcome.trace {
        if let Some(p) = &args.trace {
            trace.write_trajectory(io::BufWriter::new(fs::File::create(p)?))?;
        }
        if let Some(p) = &args.events {
            trace.write_events(io::BufWriter::new(fs::File::create(p)?))?;
        }
    }
    let m = outcome.metrics;
    println!(
        "success={} failure_reason={} planning_time_s={} executed_cost_m={:.3} arrival_time_s={} ticks={}",
        m.success,
        m.failure_reason.map_or("none", |f| f.as_str()),
        fmt_opt(m.planning_time),
        m.executed_cost,
        fmt_opt(m.arrival_time),
        m.ticks
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Compare { dir_a, dir_b } => {
            let a = report::read_aggregates(&dir_a)?;
            let b = report::read_aggregates(&dir_b)?;
            let rows = compare(&a, &b);
            if rows.is_empty() {
                bail!("no matching cells between {} and {}", dir_a.display(), dir_b.display());
            }
            report::write_comparison(io::stdout().lock(), &rows)?;
            Ok(())
        }
        Command::Scenario { env, seed } => {
            println!("{}", env.scenario(seed).to_json());
            Ok(())
        }
        Command::Simulate(args) => simulate_cmd(args),
    }
}

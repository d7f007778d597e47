//! Discrete-time simulator: one robot, static walls and moving obstacles,
//! driven by any [`Planner`].

pub mod env;

use crate::error::{Error, Result};
use crate::geometry::{dist, point_free, Config, World};
use crate::planner::{write_event_row, Planner, PlannerParams, TickRecord, EVENT_LOG_HEADER};
use crate::rtfmt::RtFmt;
use crate::rtrrt::{RtRrt, RtRrtParams};
use crate::sampling::SamplerParams;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use std::time::Instant;

pub use env::{make_maze, make_mine, maze_scenario, mine_scenario, EnvKind, ObstacleMotion};

pub const DEFAULT_DT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    /// Meters per second.
    pub speed: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub position: Config,
    pub speed: f64,
    pub radius: f64,
}

impl RobotState {
    pub fn new(position: Config, spec: RobotSpec) -> Self {
        RobotState { position, speed: spec.speed, radius: spec.radius }
    }
}

/// Moves the robot up to `speed * dt` straight toward `target` and returns
/// the distance covered.
pub fn step_robot(robot: &mut RobotState, target: Config, dt: f64) -> f64 {
    let d = dist(robot.position, target);
    let step = (robot.speed * dt).max(0.0);
    if d <= step {
        robot.position = target;
        d
    } else {
        robot.position = robot.position.lerp(&target, step / d);
        step
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Tick length, seconds.
    pub dt: f64,
    /// Simulated seconds before a run times out.
    pub max_time: f64,
    /// Success once the robot center is this close to the goal.
    pub goal_tolerance: f64,
}

impl SimParams {
    pub fn new(goal_tolerance: f64, max_time: f64) -> Self {
        SimParams { dt: DEFAULT_DT, max_time, goal_tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub env: Option<EnvKind>,
    pub world: World,
    pub start: Config,
    pub goal: Config,
    pub robot: RobotSpec,
    pub planner: PlannerParams,
    pub sim: SimParams,
    pub seed: u64,
    /// RT-RRT* spacing below which samples in dense regions are dropped.
    pub min_spacing: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Scenario(m.to_string()));
        if !(self.sim.dt > 0.0) || !(self.sim.max_time > 0.0) || !(self.sim.goal_tolerance >= 0.0) {
            return bad("need dt > 0, max_time > 0 and goal_tolerance >= 0");
        }
        if !(self.robot.speed > 0.0) || !(self.robot.radius > 0.0) {
            return bad("robot speed and radius must be positive");
        }
        if !(self.min_spacing > 0.0) {
            return bad("min_spacing must be positive");
        }
        if self.world.obstacles.iter().any(|o| !o.is_valid()) {
            return bad("static obstacle with min > max");
        }
        if self.world.dynamic.iter().any(|o| !o.is_valid()) {
            return bad("dynamic obstacle needs positive radius and a unit heading");
        }
        for p in [self.start, self.goal] {
            if !point_free(p, &self.world, self.robot.radius) {
                return Err(Error::NotFree { x: p.x, y: p.y });
            }
        }
        self.planner.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Rtfmt,
    Rtrrt,
}

impl PlannerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlannerKind::Rtfmt => "rtfmt",
            PlannerKind::Rtrrt => "rtrrt",
        }
    }
}

impl std::str::FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rtfmt" => Ok(PlannerKind::Rtfmt),
            "rtrrt" => Ok(PlannerKind::Rtrrt),
            _ => Err(format!("unknown planner `{s}` (expected rtfmt or rtrrt)")),
        }
    }
}

/// splitmix64 finalizer applied to `seed ^ tag`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = (seed ^ tag).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const PLANNER_STREAM: u64 = 0x706c_616e;

/// Builds a planner for `scenario`. `samples` is the free-space sample count
/// for RT-FMT and the sample-and-extend attempt budget for RT-RRT*.
pub fn build_planner(scenario: &Scenario, kind: PlannerKind, samples: usize) -> Result<Box<dyn Planner + Send>> {
    let seed = derive_seed(scenario.seed, PLANNER_STREAM);
    Ok(match kind {
        PlannerKind::Rtfmt => {
            let sampler = SamplerParams::new(samples, seed);
            Box::new(RtFmt::new(&scenario.world, scenario.start, scenario.goal, &sampler, scenario.planner)?)
        }
        PlannerKind::Rtrrt => {
            let rrt = RtRrtParams::new(samples, scenario.min_spacing, seed);
            Box::new(RtRrt::new(&scenario.world, scenario.start, scenario.goal, rrt, scenario.planner)?)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// The robot waits until the samples are tried and a global path exists.
    NonRealTime,
    /// The robot follows local paths from the first tick.
    RealTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clock {
    /// Every tick lasts exactly `dt`.
    Virtual,
    /// Ticks last `max(dt, compute time)`; ticks spent waiting in
    /// non-real-time mode last their compute time.
    Wall,
}

impl std::str::FromStr for Clock {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "virtual" => Ok(Clock::Virtual),
            "wall" => Ok(Clock::Wall),
            _ => Err(format!("unknown clock `{s}` (expected virtual or wall)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureReason {
    Collision,
    Timeout,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::Collision => "collision",
            FailureReason::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub mode: Mode,
    pub clock: Clock,
    /// Keep the scenario's dynamic obstacles; when false they are removed.
    pub dynamic: bool,
    pub record: bool,
    /// Seconds already spent before the first tick (planner construction),
    /// counted toward every reported time.
    pub setup_time: f64,
}

impl SimOptions {
    pub fn new(mode: Mode, dynamic: bool) -> Self {
        SimOptions { mode, clock: Clock::Virtual, dynamic, record: false, setup_time: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    /// Time until the robot was released (non-real-time) or the first
    /// global path (real-time).
    pub planning_time: Option<f64>,
    pub executed_cost: f64,
    pub arrival_time: Option<f64>,
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
    pub ticks: u64,
    /// Smallest distance between the swept robot path and a static obstacle.
    pub min_static_clearance: f64,
    /// Infinite-cost nodes seen in returned paths, summed over ticks.
    pub infinite_path_nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub robot: Config,
    pub obstacles: Vec<Config>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    pub events: Vec<TickRecord>,
}

impl RunTrace {
    pub fn write_trajectory<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.rows.first().map_or(0, |r| r.obstacles.len());
        write!(out, "t,robot_x,robot_y")?;
        for i in 0..n {
            write!(out, ",obs{i}_x,obs{i}_y")?;
        }
        writeln!(out)?;
        for r in &self.rows {
            write!(out, "{},{},{}", r.t, r.robot.x, r.robot.y)?;
            for o in &r.obstacles {
                write!(out, ",{},{}", o.x, o.y)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn write_events<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{EVENT_LOG_HEADER}")?;
        for e in &self.events {
            write_event_row(&mut out, e)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub trace: Option<RunTrace>,
}

fn segment_clearance(world: &World, a: Config, b: Config) -> f64 {
    world
        .obstacles
        .iter()
        .map(|o| o.distance_to_segment(a, b))
        .fold(f64::INFINITY, f64::min)
}

/// Runs `planner` on `scenario` until the robot reaches the goal, collides
/// with a dynamic obstacle or the time limit passes.
pub fn run_simulation(scenario: &Scenario, planner: &mut dyn Planner, opts: SimOptions) -> RunOutcome {
    let mut world = scenario.world.clone();
    if !opts.dynamic {
        world.dynamic.clear();
    }
    let sim = scenario.sim;
    let mut motion = ObstacleMotion::new(scenario.seed, world.dynamic.len());
    let mut robot = RobotState::new(scenario.start, scenario.robot);
    let goal = planner.goal();
    let mut released = opts.mode == Mode::RealTime;
    planner.set_root_updates(released);

    let max_ticks = (sim.max_time / sim.dt).ceil() as u64;
    let mut elapsed = opts.setup_time;
    let mut metrics = RunMetrics {
        planning_time: None,
        executed_cost: 0.0,
        arrival_time: None,
        success: false,
        failure_reason: None,
        ticks: 0,
        min_static_clearance: world.clearance(robot.position),
        infinite_path_nodes: 0,
    };
    let mut trace = opts.record.then(RunTrace::default);
    let snapshot = |t: f64, robot: Config, world: &World| TraceRow {
        t,
        robot,
        obstacles: world.dynamic.iter().map(|o| o.center).collect(),
    };
    if let Some(tr) = trace.as_mut() {
        tr.rows.push(snapshot(0.0, robot.position, &world));
    }

    loop {
        let t0 = Instant::now();
        let target = planner.plan_tick(&world, robot.position);
        let compute = t0.elapsed().as_secs_f64();
        metrics.ticks += 1;
        if let Some(path) = planner.last_path() {
            let tree = planner.tree();
            metrics.infinite_path_nodes += path.nodes.iter().filter(|&&i| !tree.cost(i).is_finite()).count();
        }
        if let Some(tr) = trace.as_mut() {
            tr.events.push(planner.last_tick().clone());
        }

        let waiting = !released;
        elapsed = match opts.clock {
            Clock::Virtual => opts.setup_time + metrics.ticks as f64 * sim.dt,
            Clock::Wall if waiting => elapsed + compute,
            Clock::Wall => elapsed + compute.max(sim.dt),
        };
        if waiting && planner.has_global_path() && planner.sampling_done() {
            released = true;
            planner.set_root_updates(true);
            metrics.planning_time = Some(elapsed);
        }
        if opts.mode == Mode::RealTime && metrics.planning_time.is_none() && planner.has_global_path() {
            metrics.planning_time = Some(elapsed);
        }

        if !waiting {
            let before = robot.position;
            metrics.executed_cost += step_robot(&mut robot, target, sim.dt);
            if robot.position != before {
                metrics.min_static_clearance =
                    metrics.min_static_clearance.min(segment_clearance(&world, before, robot.position));
            }
        }
        motion.step(&mut world, sim.dt);
        if let Some(tr) = trace.as_mut() {
            tr.rows.push(snapshot(elapsed, robot.position, &world));
        }

        if env::robot_collides(&world, robot.position, robot.radius) {
            metrics.failure_reason = Some(FailureReason::Collision);
            break;
        }
        if dist(robot.position, goal) <= sim.goal_tolerance {
            metrics.success = true;
            metrics.arrival_time = Some(elapsed);
            break;
        }
        if elapsed >= sim.max_time || metrics.ticks >= max_ticks {
            metrics.failure_reason = Some(FailureReason::Timeout);
            break;
        }
    }
    RunOutcome { metrics, trace }
}

/// Builds the planner and runs it. On the wall clock the construction time
/// (sampling, neighborhood setup) is charged to the run.
pub fn simulate(scenario: &Scenario, kind: PlannerKind, samples: usize, mut opts: SimOptions) -> Result<RunOutcome> {
    let t0 = Instant::now();
    let mut planner = build_planner(scenario, kind, samples)?;
    if opts.clock == Clock::Wall {
        opts.setup_time += t0.elapsed().as_secs_f64();
    }
    Ok(run_simulation(scenario, planner.as_mut(), opts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn robot(x: f64, y: f64) -> RobotState {
        RobotState::new(Config::new(x, y), RobotSpec { speed: 2.0, radius: 0.5 })
    }

    #[test]
    fn step_robot_examples() {
        let mut r = robot(1.0, 1.0);
        assert_eq!(step_robot(&mut r, Config::new(1.0, 1.0), 0.05), 0.0);
        assert_eq!(r.position, Config::new(1.0, 1.0));

        let mut r = robot(0.0, 0.0);
        let d = step_robot(&mut r, Config::new(10.0, 0.0), 0.05);
        assert!((d - 0.1).abs() < 1e-15);
        assert!((r.position.x - 0.1).abs() < 1e-15);

        let mut r = robot(0.0, 0.0);
        step_robot(&mut r, Config::new(0.0, 0.05), 0.05);
        assert_eq!(r.position, Config::new(0.0, 0.05));
    }

    #[test]
    fn derive_seed_is_pure_and_spreads() {
        assert_eq!(derive_seed(7, 1), derive_seed(7, 1));
        assert_ne!(derive_seed(7, 1), derive_seed(7, 2));
        assert_ne!(derive_seed(7, 1), derive_seed(8, 1));
    }

    #[test]
    fn scenario_json_round_trip() {
        let s = maze_scenario(3);
        let back = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn scenario_rejects_blocked_start() {
        let mut s = maze_scenario(0);
        s.start = Config::new(15.0, s.world.obstacles[0].min.y + 0.5);
        assert!(matches!(Scenario::from_json(&s.to_json()), Err(Error::NotFree { .. })));
    }
}

//! Interface shared by the real-time planners plus the pieces both use:
//! context updates from sensed obstacles, paths and per-tick records.

use crate::error::{Error, Result};
use crate::geometry::{dist, Config, World};
use crate::tree::PlanTree;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    /// Expansion/rewire iterations per tick.
    pub iterations_per_tick: usize,
    /// Nodes within this distance of a sensed obstacle are blocked.
    pub blocking_radius: f64,
    /// Obstacles farther than this from the robot are ignored.
    pub sensing_range: f64,
    /// Robot-to-root distance at which the next path node becomes the root.
    pub near_root_threshold: f64,
    /// Static obstacles are inflated by this much.
    pub robot_radius: f64,
    /// Optional wall-clock cap on a tick's iteration loop, seconds.
    #[serde(default)]
    pub tick_time_cap: Option<f64>,
}

impl PlannerParams {
    pub fn new(blocking_radius: f64, sensing_range: f64, robot_radius: f64) -> Self {
        PlannerParams {
            iterations_per_tick: 32,
            blocking_radius,
            sensing_range,
            near_root_threshold: robot_radius,
            robot_radius,
            tick_time_cap: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations_per_tick == 0 {
            return Err(Error::InvalidParam("iterations per tick must be at least 1".into()));
        }
        if !(self.blocking_radius > 0.0) || self.blocking_radius > self.sensing_range {
            return Err(Error::InvalidParam(format!(
                "need 0 < r_b <= r_o, got r_b = {}, r_o = {}",
                self.blocking_radius, self.sensing_range
            )));
        }
        if !(self.robot_radius >= 0.0) || !(self.near_root_threshold >= 0.0) {
            return Err(Error::InvalidParam("radii must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    Global,
    Local,
}

impl PathKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PathKind::Global => "global",
            PathKind::Local => "local",
        }
    }
}

/// Root-first sequence of tree nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub configs: Vec<Config>,
    pub kind: PathKind,
    /// Cost of the final node.
    pub cost: f64,
}

impl Path {
    pub fn from_nodes(tree: &PlanTree, nodes: Vec<usize>, kind: PathKind) -> Self {
        let configs = nodes.iter().map(|&i| tree.config(i)).collect();
        let cost = nodes.last().map(|&i| tree.cost(i)).unwrap_or(f64::INFINITY);
        Path { nodes, configs, kind, cost }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.configs.windows(2).map(|w| dist(w[0], w[1])).sum()
    }
}

/// Result of sensing the dynamic obstacles at the start of a tick.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContextUpdate {
    pub robot: Config,
    pub goal: Config,
    /// Nodes blocked this tick.
    pub blocked: Vec<usize>,
    /// Nodes unblocked this tick.
    pub unblocked: Vec<usize>,
}

/// Tracks which nodes are currently blocked so that a context update only
/// touches nodes near sensed obstacles and previously blocked nodes.
#[derive(Debug, Clone, Default)]
pub struct BlockTracker {
    blocked: Vec<usize>,
    mark: Vec<u32>,
    epoch: u32,
}

impl BlockTracker {
    pub fn blocked(&self) -> &[usize] {
        &self.blocked
    }

    /// Records a node blocked outside of [`BlockTracker::update`].
    pub fn note_blocked(&mut self, id: usize) {
        if !self.blocked.contains(&id) {
            self.blocked.push(id);
        }
    }

    /// Blocks every node within `r_b` of an obstacle that is within `r_o` of
    /// the robot and unblocks every other previously blocked node.
    pub fn update(
        &mut self,
        tree: &mut PlanTree,
        world: &World,
        robot: Config,
        goal: Config,
        params: &PlannerParams,
    ) -> ContextUpdate {
        self.epoch = self.epoch.wrapping_add(1);
        if self.mark.len() < tree.len() {
            self.mark.resize(tree.len(), 0);
        }
        let mut current = Vec::new();
        for obstacle in &world.dynamic {
            if dist(robot, obstacle.center) > params.sensing_range {
                continue;
            }
            for id in tree.within(obstacle.center, params.blocking_radius, |_| true) {
                if id != tree.root() && self.mark[id] != self.epoch {
                    self.mark[id] = self.epoch;
                    current.push(id);
                }
            }
        }
        current.sort_unstable();

        let mut update = ContextUpdate { robot, goal, ..Default::default() };
        for &id in &current {
            if tree.set_blocked(id).unwrap_or(false) {
                update.blocked.push(id);
            }
        }
        for &id in &self.blocked {
            if self.mark[id] != self.epoch && tree.set_unblocked(id).unwrap_or(false) {
                update.unblocked.push(id);
            }
        }
        self.blocked = current;
        update
    }
}

/// Per-tick bookkeeping, also the row type of the planner event log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TickRecord {
    pub tick: u64,
    pub tree_size: usize,
    pub root: usize,
    pub path_kind: Option<PathKind>,
    pub path_cost: f64,
    pub path_len: usize,
    pub additions: usize,
    pub expansion_steps: usize,
    pub obstacle_rewire_steps: usize,
    pub root_rewire_steps: usize,
    pub blocked: usize,
    pub unblocked: usize,
    pub promoted: bool,
}

pub const EVENT_LOG_HEADER: &str = "tick,tree_size,root_id,path_kind,path_cost";

pub fn write_event_row<W: Write>(mut out: W, rec: &TickRecord) -> io::Result<()> {
    writeln!(
        out,
        "{},{},{},{},{}",
        rec.tick,
        rec.tree_size,
        rec.root,
        rec.path_kind.map(PathKind::as_str).unwrap_or(""),
        rec.path_cost
    )
}

/// A planner that can be driven one control tick at a time.
pub trait Planner {
    fn name(&self) -> &'static str;

    /// Runs one control tick and returns the configuration to steer toward.
    fn plan_tick(&mut self, world: &World, robot: Config) -> Config;

    /// Switches to a new goal, reusing the current tree.
    fn retarget(&mut self, world: &World, goal: Config) -> Result<()>;

    /// Whether the goal is connected with finite cost.
    fn has_global_path(&self) -> bool;

    /// Whether the sample budget has been fully tried: the first expansion
    /// pass finished (RT-FMT) or every attempt was spent (RT-RRT*).
    fn sampling_done(&self) -> bool;

    /// Enables or disables root promotion (the robot holds still while disabled).
    fn set_root_updates(&mut self, enabled: bool);

    fn tree(&self) -> &PlanTree;

    fn last_tick(&self) -> &TickRecord;

    fn last_path(&self) -> Option<&Path>;

    fn goal(&self) -> Config;
}

/// Promotion test shared by both planners: the robot is close to the root
/// and can drive straight to the next path node.
pub(crate) fn should_promote(
    tree: &PlanTree,
    path: &Path,
    world: &World,
    robot: Config,
    params: &PlannerParams,
) -> bool {
    path.len() >= 2
        && dist(robot, tree.config(tree.root())) <= params.near_root_threshold
        && crate::geometry::segment_free(robot, path.configs[1], world, params.robot_radius)
}

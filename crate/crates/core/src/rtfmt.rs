//! Real-time fast marching tree.
//!
//! All samples are drawn once, up front. Each control tick senses the
//! dynamic obstacles, then runs a fixed number of iterations, each made of
//! one bounded expansion step, one obstacle-rewire step and one root-rewire
//! step. Afterwards a global path (goal connected) or a local path (best
//! `cost + distance-to-goal` node) is extracted, and the root follows the
//! robot along it.

use crate::error::{Error, Result};
use crate::geometry::{dist, free_space_measure, point_free, segment_free, Config, World};
use crate::planner::{should_promote, BlockTracker, ContextUpdate, Path, PathKind, Planner, PlannerParams, TickRecord};
use crate::sampling::{neighborhood_radius, sample_free, SampleSet, SamplerParams, DIM};
use crate::tree::{NodeStatus, PlanTree};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Rasterization resolution used for the free-space measure.
pub const MEASURE_RESOLUTION: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpandStep {
    /// Neighbors of a newly selected center were gathered.
    Loaded(usize),
    Connected(usize),
    /// A candidate was popped but could not be connected.
    Rejected(usize),
    /// Nothing left to pop this call.
    Idle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewireStep {
    Seeded(usize),
    Rewired(usize),
    Kept(usize),
    Skipped(usize),
    Idle,
}

fn argmin_cost_to(tree: &PlanTree, candidates: &[usize], target: Config) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &y in candidates {
        let v = tree.cost(y) + dist(tree.config(y), target);
        let better = match best {
            None => true,
            Some((b, bv)) => v < bv || (v == bv && y < b),
        };
        if better {
            best = Some((y, v));
        }
    }
    best
}

/// One bounded step of the fast-marching expansion. Adds at most one node.
pub fn expand_fmt(tree: &mut PlanTree, world: &World, inflation: f64) -> ExpandStep {
    if let Some(z) = tree.z {
        if !tree.z_loaded {
            tree.x_near = tree.near_of(z, |n| n.status == NodeStatus::Unvisited);
            tree.z_loaded = true;
            return ExpandStep::Loaded(tree.x_near.len());
        }
    }

    let mut step = ExpandStep::Idle;
    if let Some(x) = tree.x_near.pop() {
        step = try_connect(tree, world, inflation, x);
    }

    if tree.x_near.is_empty() {
        if let Some(z) = tree.z {
            close(tree, world, inflation, z);
        }
    }

    if tree.z.is_none() {
        tree.passes += 1;
        let reopen = std::mem::take(&mut tree.to_open);
        for id in reopen {
            tree.in_to_open[id] = false;
            if tree.status(id) == NodeStatus::Closed {
                tree.set_status(id, NodeStatus::Open);
            }
        }
        tree.z = tree.min_open();
        tree.z_loaded = false;
    }
    step
}

fn try_connect(tree: &mut PlanTree, world: &World, inflation: f64, x: usize) -> ExpandStep {
    let node = tree.node(x);
    // samples inside a sensed obstacle stay unvisited until it leaves
    if node.status != NodeStatus::Unvisited || node.blocked {
        return ExpandStep::Rejected(x);
    }
    let xc = node.config;
    let mut best: Option<(usize, f64)> = None;
    for &(d, y) in tree.neighbors_of(x).iter() {
        if tree.status(y) != NodeStatus::Open {
            continue;
        }
        let v = tree.cost(y) + d;
        if best.map_or(true, |(b, bv)| v < bv || (v == bv && y < b)) {
            best = Some((y, v));
        }
    }
    match best {
        Some((y, _)) if tree.cost(y).is_finite() && segment_free(tree.config(y), xc, world, inflation) => {
            tree.connect(y, x, NodeStatus::OpenNew);
            tree.open_new.push(x);
            ExpandStep::Connected(x)
        }
        _ => ExpandStep::Rejected(x),
    }
}

/// Closes the current center, remembers it for reopening if it still sees
/// reachable unvisited samples, and selects the next center.
fn close(tree: &mut PlanTree, world: &World, inflation: f64, z: usize) {
    for id in std::mem::take(&mut tree.open_new) {
        if id != z && tree.status(id) == NodeStatus::OpenNew {
            tree.set_status(id, NodeStatus::Open);
        }
    }
    tree.set_status(z, NodeStatus::Closed);

    let zc = tree.config(z);
    let z_near = tree.near_of(z, |n| n.status == NodeStatus::Unvisited);
    if !tree.in_to_open[z] && z_near.iter().any(|&x| segment_free(zc, tree.config(x), world, inflation)) {
        tree.in_to_open[z] = true;
        tree.to_open.push(z);
    }

    tree.z = tree.min_open();
    tree.z_loaded = false;
}

/// Tries to reattach `x` to the neighbor minimizing `cost + edge`. Returns
/// whether the parent changed; the reattachment must strictly lower the cost.
fn rewire_node(tree: &mut PlanTree, world: &World, inflation: f64, x: usize) -> bool {
    let xc = tree.config(x);
    let candidates = tree.near_of(x, |n| n.status.in_tree());
    let Some((y, via)) = argmin_cost_to(tree, &candidates, xc) else {
        return false;
    };
    if !tree.cost(y).is_finite()
        || via >= tree.cost(x)
        || tree.node(x).parent == Some(y)
        || !segment_free(tree.config(y), xc, world, inflation)
    {
        return false;
    }
    if tree.update_parent_child(y, x).is_err() {
        return false;
    }
    let _ = tree.recalculate_children_cost(x);
    true
}

fn enqueue_children(tree: &mut PlanTree, x: usize, to_root_queue: bool) {
    let children = tree.node(x).children.clone();
    for c in children {
        if to_root_queue {
            if tree.root_visit[c] != tree.root_epoch {
                tree.q_root.push_back(c);
            }
        } else {
            tree.q_obstacles.push_back(c);
        }
    }
}

/// One bounded step of rewiring around nodes touched by obstacles. When the
/// queue is empty it is seeded from `pending` (which is drained).
pub fn rewire_from_obstacles(
    tree: &mut PlanTree,
    pending: &mut Vec<usize>,
    world: &World,
    inflation: f64,
) -> RewireStep {
    let Some(x) = tree.q_obstacles.pop_front() else {
        let seeded: Vec<usize> = pending.drain(..).filter(|&id| tree.status(id).in_tree()).collect();
        if seeded.is_empty() {
            return RewireStep::Idle;
        }
        let n = seeded.len();
        tree.q_obstacles.extend(seeded);
        return RewireStep::Seeded(n);
    };
    if !tree.status(x).in_tree() || x == tree.root() {
        return RewireStep::Skipped(x);
    }
    if tree.node(x).blocked {
        // the node itself stays put, but its subtree lost its cost and
        // should look for a way around
        enqueue_children(tree, x, false);
        return RewireStep::Skipped(x);
    }
    if rewire_node(tree, world, inflation, x) {
        enqueue_children(tree, x, false);
        RewireStep::Rewired(x)
    } else {
        RewireStep::Kept(x)
    }
}

/// One bounded step of the rewiring cascade that starts at the root after
/// each root change. Every node is visited at most once per cascade.
pub fn rewire_from_root(tree: &mut PlanTree, world: &World, inflation: f64) -> RewireStep {
    while let Some(x) = tree.q_root.pop_front() {
        if !tree.status(x).in_tree() || tree.root_visit[x] == tree.root_epoch {
            continue;
        }
        tree.root_visit[x] = tree.root_epoch;
        let changed = x != tree.root() && !tree.node(x).blocked && rewire_node(tree, world, inflation, x);
        enqueue_children(tree, x, true);
        return if changed { RewireStep::Rewired(x) } else { RewireStep::Kept(x) };
    }
    RewireStep::Idle
}

/// Root-to-goal path when the goal is connected with finite cost, otherwise
/// the path to the node minimizing `cost + distance to goal` (ties by id).
pub fn generate_path(tree: &PlanTree, goal_id: usize, goal: Config) -> Path {
    if let Some(p) = global_path(tree, goal_id) {
        return p;
    }
    let mut best = (tree.root(), dist(tree.config(tree.root()), goal));
    for (i, n) in tree.nodes().iter().enumerate() {
        if n.status.in_tree() && n.cost.is_finite() {
            best = better_local(best, i, n.cost + dist(n.config, goal));
        }
    }
    local_path(tree, best.0)
}

fn global_path(tree: &PlanTree, goal_id: usize) -> Option<Path> {
    if !tree.cost(goal_id).is_finite() {
        return None;
    }
    tree.path_to(goal_id).map(|nodes| Path::from_nodes(tree, nodes, PathKind::Global))
}

fn local_path(tree: &PlanTree, target: usize) -> Path {
    let nodes = tree.path_to(target).unwrap_or_else(|| vec![tree.root()]);
    Path::from_nodes(tree, nodes, PathKind::Local)
}

fn better_local(best: (usize, f64), id: usize, v: f64) -> (usize, f64) {
    if v < best.1 || (v == best.1 && id < best.0) {
        (id, v)
    } else {
        best
    }
}

/// Remembers the local-path target between ticks. While no connected node
/// changes cost, only newly connected nodes need to be examined.
#[derive(Debug, Clone, Default)]
struct LocalTarget {
    best: Option<(usize, f64)>,
    goal: usize,
    cost_changes: u64,
    scanned: usize,
}

impl LocalTarget {
    fn path(&mut self, tree: &PlanTree, goal_id: usize) -> Path {
        if let Some(p) = global_path(tree, goal_id) {
            return p;
        }
        let goal = tree.config(goal_id);
        let stale = self.best.is_none() || self.goal != goal_id || self.cost_changes != tree.cost_changes();
        if stale {
            self.best = None;
            self.scanned = 0;
            self.goal = goal_id;
            self.cost_changes = tree.cost_changes();
        }
        let joined = tree.joined();
        let mut best = self.best.unwrap_or((tree.root(), dist(tree.config(tree.root()), goal)));
        for &i in &joined[self.scanned..] {
            let n = tree.node(i);
            if n.cost.is_finite() {
                best = better_local(best, i, n.cost + dist(n.config, goal));
            }
        }
        self.scanned = joined.len();
        self.best = Some(best);
        local_path(tree, best.0)
    }
}

/// Promotes a child of the root to root and restarts the root cascade.
pub fn update_root(tree: &mut PlanTree, new_root: usize) -> Result<()> {
    tree.reroot(new_root)?;
    tree.root_epoch = tree.root_epoch.wrapping_add(1);
    tree.q_root.clear();
    tree.q_root.push_back(new_root);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RtFmt {
    tree: PlanTree,
    params: PlannerParams,
    goal: usize,
    tracker: BlockTracker,
    pending: Vec<usize>,
    root_updates: bool,
    tick: u64,
    record: TickRecord,
    path: Option<Path>,
    local: LocalTarget,
}

impl RtFmt {
    /// Samples the free space, computes the connection radius and roots the
    /// tree at `start`.
    pub fn new(world: &World, start: Config, goal: Config, sampler: &SamplerParams, params: PlannerParams) -> Result<Self> {
        let mu = free_space_measure(world, params.robot_radius, MEASURE_RESOLUTION);
        Self::with_free_measure(world, start, goal, sampler, params, mu)
    }

    /// Like [`RtFmt::new`] with a precomputed free-space measure.
    pub fn with_free_measure(
        world: &World,
        start: Config,
        goal: Config,
        sampler: &SamplerParams,
        params: PlannerParams,
        mu_free: f64,
    ) -> Result<Self> {
        sampler.validate()?;
        params.validate()?;
        let r_n = neighborhood_radius(sampler.n, DIM, mu_free, sampler.gamma_s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
        let samples = sample_free(world, params.robot_radius, sampler.n, start, goal, &mut rng)?;
        Self::from_samples(world, &samples, r_n, params)
    }

    /// Planner over a given sample set (start and goal last).
    pub fn from_samples(world: &World, samples: &SampleSet, r_n: f64, params: PlannerParams) -> Result<Self> {
        params.validate()?;
        let mut tree = PlanTree::new(&samples.configs, samples.start_id(), r_n, world.bounds)?;
        tree.enable_neighbor_cache();
        Ok(RtFmt {
            tree,
            params,
            goal: samples.goal_id(),
            tracker: BlockTracker::default(),
            pending: Vec::new(),
            root_updates: true,
            tick: 0,
            record: TickRecord::default(),
            path: None,
            local: LocalTarget::default(),
        })
    }

    pub fn params(&self) -> &PlannerParams {
        &self.params
    }

    pub fn goal_id(&self) -> usize {
        self.goal
    }

    pub fn tree_mut(&mut self) -> &mut PlanTree {
        &mut self.tree
    }

    /// Senses obstacles and queues the affected nodes for obstacle rewiring.
    pub fn update_context(&mut self, world: &World, robot: Config) -> ContextUpdate {
        let goal = self.tree.config(self.goal);
        let update = self.tracker.update(&mut self.tree, world, robot, goal, &self.params);
        self.pending.clear();
        self.pending.extend_from_slice(&update.blocked);
        self.pending.extend_from_slice(&update.unblocked);
        update
    }

    pub fn expand(&mut self, world: &World) -> ExpandStep {
        expand_fmt(&mut self.tree, world, self.params.robot_radius)
    }

    pub fn rewire_obstacles(&mut self, world: &World) -> RewireStep {
        rewire_from_obstacles(&mut self.tree, &mut self.pending, world, self.params.robot_radius)
    }

    pub fn rewire_root(&mut self, world: &World) -> RewireStep {
        rewire_from_root(&mut self.tree, world, self.params.robot_radius)
    }

    pub fn generate_path(&self) -> Path {
        generate_path(&self.tree, self.goal, self.tree.config(self.goal))
    }

    pub fn update_root(&mut self, new_root: usize) -> Result<()> {
        update_root(&mut self.tree, new_root)
    }

    /// Runs expansion until the open set first runs empty (or `max_calls`).
    pub fn expand_to_exhaustion(&mut self, world: &World, max_calls: usize) -> usize {
        let start = self.tree.expansion_passes();
        let mut calls = 0;
        while self.tree.expansion_passes() == start && calls < max_calls {
            self.expand(world);
            calls += 1;
        }
        calls
    }
}

impl Planner for RtFmt {
    fn name(&self) -> &'static str {
        "rtfmt"
    }

    fn plan_tick(&mut self, world: &World, robot: Config) -> Config {
        self.tick += 1;
        let update = self.update_context(world, robot);
        let mut rec = TickRecord {
            tick: self.tick,
            blocked: update.blocked.len(),
            unblocked: update.unblocked.len(),
            ..Default::default()
        };
        let started = self.params.tick_time_cap.map(|cap| (Instant::now(), cap));
        for _ in 0..self.params.iterations_per_tick {
            if let ExpandStep::Connected(_) = self.expand(world) {
                rec.additions += 1;
            }
            rec.expansion_steps += 1;
            if !matches!(self.rewire_obstacles(world), RewireStep::Idle) {
                rec.obstacle_rewire_steps += 1;
            }
            if !matches!(self.rewire_root(world), RewireStep::Idle) {
                rec.root_rewire_steps += 1;
            }
            if let Some((t0, cap)) = started {
                if t0.elapsed().as_secs_f64() >= cap {
                    break;
                }
            }
        }

        let mut path = self.local.path(&self.tree, self.goal);
        if self.root_updates && should_promote(&self.tree, &path, world, robot, &self.params) {
            let next = path.nodes[1];
            if self.update_root(next).is_ok() {
                rec.promoted = true;
                path = Path::from_nodes(&self.tree, path.nodes[1..].to_vec(), path.kind);
            }
        }
        rec.tree_size = self.tree.tree_size();
        rec.root = self.tree.root();
        rec.path_kind = Some(path.kind);
        rec.path_cost = path.cost;
        rec.path_len = path.len();
        self.record = rec;
        self.path = Some(path);
        self.tree.config(self.tree.root())
    }

    fn retarget(&mut self, world: &World, goal: Config) -> Result<()> {
        if !point_free(goal, world, self.params.robot_radius) {
            return Err(Error::NotFree { x: goal.x, y: goal.y });
        }
        let existing = self
            .tree
            .within(goal, 0.0, |_| true)
            .into_iter()
            .find(|&id| self.tree.config(id) == goal);
        self.goal = match existing {
            Some(id) => id,
            None => self.tree.insert_sample(goal),
        };
        for id in self.tree.near(goal, |n| n.status == NodeStatus::Closed) {
            if !self.tree.in_to_open[id] {
                self.tree.in_to_open[id] = true;
                self.tree.to_open.push(id);
            }
        }
        Ok(())
    }

    fn has_global_path(&self) -> bool {
        self.tree.cost(self.goal).is_finite()
    }

    fn sampling_done(&self) -> bool {
        self.tree.expansion_passes() > 0
    }

    fn set_root_updates(&mut self, enabled: bool) {
        self.root_updates = enabled;
    }

    fn tree(&self) -> &PlanTree {
        &self.tree
    }

    fn last_tick(&self) -> &TickRecord {
        &self.record
    }

    fn last_path(&self) -> Option<&Path> {
        self.path.as_ref()
    }

    fn goal(&self) -> Config {
        self.tree.config(self.goal)
    }
}

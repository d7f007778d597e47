//! RT-RRT* baseline: incremental sample-and-extend tree with RRT* parent
//! choice, random-node rewiring and a continuously restarted rewiring
//! cascade from the root. Obstacle blocking, root promotion and path output
//! use the same conventions as [`crate::rtfmt`] so the two are comparable.

use crate::error::{Error, Result};
use crate::geometry::{dist, point_free, segment_free, Config, World};
use crate::planner::{should_promote, BlockTracker, ContextUpdate, Path, PathKind, Planner, PlannerParams, TickRecord};
use crate::tree::{NodeStatus, PlanTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtRrtParams {
    /// Total sample-and-extend attempts.
    pub max_attempts: usize,
    /// Neighborhood density above which close samples are not added.
    pub k_max: usize,
    /// Minimum spacing for adding a sample in a dense neighborhood, meters.
    pub min_spacing: f64,
    /// Probability of sampling the goal.
    pub goal_bias: f64,
    /// Depth bound of local paths.
    pub path_depth: usize,
    pub seed: u64,
}

impl RtRrtParams {
    pub fn new(max_attempts: usize, min_spacing: f64, seed: u64) -> Self {
        RtRrtParams {
            max_attempts,
            k_max: 5,
            min_spacing,
            goal_bias: 0.1,
            path_depth: 10,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AttemptStats {
    pub attempts: usize,
    pub added: usize,
    pub failed: usize,
}

#[derive(Debug, Clone)]
pub struct RtRrt {
    tree: PlanTree,
    params: PlannerParams,
    rrt: RtRrtParams,
    rng: ChaCha8Rng,
    goal: Config,
    goal_id: Option<usize>,
    search_area: f64,
    tracker: BlockTracker,
    sensed: Vec<Config>,
    q_rand: VecDeque<usize>,
    q_root: VecDeque<usize>,
    root_mark: Vec<u32>,
    root_epoch: u32,
    stats: AttemptStats,
    root_updates: bool,
    tick: u64,
    record: TickRecord,
    path: Option<Path>,
}

impl RtRrt {
    pub fn new(world: &World, start: Config, goal: Config, rrt: RtRrtParams, params: PlannerParams) -> Result<Self> {
        params.validate()?;
        if !(rrt.min_spacing > 0.0) || rrt.k_max == 0 || !(0.0..=1.0).contains(&rrt.goal_bias) {
            return Err(Error::InvalidParam("bad RT-RRT* parameters".into()));
        }
        for p in [start, goal] {
            if !point_free(p, world, params.robot_radius) {
                return Err(Error::NotFree { x: p.x, y: p.y });
            }
        }
        // the tree radius only sets the grid cell here; neighbor radii are computed per query
        let tree = PlanTree::new(&[start], 0, 8.0 * rrt.min_spacing, world.bounds)?;
        Ok(RtRrt {
            tree,
            params,
            rrt,
            rng: ChaCha8Rng::seed_from_u64(rrt.seed),
            goal,
            goal_id: None,
            search_area: world.bounds.area(),
            tracker: BlockTracker::default(),
            sensed: Vec::new(),
            q_rand: VecDeque::new(),
            q_root: VecDeque::new(),
            root_mark: vec![0],
            root_epoch: 0,
            stats: AttemptStats::default(),
            root_updates: true,
            tick: 0,
            record: TickRecord::default(),
            path: None,
        })
    }

    pub fn stats(&self) -> AttemptStats {
        self.stats
    }

    pub fn rrt_params(&self) -> &RtRrtParams {
        &self.rrt
    }

    /// Neighborhood radius `max(sqrt(area * k_max / (pi * n)), min_spacing)`.
    pub fn near_radius(&self) -> f64 {
        let n = self.tree.len().max(1) as f64;
        (self.search_area * self.rrt.k_max as f64 / (std::f64::consts::PI * n))
            .sqrt()
            .max(self.rrt.min_spacing)
    }

    pub fn update_context(&mut self, world: &World, robot: Config) -> ContextUpdate {
        self.sensed = world
            .dynamic
            .iter()
            .filter(|o| dist(robot, o.center) <= self.params.sensing_range)
            .map(|o| o.center)
            .collect();
        self.tracker.update(&mut self.tree, world, robot, self.goal, &self.params)
    }

    fn sample(&mut self, world: &World) -> Config {
        if self.goal_id.is_none() && self.rng.gen_bool(self.rrt.goal_bias) {
            return self.goal;
        }
        Config::new(
            self.rng.gen_range(0.0..=world.bounds.width),
            self.rng.gen_range(0.0..=world.bounds.height),
        )
    }

    fn add_node(&mut self, x: Config, closest: usize, near: &[usize], world: &World) -> usize {
        let inflation = self.params.robot_radius;
        let mut parent = closest;
        let mut best = self.tree.cost(closest) + dist(self.tree.config(closest), x);
        for &y in near {
            let v = self.tree.cost(y) + dist(self.tree.config(y), x);
            if v < best && segment_free(self.tree.config(y), x, world, inflation) {
                parent = y;
                best = v;
            }
        }
        let id = self.tree.insert_sample(x);
        self.root_mark.push(0);
        if self.sensed.iter().any(|c| dist(*c, x) <= self.params.blocking_radius) {
            let _ = self.tree.set_blocked(id);
            // the next context update unblocks it once the obstacle leaves
            self.tracker.note_blocked(id);
        }
        self.tree.connect(parent, id, NodeStatus::Closed);
        id
    }

    /// One sample-and-extend attempt (if budget remains) followed by one
    /// random-node rewire.
    pub fn expand_and_rewire(&mut self, world: &World) -> bool {
        let mut added = false;
        if self.stats.attempts < self.rrt.max_attempts {
            self.stats.attempts += 1;
            let x = self.sample(world);
            let closest = self.tree.nearest(x, |n| n.status.in_tree());
            match closest {
                Some(c)
                    if dist(self.tree.config(c), x) > 0.0
                        && segment_free(self.tree.config(c), x, world, self.params.robot_radius) =>
                {
                    let near = self.tree.within(x, self.near_radius(), |n| n.status.in_tree());
                    if near.len() < self.rrt.k_max || dist(self.tree.config(c), x) > self.rrt.min_spacing {
                        let id = self.add_node(x, c, &near, world);
                        if x == self.goal {
                            self.goal_id = Some(id);
                        }
                        self.q_rand.push_front(id);
                        self.stats.added += 1;
                        added = true;
                    } else {
                        self.q_rand.push_front(c);
                        self.stats.failed += 1;
                    }
                }
                _ => self.stats.failed += 1,
            }
        }
        self.rewire_random_step(world);
        added
    }

    /// Reparents neighbors of `x` through `x` where that is strictly cheaper.
    fn relax_neighbors(&mut self, x: usize, world: &World) -> Vec<usize> {
        let cx = self.tree.cost(x);
        if !cx.is_finite() {
            return Vec::new();
        }
        let xc = self.tree.config(x);
        let mut changed = Vec::new();
        for y in self.tree.within(xc, self.near_radius(), |n| n.status.in_tree()) {
            if y == x || y == self.tree.root() || self.tree.node(y).blocked {
                continue;
            }
            let via = cx + dist(xc, self.tree.config(y));
            if via < self.tree.cost(y)
                && !self.tree.is_ancestor(y, x)
                && segment_free(xc, self.tree.config(y), world, self.params.robot_radius)
                && self.tree.update_parent_child(x, y).is_ok()
            {
                let _ = self.tree.recalculate_children_cost(y);
                changed.push(y);
            }
        }
        changed
    }

    fn rewire_random_step(&mut self, world: &World) -> bool {
        let Some(x) = self.q_rand.pop_front() else {
            return false;
        };
        for y in self.relax_neighbors(x, world) {
            self.q_rand.push_back(y);
        }
        true
    }

    /// One step of the root cascade, restarting from the root when exhausted.
    pub fn rewire_root_step(&mut self, world: &World) -> bool {
        if self.q_root.is_empty() {
            self.root_epoch = self.root_epoch.wrapping_add(1);
            let root = self.tree.root();
            self.root_mark[root] = self.root_epoch;
            self.q_root.push_back(root);
        }
        let Some(x) = self.q_root.pop_front() else {
            return false;
        };
        self.relax_neighbors(x, world);
        let xc = self.tree.config(x);
        for y in self.tree.within(xc, self.near_radius(), |n| n.status.in_tree()) {
            if self.root_mark[y] != self.root_epoch {
                self.root_mark[y] = self.root_epoch;
                self.q_root.push_back(y);
            }
        }
        true
    }

    /// Global path if the goal is connected; otherwise the path to the best
    /// `cost + distance to goal` node within `path_depth` edges of the root.
    pub fn generate_path(&self) -> Path {
        if let Some(g) = self.goal_id {
            if self.tree.cost(g).is_finite() {
                if let Some(nodes) = self.tree.path_to(g) {
                    return Path::from_nodes(&self.tree, nodes, PathKind::Global);
                }
            }
        }
        let root = self.tree.root();
        let mut best = (root, dist(self.tree.config(root), self.goal));
        let mut frontier = vec![root];
        for _ in 0..self.rrt.path_depth {
            let mut next = Vec::new();
            for &u in &frontier {
                for &c in &self.tree.node(u).children {
                    let n = self.tree.node(c);
                    if !n.cost.is_finite() {
                        continue;
                    }
                    let v = n.cost + dist(n.config, self.goal);
                    if v < best.1 || (v == best.1 && c < best.0) {
                        best = (c, v);
                    }
                    next.push(c);
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        let nodes = self.tree.path_to(best.0).unwrap_or_else(|| vec![root]);
        Path::from_nodes(&self.tree, nodes, PathKind::Local)
    }
}

impl Planner for RtRrt {
    fn name(&self) -> &'static str {
        "rtrrt"
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
            if self.expand_and_rewire(world) {
                rec.additions += 1;
            }
            rec.expansion_steps += 1;
            if self.rewire_root_step(world) {
                rec.root_rewire_steps += 1;
            }
            if let Some((t0, cap)) = started {
                if t0.elapsed().as_secs_f64() >= cap {
                    break;
                }
            }
        }
        let mut path = self.generate_path();
        if self.root_updates && should_promote(&self.tree, &path, world, robot, &self.params) {
            if self.tree.reroot(path.nodes[1]).is_ok() {
                rec.promoted = true;
                self.q_root.clear();
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
        self.goal = goal;
        self.goal_id = self
            .tree
            .within(goal, 0.0, |n| n.status.in_tree())
            .into_iter()
            .find(|&id| self.tree.config(id) == goal);
        Ok(())
    }

    fn has_global_path(&self) -> bool {
        self.goal_id.is_some_and(|g| self.tree.cost(g).is_finite())
    }

    fn sampling_done(&self) -> bool {
        self.stats.attempts >= self.rrt.max_attempts
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
        self.goal
    }
}

//! Planning tree over a fixed sample set.
//!
//! Every sample is a node from the start; nodes that are not yet connected
//! are `Unvisited`. The tree keeps cost-to-root consistent eagerly: any
//! change of a parent, a blocked flag or the root immediately propagates to
//! the affected subtree.

use crate::error::{Error, Result};
use crate::geometry::{dist, Config, WorldBounds};
use crate::grid::SpatialGrid;
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::cell::OnceCell;
use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeStatus {
    Unvisited,
    Open,
    /// Connected since the current expansion center was chosen.
    OpenNew,
    Closed,
}

impl NodeStatus {
    pub fn in_tree(self) -> bool {
        self != NodeStatus::Unvisited
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeStatus::Unvisited => "unvisited",
            NodeStatus::Open => "open",
            NodeStatus::OpenNew => "open_new",
            NodeStatus::Closed => "closed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub config: Config,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub cost: f64,
    pub status: NodeStatus,
    pub blocked: bool,
}

impl Node {
    fn unvisited(config: Config) -> Self {
        Node {
            config,
            parent: None,
            children: Vec::new(),
            cost: f64::INFINITY,
            status: NodeStatus::Unvisited,
            blocked: false,
        }
    }
}

/// Open-set heap entry; the cost is the node's cost when it was pushed.
#[derive(Debug, Clone, Copy)]
struct OpenEntry {
    cost: f64,
    id: usize,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost.total_cmp(&other.cost).then(self.id.cmp(&other.id))
    }
}

#[derive(Debug, Clone)]
pub struct PlanTree {
    nodes: Vec<Node>,
    root: usize,
    r_n: f64,
    grid: SpatialGrid,
    /// Lazily filled `(distance, id)` lists of the nodes within `r_n` of
    /// each node, when enabled. Not sorted.
    neighbors: Option<Vec<OnceCell<Vec<(f64, usize)>>>>,
    open_heap: BinaryHeap<Reverse<OpenEntry>>,

    // expansion state, carried between bounded expansion calls
    pub(crate) z: Option<usize>,
    pub(crate) z_loaded: bool,
    pub(crate) x_near: Vec<usize>,
    pub(crate) open_new: Vec<usize>,
    pub(crate) to_open: Vec<usize>,
    pub(crate) in_to_open: Vec<bool>,

    // rewire queues
    pub(crate) q_obstacles: VecDeque<usize>,
    pub(crate) q_root: VecDeque<usize>,
    pub(crate) root_visit: Vec<u32>,
    pub(crate) root_epoch: u32,
    /// Times the open set ran empty.
    pub(crate) passes: usize,
    in_tree: usize,
    /// Nodes in the order they joined the tree.
    joined: Vec<usize>,
    /// Bumped whenever the cost of a node already in the tree changes.
    cost_changes: u64,
}

impl PlanTree {
    /// Tree over `samples` rooted at `root`; the root is the only open node.
    pub fn new(samples: &[Config], root: usize, r_n: f64, bounds: WorldBounds) -> Result<Self> {
        if root >= samples.len() {
            return Err(Error::NoSuchNode(root));
        }
        if !(r_n > 0.0) {
            return Err(Error::InvalidParam(format!("radius must be positive, got {r_n}")));
        }
        let mut grid = SpatialGrid::new(bounds, r_n / 2.0);
        let nodes: Vec<Node> = samples
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                grid.insert(i, p);
                Node::unvisited(p)
            })
            .collect();
        let n = nodes.len();
        let mut tree = PlanTree {
            nodes,
            root,
            r_n,
            grid,
            neighbors: None,
            open_heap: BinaryHeap::new(),
            z: Some(root),
            z_loaded: false,
            x_near: Vec::new(),
            open_new: Vec::new(),
            to_open: Vec::new(),
            in_to_open: vec![false; n],
            q_obstacles: VecDeque::new(),
            q_root: VecDeque::new(),
            root_visit: vec![0; n],
            root_epoch: 0,
            passes: 0,
            in_tree: 0,
            joined: Vec::new(),
            cost_changes: 0,
        };
        tree.nodes[root].cost = 0.0;
        tree.set_status(root, NodeStatus::Open);
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Number of completed expansion passes (open set exhausted).
    pub fn expansion_passes(&self) -> usize {
        self.passes
    }

    /// Current expansion center.
    pub fn expansion_center(&self) -> Option<usize> {
        self.z
    }

    pub fn radius(&self) -> f64 {
        self.r_n
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn config(&self, id: usize) -> Config {
        self.nodes[id].config
    }

    pub fn cost(&self, id: usize) -> f64 {
        self.nodes[id].cost
    }

    pub fn status(&self, id: usize) -> NodeStatus {
        self.nodes[id].status
    }

    /// Connected nodes in joining order.
    pub fn joined(&self) -> &[usize] {
        &self.joined
    }

    /// Counter of cost changes of connected nodes; new connections do not
    /// count.
    pub fn cost_changes(&self) -> u64 {
        self.cost_changes
    }

    /// Number of nodes connected to the tree.
    pub fn tree_size(&self) -> usize {
        self.in_tree
    }

    fn check(&self, id: usize) -> Result<()> {
        if id < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::NoSuchNode(id))
        }
    }

    /// Adds a new unconnected sample and returns its id.
    pub fn insert_sample(&mut self, config: Config) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::unvisited(config));
        self.grid.insert(id, config);
        self.in_to_open.push(false);
        self.root_visit.push(0);
        if self.neighbors.is_some() {
            let around = self.within_pairs(config, self.r_n, id);
            let cache = self.neighbors.as_mut().unwrap();
            for &(d, j) in &around {
                if let Some(list) = cache[j].get_mut() {
                    list.push((d, id));
                }
            }
            cache.push(OnceCell::new());
        }
        id
    }

    /// Caches the `r_n` neighborhood of each node on first use. Worthwhile
    /// when the node set is (almost) fixed, as for a batch of samples.
    pub fn enable_neighbor_cache(&mut self) {
        if self.neighbors.is_none() {
            self.neighbors = Some((0..self.nodes.len()).map(|_| OnceCell::new()).collect());
        }
    }

    fn within_pairs(&self, center: Config, radius: f64, skip: usize) -> Vec<(f64, usize)> {
        let nodes = &self.nodes;
        self.grid.within_unsorted(|i| nodes[i].config, center, radius, |j| j != skip)
    }

    /// `(distance, id)` for every other node within `r_n` of node `id`. The
    /// order is deterministic but, with the cache enabled, not sorted.
    pub fn neighbors_of(&self, id: usize) -> Cow<'_, [(f64, usize)]> {
        let center = self.nodes[id].config;
        match &self.neighbors {
            Some(cache) => Cow::Borrowed(cache[id].get_or_init(|| self.within_pairs(center, self.r_n, id))),
            None => Cow::Owned(self.within_pairs(center, self.r_n, id)),
        }
    }

    /// Ids from [`PlanTree::neighbors_of`] accepted by `keep`.
    pub fn near_of(&self, id: usize, mut keep: impl FnMut(&Node) -> bool) -> Vec<usize> {
        self.neighbors_of(id)
            .iter()
            .filter(|&&(_, j)| keep(&self.nodes[j]))
            .map(|&(_, j)| j)
            .collect()
    }

    /// Nodes accepted by `keep` within the session radius of `center`,
    /// ascending distance, ties by id.
    pub fn near(&self, center: Config, keep: impl FnMut(&Node) -> bool) -> Vec<usize> {
        self.within(center, self.r_n, keep)
    }

    /// Same as [`PlanTree::near`] for an arbitrary radius.
    pub fn within(&self, center: Config, radius: f64, mut keep: impl FnMut(&Node) -> bool) -> Vec<usize> {
        let nodes = &self.nodes;
        self.grid
            .within(|i| nodes[i].config, center, radius, |i| keep(&nodes[i]))
    }

    pub fn nearest(&self, center: Config, mut keep: impl FnMut(&Node) -> bool) -> Option<usize> {
        let nodes = &self.nodes;
        self.grid.nearest(|i| nodes[i].config, center, |i| keep(&nodes[i]))
    }

    pub(crate) fn set_status(&mut self, id: usize, status: NodeStatus) {
        let was = self.nodes[id].status.in_tree();
        if was != status.in_tree() {
            if was {
                self.in_tree -= 1;
            } else {
                self.in_tree += 1;
                self.joined.push(id);
            }
        }
        self.nodes[id].status = status;
        if status == NodeStatus::Open {
            self.open_heap.push(Reverse(OpenEntry { cost: self.nodes[id].cost, id }));
        }
    }

    fn assign_cost(&mut self, id: usize, cost: f64) -> bool {
        let node = &mut self.nodes[id];
        if node.cost.to_bits() == cost.to_bits() {
            return false;
        }
        node.cost = cost;
        if node.status.in_tree() {
            self.cost_changes += 1;
        }
        if node.status == NodeStatus::Open {
            self.open_heap.push(Reverse(OpenEntry { cost, id }));
        }
        true
    }

    /// Cost of `id` through its current parent.
    fn cost_via_parent(&self, id: usize) -> f64 {
        let node = &self.nodes[id];
        if id == self.root {
            return 0.0;
        }
        match node.parent {
            Some(p) if !node.blocked && self.nodes[p].cost.is_finite() => {
                self.nodes[p].cost + dist(self.nodes[p].config, node.config)
            }
            _ => f64::INFINITY,
        }
    }

    /// Open node of least cost (ties by id), discarding stale heap entries.
    pub fn min_open(&mut self) -> Option<usize> {
        while let Some(&Reverse(top)) = self.open_heap.peek() {
            let node = &self.nodes[top.id];
            if node.status == NodeStatus::Open && node.cost.to_bits() == top.cost.to_bits() {
                return Some(top.id);
            }
            // every cost change of an open node pushes a fresh entry, so a
            // stale one can simply be dropped
            self.open_heap.pop();
        }
        None
    }

    /// Connects an unvisited node under `parent`.
    pub(crate) fn connect(&mut self, parent: usize, id: usize, status: NodeStatus) {
        debug_assert_eq!(self.nodes[id].status, NodeStatus::Unvisited);
        self.nodes[id].parent = Some(parent);
        self.nodes[parent].children.push(id);
        let c = self.cost_via_parent(id);
        self.assign_cost(id, c);
        self.set_status(id, status);
    }

    /// Marks `id` blocked; its cost and every descendant's become infinite.
    /// The root cannot be blocked. Returns whether the flag changed.
    pub fn set_blocked(&mut self, id: usize) -> Result<bool> {
        self.check(id)?;
        if id == self.root || self.nodes[id].blocked {
            return Ok(false);
        }
        self.nodes[id].blocked = true;
        if self.nodes[id].cost.is_finite() {
            self.assign_cost(id, f64::INFINITY);
            self.recalculate_children_cost(id)?;
        }
        Ok(true)
    }

    /// Clears the blocked flag and restores cost through the parent, then
    /// updates the subtree. Stays infinite under a blocked ancestor.
    pub fn set_unblocked(&mut self, id: usize) -> Result<bool> {
        self.check(id)?;
        if !self.nodes[id].blocked {
            return Ok(false);
        }
        self.nodes[id].blocked = false;
        if self.nodes[id].status.in_tree() {
            let c = self.cost_via_parent(id);
            if self.assign_cost(id, c) {
                self.recalculate_children_cost(id)?;
            }
        }
        Ok(true)
    }

    /// True if `ancestor` lies on the root path of `id` (inclusive).
    pub fn is_ancestor(&self, ancestor: usize, id: usize) -> bool {
        let mut cur = Some(id);
        let mut steps = 0;
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            steps += 1;
            if steps > self.nodes.len() {
                break;
            }
            cur = self.nodes[c].parent;
        }
        false
    }

    /// Moves `child` under `new_parent` and sets its cost through the new
    /// edge. Descendants are not updated; see
    /// [`PlanTree::recalculate_children_cost`].
    pub fn update_parent_child(&mut self, new_parent: usize, child: usize) -> Result<()> {
        self.check(new_parent)?;
        self.check(child)?;
        if child == self.root || self.is_ancestor(child, new_parent) {
            return Err(Error::Cycle { parent: new_parent, child });
        }
        if let Some(old) = self.nodes[child].parent {
            self.nodes[old].children.retain(|&c| c != child);
        }
        self.nodes[child].parent = Some(new_parent);
        self.nodes[new_parent].children.push(child);
        let c = self.cost_via_parent(child);
        self.assign_cost(child, c);
        Ok(())
    }

    /// Depth-first recomputation of every descendant's cost. Returns the
    /// number of nodes visited.
    pub fn recalculate_children_cost(&mut self, id: usize) -> Result<usize> {
        self.check(id)?;
        let mut stack: Vec<usize> = self.nodes[id].children.clone();
        let mut visited = 0;
        while let Some(c) = stack.pop() {
            visited += 1;
            let cost = self.cost_via_parent(c);
            self.assign_cost(c, cost);
            stack.extend_from_slice(&self.nodes[c].children);
        }
        Ok(visited)
    }

    /// Makes `new_root`, a child of the current root, the root by reversing
    /// that single edge, then refreshes every cost.
    pub fn reroot(&mut self, new_root: usize) -> Result<()> {
        self.check(new_root)?;
        let old = self.root;
        if self.nodes[new_root].parent != Some(old) {
            return Err(Error::NotRootChild { node: new_root, root: old });
        }
        self.nodes[old].children.retain(|&c| c != new_root);
        self.nodes[new_root].parent = None;
        self.nodes[new_root].children.push(old);
        self.nodes[old].parent = Some(new_root);
        self.root = new_root;
        self.nodes[new_root].blocked = false;
        self.assign_cost(new_root, 0.0);
        let c = self.cost_via_parent(old);
        self.assign_cost(old, c);
        self.recalculate_children_cost(new_root)?;
        Ok(())
    }

    /// Node ids from the root to `id`, or `None` if `id` is not connected.
    pub fn path_to(&self, id: usize) -> Option<Vec<usize>> {
        if !self.nodes[id].status.in_tree() {
            return None;
        }
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
            if path.len() > self.nodes.len() {
                return None;
            }
        }
        if cur != self.root {
            return None;
        }
        path.reverse();
        Some(path)
    }

    /// Sum of edge lengths on the root path of `id`.
    pub fn path_length(&self, id: usize) -> Option<f64> {
        let path = self.path_to(id)?;
        Some(path.windows(2).map(|w| dist(self.config(w[0]), self.config(w[1]))).sum())
    }

    /// Undirected edge set, each edge as (min id, max id), sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.parent.map(|p| (i.min(p), i.max(p))))
            .collect();
        edges.sort_unstable();
        edges
    }

    pub fn parent_map(&self) -> Vec<Option<usize>> {
        self.nodes.iter().map(|n| n.parent).collect()
    }

    /// Verifies structural and cost invariants; `tol` bounds the cost error
    /// against the recomputed root-path sum.
    pub fn check_invariants(&self, tol: f64) -> std::result::Result<(), String> {
        let root = &self.nodes[self.root];
        if root.parent.is_some() || root.cost != 0.0 || root.blocked {
            return Err(format!("root {} malformed: {:?}", self.root, root));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                if self.nodes[c].parent != Some(i) {
                    return Err(format!("child link {i}->{c} not mirrored"));
                }
            }
            if let Some(p) = n.parent {
                if !self.nodes[p].children.contains(&i) {
                    return Err(format!("parent link {i}->{p} not mirrored"));
                }
            }
            if !n.status.in_tree() {
                if n.parent.is_some() || !n.children.is_empty() || n.cost != f64::INFINITY {
                    return Err(format!("unvisited node {i} attached or with finite cost"));
                }
                continue;
            }
            let path = self.path_to(i).ok_or_else(|| format!("node {i} not reachable from root (cycle?)"))?;
            let obstructed = path.iter().any(|&a| self.nodes[a].blocked);
            if obstructed {
                if n.cost != f64::INFINITY {
                    return Err(format!("node {i} under a blocked node has cost {}", n.cost));
                }
            } else {
                let sum: f64 = path.windows(2).map(|w| dist(self.config(w[0]), self.config(w[1]))).sum();
                if !((n.cost - sum).abs() <= tol) {
                    return Err(format!("node {i} cost {} != path sum {sum}", n.cost));
                }
            }
        }
        for q in [&self.q_obstacles, &self.q_root] {
            if q.iter().any(|&id| !self.nodes[id].status.in_tree()) {
                return Err("rewire queue holds a node outside the tree".into());
            }
        }
        Ok(())
    }

    /// One line per node: `id,x,y,parent,cost,status,blocked`.
    pub fn dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "id,x,y,parent,cost,status,blocked")?;
        for (i, n) in self.nodes.iter().enumerate() {
            let parent = n.parent.map(|p| p.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{i},{},{},{parent},{},{},{}",
                n.config.x,
                n.config.y,
                n.cost,
                n.status.as_str(),
                n.blocked
            )?;
        }
        Ok(())
    }
}

//! Reference implementations used by the integration tests. They work on
//! plain vectors and linear scans and share nothing with the planner except
//! the collision primitive.

#![allow(dead_code)]

use rand::Rng;
use rtfmt::geometry::{segment_free, Config, StaticObstacle, World};
use rtfmt::PlanTree;

pub fn d(a: Config, b: Config) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// Textbook batch FMT* run until the open set is empty (not stopped at the
/// goal). Argmins break ties by id. Returns the parent of every sample.
pub fn batch_fmt(configs: &[Config], start: usize, r_n: f64, world: &World, inflation: f64) -> Vec<Option<usize>> {
    let n = configs.len();
    let mut parent = vec![None; n];
    let mut cost = vec![f64::INFINITY; n];
    let mut unvisited = vec![true; n];
    let mut open = vec![false; n];
    cost[start] = 0.0;
    unvisited[start] = false;
    open[start] = true;
    let mut z = start;
    loop {
        let x_near: Vec<usize> = (0..n).filter(|&x| unvisited[x] && d(configs[z], configs[x]) <= r_n).collect();
        let mut new_open = Vec::new();
        for x in x_near {
            let mut best: Option<(f64, usize)> = None;
            for y in (0..n).filter(|&y| open[y] && y != x && d(configs[x], configs[y]) <= r_n) {
                let v = cost[y] + d(configs[y], configs[x]);
                if best.map_or(true, |(bv, b)| v < bv || (v == bv && y < b)) {
                    best = Some((v, y));
                }
            }
            if let Some((v, y)) = best {
                if segment_free(configs[y], configs[x], world, inflation) {
                    parent[x] = Some(y);
                    cost[x] = v;
                    new_open.push(x);
                    unvisited[x] = false;
                }
            }
        }
        open[z] = false;
        for x in new_open {
            open[x] = true;
        }
        let next = (0..n)
            .filter(|&i| open[i])
            .min_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(a.cmp(&b)));
        match next {
            Some(i) => z = i,
            None => break,
        }
    }
    parent
}

/// Follows parent links from `id`; `None` if they loop or do not end at `root`.
pub fn root_path(parent: &[Option<usize>], root: usize, id: usize) -> Option<Vec<usize>> {
    let mut path = vec![id];
    let mut cur = id;
    while let Some(p) = parent[cur] {
        if path.len() > parent.len() {
            return None;
        }
        path.push(p);
        cur = p;
    }
    (cur == root).then(|| {
        path.reverse();
        path
    })
}

/// Acyclicity and cost consistency of every connected node. Nodes with a
/// blocked node on their root path must have infinite cost, all others the
/// sum of their root-path edge lengths.
pub fn check_costs(tree: &PlanTree, tol: f64) -> Result<usize, String> {
    let parent = tree.parent_map();
    let root = tree.root();
    let mut checked = 0;
    for (i, node) in tree.nodes().iter().enumerate() {
        if !node.status.in_tree() {
            continue;
        }
        let path = root_path(&parent, root, i).ok_or_else(|| format!("node {i}: parent links loop or miss the root"))?;
        let obstructed = path.iter().any(|&a| tree.node(a).blocked);
        if obstructed {
            if node.cost.is_finite() {
                return Err(format!("node {i} sits under a blocked node but has cost {}", node.cost));
            }
            continue;
        }
        let sum: f64 = path.windows(2).map(|w| d(tree.config(w[0]), tree.config(w[1]))).sum();
        if !((node.cost - sum).abs() <= tol) {
            return Err(format!("node {i}: cost {} vs path sum {sum}", node.cost));
        }
        checked += 1;
    }
    Ok(checked)
}

/// Endpoint a root-to-target path must have: the goal if it is connected
/// with finite cost, else the connected finite-cost node minimizing
/// `cost + |x - goal|`, ties by id.
pub fn local_target(tree: &PlanTree, goal_id: usize) -> usize {
    if tree.cost(goal_id).is_finite() && tree.node(goal_id).status.in_tree() {
        return goal_id;
    }
    let goal = tree.config(goal_id);
    let mut best = (f64::INFINITY, usize::MAX);
    for (i, n) in tree.nodes().iter().enumerate() {
        if n.status.in_tree() && n.cost.is_finite() {
            let v = n.cost + d(n.config, goal);
            if v < best.0 || (v == best.0 && i < best.1) {
                best = (v, i);
            }
        }
    }
    best.1
}

/// Square world with a few random axis-aligned boxes that leave the corners free.
pub fn random_world<R: Rng>(rng: &mut R, size: f64, boxes: usize) -> World {
    let mut world = World::empty(size, size);
    while world.obstacles.len() < boxes {
        let w = rng.gen_range(0.05..0.25) * size;
        let h = rng.gen_range(0.05..0.25) * size;
        let x = rng.gen_range(0.1 * size..0.9 * size - w);
        let y = rng.gen_range(0.1 * size..0.9 * size - h);
        world.obstacles.push(StaticObstacle::from_origin_size(x, y, w, h));
    }
    world
}

/// Flood fill over a `cell`-spaced lattice of free points; true when `b` is
/// reachable from `a`.
pub fn lattice_connected(world: &World, inflation: f64, a: Config, b: Config, cell: f64) -> bool {
    use rtfmt::geometry::point_free;
    let nx = (world.bounds.width / cell).floor() as i64 + 1;
    let ny = (world.bounds.height / cell).floor() as i64 + 1;
    let at = |i: i64, j: i64| Config::new(i as f64 * cell, j as f64 * cell);
    let free = |i: i64, j: i64| i >= 0 && j >= 0 && i < nx && j < ny && point_free(at(i, j), world, inflation);
    let snap = |p: Config| {
        let (i, j) = ((p.x / cell).round() as i64, (p.y / cell).round() as i64);
        (-1..=1)
            .flat_map(|di| (-1..=1).map(move |dj| (i + di, j + dj)))
            .filter(|&(i, j)| free(i, j) && segment_free(p, at(i, j), world, inflation))
            .collect::<Vec<_>>()
    };
    let mut seen = vec![false; (nx * ny) as usize];
    let mut stack = snap(a);
    let goals = snap(b);
    while let Some((i, j)) = stack.pop() {
        let k = (i * ny + j) as usize;
        if seen[k] {
            continue;
        }
        seen[k] = true;
        if goals.contains(&(i, j)) {
            return true;
        }
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            if free(i + di, j + dj) && segment_free(at(i, j), at(i + di, j + dj), world, inflation) {
                stack.push((i + di, j + dj));
            }
        }
    }
    false
}

pub mod checks {
    //! Whole oracle comparisons, shared with the acceptance target.

    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rtfmt::geometry::{free_space_measure, DynamicObstacle, MotionPolicy};
    use rtfmt::rtfmt::generate_path;
    use rtfmt::sampling::sample_free;
    use rtfmt::{neighborhood_radius, Planner, PlannerParams, RtFmt};

    /// Exhaustive expansion against [`batch_fmt`] on a seeded 50 m world.
    /// Returns (mismatched parents, connected nodes).
    pub fn fmt_vs_batch(seed: u64, n: usize) -> (usize, usize) {
        let inflation = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let world = random_world(&mut rng, 50.0, 4);
        let samples = sample_free(&world, inflation, n, Config::new(2.0, 2.0), Config::new(48.0, 48.0), &mut rng).unwrap();
        let r_n = neighborhood_radius(n, 2, free_space_measure(&world, inflation, 500), 1.1).unwrap();
        let mut planner = RtFmt::from_samples(&world, &samples, r_n, PlannerParams::new(2.0, 10.0, inflation)).unwrap();
        planner.expand_to_exhaustion(&world, 1_000_000);
        let got = planner.tree().parent_map();
        let want = batch_fmt(&samples.configs, samples.start_id(), r_n, &world, inflation);
        let mismatches = got.iter().zip(&want).filter(|(g, w)| g != w).count();
        (mismatches, want.iter().filter(|p| p.is_some()).count())
    }

    /// Random interleaving of expansion, obstacle moves, direct
    /// block/unblock, both rewires and root promotion on a 500-node tree,
    /// checking costs every `every` operations. Returns the op counts per kind.
    pub fn cost_fuzz(seed: u64, ops: usize, every: usize) -> Result<[usize; 6], String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut world = random_world(&mut rng, 40.0, 3);
        for _ in 0..3 {
            world.dynamic.push(DynamicObstacle {
                center: Config::new(20.0, 20.0),
                radius: 0.5,
                speed: 1.0,
                policy: MotionPolicy::RandomDirection,
                heading: Config::new(1.0, 0.0),
            });
        }
        let samples = sample_free(&world, 0.5, 498, Config::new(1.0, 1.0), Config::new(39.0, 39.0), &mut rng).unwrap();
        let r_n = neighborhood_radius(498, 2, free_space_measure(&world, 0.5, 500), 1.1).unwrap();
        let mut planner = RtFmt::from_samples(&world, &samples, r_n, PlannerParams::new(4.0, 100.0, 0.5)).unwrap();
        let n = samples.configs.len();
        let mut counts = [0usize; 6];
        for op in 1..=ops {
            let kind = rng.gen_range(0..6);
            counts[kind] += 1;
            match kind {
                0 => {
                    planner.expand(&world);
                }
                1 => {
                    let k = rng.gen_range(0..world.dynamic.len());
                    world.dynamic[k].center = Config::new(rng.gen_range(0.0..40.0), rng.gen_range(0.0..40.0));
                    let robot = planner.tree().config(planner.tree().root());
                    planner.update_context(&world, robot);
                }
                2 => {
                    let id = rng.gen_range(0..n);
                    let tree = planner.tree_mut();
                    let _ = if rng.gen_bool(0.5) { tree.set_blocked(id) } else { tree.set_unblocked(id) };
                }
                3 => {
                    planner.rewire_obstacles(&world);
                }
                4 => {
                    planner.rewire_root(&world);
                }
                _ => {
                    let path = planner.generate_path();
                    if path.len() >= 2 {
                        planner.update_root(path.nodes[1]).map_err(|e| e.to_string())?;
                    }
                }
            }
            if op % every == 0 {
                check_costs(planner.tree(), 1e-9).map_err(|e| format!("after {op} ops: {e}"))?;
            }
        }
        if planner.tree().tree_size() < 100 {
            return Err(format!("tree only grew to {}", planner.tree().tree_size()));
        }
        Ok(counts)
    }

    /// Partially grown trees with random blocked nodes and random goals,
    /// biased toward goals outside the tree. Returns (mismatches, local cases).
    pub fn local_path_vs_scan(seed: u64, trees: usize) -> (usize, usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mismatches = 0;
        let mut locals = 0;
        for _ in 0..trees {
            let world = random_world(&mut rng, 30.0, 3);
            let samples = sample_free(&world, 0.5, 300, Config::new(1.0, 1.0), Config::new(29.0, 29.0), &mut rng).unwrap();
            let r_n = neighborhood_radius(300, 2, free_space_measure(&world, 0.5, 200), 1.1).unwrap();
            let mut planner = RtFmt::from_samples(&world, &samples, r_n, PlannerParams::new(2.0, 10.0, 0.5)).unwrap();
            for _ in 0..rng.gen_range(0..800) {
                planner.expand(&world);
            }
            let n = planner.tree().len();
            for _ in 0..rng.gen_range(0..20) {
                let id = rng.gen_range(0..n);
                planner.tree_mut().set_blocked(id).unwrap();
            }
            let tree = planner.tree();
            let outside: Vec<usize> = (0..n).filter(|&i| !tree.node(i).status.in_tree()).collect();
            let goal_id = if !outside.is_empty() && rng.gen_bool(0.7) {
                outside[rng.gen_range(0..outside.len())]
            } else {
                rng.gen_range(0..n)
            };
            let path = generate_path(tree, goal_id, tree.config(goal_id));
            let valid = path.nodes[0] == tree.root() && path.nodes.iter().all(|&i| tree.cost(i).is_finite());
            if !valid || *path.nodes.last().unwrap() != local_target(tree, goal_id) {
                mismatches += 1;
            }
            if path.kind == rtfmt::PathKind::Local {
                locals += 1;
            }
        }
        (mismatches, locals)
    }
}

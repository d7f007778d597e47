mod support;

use proptest::prelude::*;
use rtfmt::geometry::{Config, World, WorldBounds};
use rtfmt::rtfmt::{rewire_from_root, update_root};
use rtfmt::{NodeStatus, PlanTree, Planner, PlannerParams, RtFmt};
use rtfmt::sampling::SampleSet;

fn points(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..20.0f64, 0.0..20.0f64), 3..max)
}

fn grown(pts: &[(f64, f64)], r_n: f64, world: &World) -> RtFmt {
    let mut configs: Vec<Config> = pts.iter().map(|&(x, y)| Config::new(x, y)).collect();
    configs.push(Config::new(0.5, 0.5));
    configs.push(Config::new(19.5, 19.5));
    let samples = SampleSet { configs };
    let mut p = RtFmt::from_samples(world, &samples, r_n, PlannerParams::new(2.0, 10.0, 0.0)).unwrap();
    p.expand_to_exhaustion(world, 100_000);
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn near_matches_linear_scan(pts in points(400), cx in 0.0..20.0f64, cy in 0.0..20.0f64, r in 0.1..6.0f64) {
        let configs: Vec<Config> = pts.iter().map(|&(x, y)| Config::new(x, y)).collect();
        let tree = PlanTree::new(&configs, 0, r, WorldBounds { width: 20.0, height: 20.0 }).unwrap();
        let c = Config::new(cx, cy);
        let got = tree.near(c, |_| true);
        let mut want: Vec<(f64, usize)> = configs
            .iter()
            .enumerate()
            .map(|(i, &p)| (support::d(p, c), i))
            .filter(|&(dd, _)| dd <= r)
            .collect();
        want.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        prop_assert_eq!(got, want.into_iter().map(|(_, i)| i).collect::<Vec<_>>());
    }

    #[test]
    fn promotion_keeps_undirected_edges(pts in points(120), steps in 1usize..6) {
        let world = World::empty(20.0, 20.0);
        let mut p = grown(&pts, 5.0, &world);
        for _ in 0..steps {
            let path = p.generate_path();
            if path.len() < 2 {
                break;
            }
            let before = p.tree().edges();
            p.update_root(path.nodes[1]).unwrap();
            prop_assert_eq!(p.tree().edges(), before);
            prop_assert_eq!(p.tree().cost(path.nodes[1]), 0.0);
            support::check_costs(p.tree(), 1e-9).map_err(TestCaseError::fail)?;
        }
    }

    #[test]
    fn root_cascade_never_raises_costs(pts in points(120)) {
        let world = World::empty(20.0, 20.0);
        let mut p = grown(&pts, 5.0, &world);
        let path = p.generate_path();
        prop_assume!(path.len() >= 2);
        update_root(p.tree_mut(), path.nodes[1]).unwrap();
        let mut before: Vec<f64> = p.tree().nodes().iter().map(|n| n.cost).collect();
        let mut visits = vec![0usize; before.len()];
        loop {
            let step = rewire_from_root(p.tree_mut(), &world, 0.0);
            let id = match step {
                rtfmt::rtfmt::RewireStep::Rewired(i) | rtfmt::rtfmt::RewireStep::Kept(i) => i,
                rtfmt::rtfmt::RewireStep::Idle => break,
                other => panic!("unexpected {other:?}"),
            };
            visits[id] += 1;
            let now: Vec<f64> = p.tree().nodes().iter().map(|n| n.cost).collect();
            for (a, b) in before.iter().zip(&now) {
                prop_assert!(b <= a);
            }
            before = now;
        }
        let tree = p.tree();
        for (i, n) in tree.nodes().iter().enumerate() {
            if n.status.in_tree() {
                prop_assert_eq!(visits[i], 1, "node {} visited {} times", i, visits[i]);
            } else {
                prop_assert_eq!(n.status, NodeStatus::Unvisited);
            }
        }
        support::check_costs(tree, 1e-9).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn paths_follow_tree_edges_with_rising_cost(pts in points(200)) {
        let world = World::empty(20.0, 20.0);
        let p = grown(&pts, 4.0, &world);
        let path = p.generate_path();
        let tree = p.tree();
        prop_assert_eq!(path.nodes[0], tree.root());
        for w in path.nodes.windows(2) {
            prop_assert_eq!(tree.node(w[1]).parent, Some(w[0]));
            prop_assert!(tree.cost(w[1]) > tree.cost(w[0]));
        }
    }
}

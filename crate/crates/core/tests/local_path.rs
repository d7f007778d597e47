mod support;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rtfmt::geometry::{free_space_measure, Config, DynamicObstacle, MotionPolicy, World};
use rtfmt::sampling::sample_free;
use rtfmt::{neighborhood_radius, PathKind, Planner, PlannerParams, RtFmt};

fn planner_in(world: &World, rng: &mut ChaCha8Rng, n: usize) -> RtFmt {
    let size = world.bounds.width;
    let samples = sample_free(world, 0.5, n, Config::new(1.0, 1.0), Config::new(size - 1.0, size - 1.0), rng).unwrap();
    let r_n = neighborhood_radius(n, 2, free_space_measure(world, 0.5, 200), 1.1).unwrap();
    RtFmt::from_samples(world, &samples, r_n, PlannerParams::new(2.0, 10.0, 0.5)).unwrap()
}

#[test]
fn endpoint_is_the_exhaustive_argmin() {
    let (mismatches, locals) = support::checks::local_path_vs_scan(7, 100);
    assert_eq!(mismatches, 0);
    assert!(locals > 40, "only {locals} local cases");
}

#[test]
fn single_node_tree_gives_root() {
    let world = World::empty(10.0, 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let planner = planner_in(&world, &mut rng, 20);
    let path = planner.generate_path();
    assert_eq!(path.kind, PathKind::Local);
    assert_eq!(path.nodes, vec![planner.tree().root()]);
}

#[test]
fn tick_paths_match_full_scan() {
    // per-tick paths come from an incremental search; compare each one with
    // a from-scratch scan while obstacles keep changing costs
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut world = support::random_world(&mut rng, 30.0, 3);
    for k in 0..3 {
        world.dynamic.push(DynamicObstacle {
            center: Config::new(5.0 + 8.0 * k as f64, 15.0),
            radius: 0.5,
            speed: 1.0,
            policy: MotionPolicy::RandomDirection,
            heading: Config::new(0.0, 1.0),
        });
    }
    let mut planner = planner_in(&world, &mut rng, 1500);
    planner.set_root_updates(false);
    let robot = planner.tree().config(planner.tree().root());
    let mut ticks_local = 0;
    for tick in 0..400 {
        for o in &mut world.dynamic {
            o.center.y = 15.0 + 10.0 * ((tick as f64) * 0.05).sin();
        }
        planner.plan_tick(&world, robot);
        let got = planner.last_path().unwrap().clone();
        let want = planner.generate_path();
        assert_eq!(got.nodes, want.nodes, "tick {tick}");
        if got.kind == PathKind::Local {
            ticks_local += 1;
        }
    }
    assert!(ticks_local > 20);
}

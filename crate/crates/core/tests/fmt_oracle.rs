mod support;

use rtfmt::geometry::{Config, StaticObstacle, World};
use support::{batch_fmt, checks};

#[test]
fn oracle_on_hand_fixture() {
    // node 3 is rejected while its cheapest open neighbor is behind the wall
    // and only joins once 2 is the sole open neighbor
    let mut world = World::empty(10.0, 10.0);
    world.obstacles.push(StaticObstacle::from_origin_size(2.4, 2.9, 0.2, 1.4));
    let configs = [
        Config::new(1.0, 4.0),
        Config::new(2.0, 4.0),
        Config::new(1.5, 5.5),
        Config::new(3.0, 4.0),
    ];
    let parent = batch_fmt(&configs, 0, 2.2, &world, 0.0);
    assert_eq!(parent, vec![None, Some(0), Some(0), Some(2)]);
}

#[test]
fn exhaustive_expansion_matches_batch_fmt() {
    for seed in 0..5 {
        let (mismatches, connected) = checks::fmt_vs_batch(seed, 200);
        assert_eq!(mismatches, 0, "seed {seed}");
        assert!(connected > 150, "seed {seed}: fixture too sparse ({connected} connected)");
    }
}

#[test]
fn larger_sample_sets_match_too() {
    let (mismatches, _) = checks::fmt_vs_batch(40, 800);
    assert_eq!(mismatches, 0);
}

mod support;

#[test]
fn costs_stay_consistent_under_random_operations() {
    let counts = support::checks::cost_fuzz(2024, 10_000, 100).unwrap();
    assert!(counts.iter().all(|&c| c > 1000), "{counts:?}");
}

#[test]
fn costs_stay_consistent_with_checks_after_every_operation() {
    support::checks::cost_fuzz(5, 2_000, 1).unwrap();
}

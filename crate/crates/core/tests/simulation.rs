//! Monte Carlo checks of the optimal policy.

use repmatch_core::{
    policy_dominance, simulate, solve, EconomyParams, Perturbation, Policy, SimConfig, SolveReport,
};

fn learning_example() -> (EconomyParams, SolveReport) {
    let p = EconomyParams::learning_example();
    (p, solve(&p).unwrap())
}

#[test]
fn certain_high_type_earns_reputation_value() {
    let (p, rep) = learning_example();
    let cfg = SimConfig::new(1.0, 50_000, 17).unwrap();
    let res = simulate(&p, &Policy::optimal(&rep), &cfg).unwrap();
    assert_eq!(res.high_type_fraction, 1.0);
    assert!((res.mean - 0.1967).abs() <= 3.0 * res.standard_error + 1e-4);
}

#[test]
fn ignoring_a_projects_costs_value() {
    let (p, rep) = learning_example();
    let cfg = SimConfig::new(0.8, 100_000, 42).unwrap();
    let table = policy_dominance(&p, &rep, &[Perturbation::DropA], &cfg).unwrap();
    let row = &table.rows[0];
    assert!(
        row.mean_difference < -3.0 * row.standard_error,
        "difference {} (SE {})",
        row.mean_difference,
        row.standard_error
    );
}

#[test]
fn raising_beta_does_not_help() {
    let (p, rep) = learning_example();
    let cfg = SimConfig::new(0.8, 100_000, 42).unwrap();
    let table = policy_dominance(&p, &rep, &[Perturbation::ShiftBeta(0.1)], &cfg).unwrap();
    let row = &table.rows[0];
    assert!(row.mean_difference <= 3.0 * row.standard_error);
    assert!(!table.any_beats_optimal());
}

#[test]
fn thread_count_does_not_change_results() {
    let (p, rep) = learning_example();
    let cfg = SimConfig::new(0.6, 5_000, 99).unwrap();
    let policy = Policy::optimal(&rep);
    let results: Vec<_> = [1, 2, 5]
        .iter()
        .map(|&n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| simulate(&p, &policy, &cfg).unwrap())
        })
        .collect();
    assert!(results
        .windows(2)
        .all(|w| w[0] == w[1] && w[0].paths == w[1].paths));
}

#[test]
fn no_meetings_earn_nothing() {
    let p = EconomyParams::new(0.9, 1.8, 3.0, 1.2, 0.0, 0.35, 0.4).unwrap();
    let rep = solve(&p).unwrap();
    let cfg = SimConfig::new(0.8, 100, 1).unwrap();
    let res = simulate(&p, &Policy::optimal(&rep), &cfg).unwrap();
    assert_eq!(res.mean, 0.0);
}

//! Numerical certification of a [`SolveReport`] against the optimality
//! conditions of the stopping problem.
//!
//! Every check is evaluated on a uniform belief grid with the boundaries
//! inserted, and reports its worst violation. Nothing here reuses the
//! solver's internal algebra beyond evaluating the reported functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::econ::ProjectType;
use crate::error::{Error, Result};
use crate::learning::{SolveReport, VaFn};

pub const MIN_GRID: usize = 1000;
pub const IDENTITY_TOLERANCE: f64 = 1e-8;
pub const FD_TOLERANCE: f64 = 1e-6;
pub const SLACK_TOLERANCE: f64 = 1e-9;
pub const FD_STEP: f64 = 1e-6;
/// Distance from `0`, `1` and the boundaries within which the
/// finite-difference comparison is skipped.
const FD_MARGIN: f64 = 1e-3;
/// Distance from a boundary within which membership is not compared.
const MEMBERSHIP_MARGIN: f64 = 1e-6;

/// `[L_q v_q](π) = λq π (1 + w(1) - v_q(π)) - λq π (1-π) v_q'(π)`.
pub fn generator_apply(report: &SolveReport, q: ProjectType, pi: f64) -> f64 {
    let jump = q.rate(&report.params) * pi;
    jump * (1.0 + report.regime.w1 - report.v(q, pi)) - jump * (1.0 - pi) * report.v_prime(q, pi)
}

/// `[L_q v_q] - r v_q - c`: zero where continuing, non-positive everywhere.
pub fn superharmonic_residual(report: &SolveReport, q: ProjectType, pi: f64) -> f64 {
    let p = &report.params;
    generator_apply(report, q, pi) - p.r() * report.v(q, pi) - p.c()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub max_violation: f64,
    pub worst_pi: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub grid_n: usize,
    pub points: usize,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Running maximum that keeps the smallest `π` among ties, so the result
/// does not depend on evaluation order.
#[derive(Debug, Clone, Copy)]
struct Worst {
    value: f64,
    pi: Option<f64>,
}

impl Worst {
    const NONE: Worst = Worst {
        value: 0.0,
        pi: None,
    };

    fn at(value: f64, pi: f64) -> Worst {
        Worst {
            value,
            pi: Some(pi),
        }
    }

    fn merge(self, other: Worst) -> Worst {
        match (self.pi, other.pi) {
            (None, _) => other,
            (_, None) => self,
            (Some(a), Some(b)) => {
                if other.value > self.value
                    || (other.value == self.value && b < a)
                    || other.value.is_nan()
                {
                    other
                } else {
                    self
                }
            }
        }
    }
}

const CHECKS: [(&str, f64); 11] = [
    ("majorant", SLACK_TOLERANCE),
    ("superharmonic", IDENTITY_TOLERANCE),
    ("bellman_continuation", IDENTITY_TOLERANCE),
    ("variational_hjb", IDENTITY_TOLERANCE),
    ("reputation_bellman", IDENTITY_TOLERANCE),
    ("smooth_pasting", FD_TOLERANCE),
    ("derivative_fd", FD_TOLERANCE),
    ("vb_dominates_va", SLACK_TOLERANCE),
    ("vb_convexity", SLACK_TOLERANCE),
    ("interval_structure", 0.0),
    ("ratio_bounds", SLACK_TOLERANCE),
];

#[derive(Debug, Clone, Copy)]
struct PointChecks([Worst; 11]);

impl PointChecks {
    fn merge(self, other: PointChecks) -> PointChecks {
        let mut out = self.0;
        for (slot, o) in out.iter_mut().zip(other.0) {
            *slot = slot.merge(o);
        }
        PointChecks(out)
    }
}

fn boundaries(report: &SolveReport) -> Vec<f64> {
    let mut b = vec![report.beta];
    b.extend(report.alpha);
    b
}

fn central_difference(f: impl Fn(f64) -> f64, pi: f64) -> f64 {
    (f(pi + FD_STEP) - f(pi - FD_STEP)) / (2.0 * FD_STEP)
}

fn point_checks(report: &SolveReport, pi: f64) -> PointChecks {
    let p = &report.params;
    let w = report.w(pi);
    let va = report.v_a(pi);
    let vb = report.v_b(pi);
    let mut out = [Worst::NONE; 11];
    let mut record = |idx: usize, value: f64| out[idx] = out[idx].merge(Worst::at(value, pi));

    for q in ProjectType::ALL {
        let v = report.v(q, pi);
        let residual = superharmonic_residual(report, q, pi);
        record(0, w - v);
        record(1, residual);
        if report.matching.contains(q, pi) {
            record(2, residual.abs());
        }
        record(3, residual.max(w - v).abs());
    }

    let gain: f64 = ProjectType::ALL
        .iter()
        .map(|&q| p.meeting_rate(q) * (report.v(q, pi) - w).max(0.0))
        .sum();
    record(4, (p.r() * w - gain).abs());

    let near_edge = !(FD_MARGIN..=1.0 - FD_MARGIN).contains(&pi)
        || boundaries(report)
            .iter()
            .any(|b| (pi - b).abs() < FD_MARGIN);
    if !near_edge {
        let gaps = [
            central_difference(|x| report.v_b(x), pi) - report.v_b_prime(pi),
            central_difference(|x| report.v_a(x), pi) - report.v_a_prime(pi),
            central_difference(|x| report.w(x), pi) - report.w_prime(pi),
        ];
        record(6, gaps.iter().fold(0.0_f64, |m, g| m.max(g.abs())));
    }

    record(7, va - vb);

    let near_boundary = boundaries(report)
        .iter()
        .any(|b| (pi - b).abs() < MEMBERSHIP_MARGIN);
    if !near_boundary {
        let mut mismatches = 0.0;
        for q in ProjectType::ALL {
            let inferred = report.v(q, pi) > w;
            if inferred != report.matching.contains(q, pi) {
                mismatches += 1.0;
            }
        }
        if report.matching.contains(ProjectType::A, pi)
            && !report.matching.contains(ProjectType::B, pi)
        {
            mismatches += 1.0;
        }
        record(9, mismatches);
    }

    if let Some(alpha) = report.alpha {
        if pi > alpha && pi < 1.0 && va > 0.0 {
            let ma = p.meeting_rate(ProjectType::A);
            let mb = p.meeting_rate(ProjectType::B);
            let ratio = vb / va;
            let lower = ma / (p.r() + ma);
            let upper = (p.r() + mb) / mb;
            record(10, (lower - ratio).max(ratio - upper));
        }
    }
    PointChecks(out)
}

/// One-sided derivative gaps at the free boundaries.
fn smooth_pasting(report: &SolveReport) -> Worst {
    let beta = report.beta;
    let mut worst = Worst::at(report.vb.derivative(beta).abs(), beta);
    if let (Some(alpha), VaFn::ClosedForm(va)) = (report.alpha, &report.va) {
        let left = report.w.scale_b * report.v_b_prime(alpha);
        let right = va.derivative(alpha);
        worst = worst.merge(Worst::at((right - left).abs(), alpha));
        let w_right = report.w.weight_a * right + report.w.weight_b * report.v_b_prime(alpha);
        worst = worst.merge(Worst::at((w_right - report.w_prime(alpha)).abs(), alpha));
    }
    worst
}

/// Most negative second difference of `v_b` over consecutive grid points
/// inside `(β, 1]`.
fn convexity(report: &SolveReport, grid: &[f64]) -> Worst {
    let inside: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&pi| pi > report.beta)
        .collect();
    inside
        .par_windows(3)
        .map(|w| {
            let (h0, h1) = (w[1] - w[0], w[2] - w[1]);
            let (v0, v1, v2) = (report.v_b(w[0]), report.v_b(w[1]), report.v_b(w[2]));
            // Divided difference scaled back to a uniform-grid second difference.
            let slope_jump = (v2 - v1) / h1 - (v1 - v0) / h0;
            Worst::at(-slope_jump * h0.min(h1), w[1])
        })
        .reduce(|| Worst::NONE, Worst::merge)
}

/// Uniform grid of `grid_n + 1` points with the boundaries inserted.
pub fn verification_grid(report: &SolveReport, grid_n: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=grid_n).map(|i| i as f64 / grid_n as f64).collect();
    grid.extend(boundaries(report));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Runs every check. Fails only on a grid smaller than [`MIN_GRID`];
/// violated conditions are reported, not raised.
pub fn check_all(report: &SolveReport, grid_n: usize) -> Result<VerificationReport> {
    if grid_n < MIN_GRID {
        return Err(Error::InvalidConfig(format!(
            "verification grid needs at least {MIN_GRID} intervals, got {grid_n}"
        )));
    }
    let grid = verification_grid(report, grid_n);
    let mut totals = grid
        .par_iter()
        .map(|&pi| point_checks(report, pi))
        .reduce(|| PointChecks([Worst::NONE; 11]), PointChecks::merge)
        .0;
    totals[5] = smooth_pasting(report);
    totals[8] = convexity(report, &grid);

    let checks: Vec<CheckOutcome> = CHECKS
        .iter()
        .zip(totals)
        .map(|(&(name, tolerance), worst)| CheckOutcome {
            name: name.to_string(),
            max_violation: worst.value,
            worst_pi: worst.pi,
            tolerance,
            passed: worst.value <= tolerance,
        })
        .collect();
    Ok(VerificationReport {
        grid_n,
        points: grid.len(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::{Belief, EconomyParams};
    use crate::learning::solve;

    fn learning_example() -> SolveReport {
        solve(&EconomyParams::learning_example()).unwrap()
    }

    fn shifted(report: &SolveReport, beta: f64, alpha: Option<f64>) -> SolveReport {
        SolveReport::assemble(
            &report.params,
            report.regime,
            Belief::new(beta).unwrap(),
            alpha.map(|a| Belief::new(a).unwrap()),
            None,
        )
    }

    #[test]
    fn generator_vanishes_at_zero() {
        let rep = learning_example();
        for q in ProjectType::ALL {
            assert_eq!(generator_apply(&rep, q, 0.0), 0.0);
        }
    }

    #[test]
    fn generator_at_one() {
        let rep = learning_example();
        let lb = rep.params.lambda_b();
        let expected = lb * (1.0 + rep.regime.w1 - rep.v_b(1.0));
        assert_eq!(generator_apply(&rep, ProjectType::B, 1.0), expected);
    }

    #[test]
    fn bellman_identity_on_continuation() {
        let rep = learning_example();
        for i in 1..=100 {
            let pi = rep.beta + (1.0 - rep.beta) * i as f64 / 100.0;
            assert!(superharmonic_residual(&rep, ProjectType::B, pi).abs() < 1e-8);
        }
    }

    #[test]
    fn stopping_region_residual_is_myopic_gain() {
        let rep = learning_example();
        let lb = rep.params.lambda_b();
        for pi in [0.0, 0.1, 0.2, rep.beta] {
            let res = superharmonic_residual(&rep, ProjectType::B, pi);
            let expected = lb * pi * (1.0 + rep.regime.w1) - rep.params.c();
            assert!((res - expected).abs() < 1e-14);
            assert!(res <= 1e-12);
        }
    }

    #[test]
    fn certifies_reference_solution() {
        let rep = learning_example();
        let ver = check_all(&rep, 10_000).unwrap();
        let failed: Vec<_> = ver.failures().collect();
        assert!(ver.passed, "{failed:?}");
        assert_eq!(ver.checks.len(), 11);
        assert_eq!(ver.points, 10_003);
    }

    #[test]
    fn certifies_high_cost_solution() {
        let p = EconomyParams::new(0.5, 1.05, 4.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        let rep = solve(&p).unwrap();
        let ver = check_all(&rep, 2000).unwrap();
        assert!(ver.passed, "{:?}", ver.failures().collect::<Vec<_>>());
        assert_eq!(ver.check("ratio_bounds").unwrap().worst_pi, None);
    }

    #[test]
    fn shifted_alpha_fails_smooth_pasting() {
        let rep = learning_example();
        let bad = shifted(&rep, rep.beta, rep.alpha.map(|a| a + 0.05));
        let ver = check_all(&bad, 2000).unwrap();
        assert!(!ver.check("smooth_pasting").unwrap().passed);
        assert!(!ver.passed);
    }

    #[test]
    fn every_small_boundary_shift_is_caught() {
        let rep = learning_example();
        let alpha = rep.alpha.unwrap();
        for d in [-1e-3, 1e-3] {
            let bad_beta = shifted(&rep, rep.beta + d, Some(alpha));
            assert!(
                !check_all(&bad_beta, 2000).unwrap().passed,
                "beta shift {d}"
            );
            let bad_alpha = shifted(&rep, rep.beta, Some(alpha + d));
            assert!(
                !check_all(&bad_alpha, 2000).unwrap().passed,
                "alpha shift {d}"
            );
        }
    }

    #[test]
    fn rejects_small_grid() {
        assert!(matches!(
            check_all(&learning_example(), 999),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn result_independent_of_thread_count() {
        let rep = learning_example();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| check_all(&rep, 3000).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}

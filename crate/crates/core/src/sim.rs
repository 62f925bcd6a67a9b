//! Monte Carlo simulation of a single agent's career under a threshold
//! policy.
//!
//! Each path draws the latent type once, then cycles through meetings,
//! matches and exits until discounting makes the remainder negligible.
//! Flow costs are integrated exactly between events, so there is no time
//! step.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::econ::belief::hitting_time_unchecked;
use crate::econ::{Belief, EconomyParams, ProjectType};
use crate::error::{Error, Result};
use crate::learning::SolveReport;

/// Accept (or keep) a `q`-match iff the belief is strictly above the
/// `q` threshold. A missing `a` threshold means `a`-projects are refused.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub threshold_a: Option<f64>,
    pub threshold_b: f64,
}

impl Policy {
    pub fn new(threshold_a: Option<f64>, threshold_b: f64) -> Result<Self> {
        let ok = |t: f64| t > 0.0 && t <= 1.0;
        if !ok(threshold_b) || threshold_a.is_some_and(|t| !ok(t)) {
            return Err(Error::InvalidConfig(format!(
                "thresholds must lie in (0, 1], got a = {threshold_a:?}, b = {threshold_b}"
            )));
        }
        Ok(Policy {
            threshold_a,
            threshold_b,
        })
    }

    /// The policy of a solved report: `b` above `β`, `a` above `α`.
    pub fn optimal(report: &SolveReport) -> Self {
        Policy {
            threshold_a: report.alpha,
            threshold_b: report.beta,
        }
    }

    /// Never matches: a threshold of one cannot be exceeded.
    pub fn reject_all() -> Self {
        Policy {
            threshold_a: None,
            threshold_b: 1.0,
        }
    }

    pub fn threshold(&self, q: ProjectType) -> Option<f64> {
        match q {
            ProjectType::A => self.threshold_a,
            ProjectType::B => Some(self.threshold_b),
        }
    }

    pub fn accepts(&self, q: ProjectType, pi: f64) -> bool {
        self.threshold(q).is_some_and(|t| pi > t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub pi0: Belief,
    pub n_paths: usize,
    pub seed: u64,
    /// Paths stop once the discount factor falls below this.
    pub eps: f64,
    pub max_events: usize,
}

impl SimConfig {
    pub fn new(pi0: f64, n_paths: usize, seed: u64) -> Result<Self> {
        let cfg = SimConfig {
            pi0: Belief::new(pi0)?,
            n_paths,
            seed,
            eps: 1e-10,
            max_events: 1_000_000,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "eps must lie in (0, 1), got {}",
                self.eps
            )));
        }
        if self.n_paths == 0 || self.max_events == 0 {
            return Err(Error::InvalidConfig(
                "n_paths and max_events must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub payoff: f64,
    pub high_type: bool,
    pub matches: u32,
    pub successes: u32,
    pub final_belief: f64,
    /// The path hit `max_events` before discounting closed it.
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub mean: f64,
    pub standard_error: f64,
    pub n_paths: usize,
    /// Upper bound on the payoff lost by truncating each path.
    pub truncation_bound: f64,
    pub exhausted_paths: usize,
    pub mean_matches: f64,
    pub mean_successes: f64,
    /// Share of paths whose latent type is high, with its standard error.
    pub high_type_fraction: f64,
    pub high_type_standard_error: f64,
    #[serde(skip)]
    pub paths: Vec<PathSummary>,
}

impl SimResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn write_paths_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        for p in &self.paths {
            wtr.serialize(p)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Pairwise summation, so totals do not depend on how paths were split
/// between workers.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        xs.iter().sum()
    } else {
        let (lo, hi) = xs.split_at(xs.len() / 2);
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

/// Mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Independent streams for path `index`: one for the type draw and the
/// meeting process, one for success times. Matching stream positions across
/// policies give common random numbers.
fn path_rngs(seed: u64, index: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut events = ChaCha8Rng::seed_from_u64(seed);
    events.set_stream(2 * index as u64);
    let mut successes = ChaCha8Rng::seed_from_u64(seed);
    successes.set_stream(2 * index as u64 + 1);
    (events, successes)
}

fn simulate_path(
    params: &EconomyParams,
    policy: &Policy,
    cfg: &SimConfig,
    index: usize,
) -> PathSummary {
    let (mut events, mut success_rng) = path_rngs(cfg.seed, index);
    let (r, c) = (params.r(), params.c());
    let high_type = events.random::<f64>() < cfg.pi0.value();
    let meet_rate = params.total_meeting_rate();
    let share_a = if meet_rate > 0.0 {
        params.meeting_rate(ProjectType::A) / meet_rate
    } else {
        0.0
    };

    let mut summary = PathSummary {
        payoff: 0.0,
        high_type,
        matches: 0,
        successes: 0,
        final_belief: cfg.pi0.value(),
        exhausted: false,
    };
    if meet_rate <= 0.0 {
        return summary;
    }
    let gap = Exp::new(meet_rate).expect("positive meeting rate");
    let mut belief = cfg.pi0.value();
    let mut t = 0.0;
    let mut count = 0usize;
    while (-r * t).exp() >= cfg.eps {
        if count >= cfg.max_events {
            summary.exhausted = true;
            break;
        }
        count += 1;
        t += gap.sample(&mut events);
        let q = if events.random::<f64>() < share_a {
            ProjectType::A
        } else {
            ProjectType::B
        };
        if !policy.accepts(q, belief) {
            continue;
        }
        let rate = q.rate(params);
        let threshold = policy
            .threshold(q)
            .expect("accepted types have a threshold");
        let exit = hitting_time_unchecked(belief, threshold, rate);
        let success = if high_type {
            Exp::new(rate)
                .expect("positive rate")
                .sample(&mut success_rng)
        } else {
            f64::INFINITY
        };
        let duration = success.min(exit);
        let start = (-r * t).exp();
        let end = (-r * (t + duration)).exp();
        summary.payoff -= c / r * (start - end);
        summary.matches += 1;
        if success < exit {
            summary.payoff += end;
            summary.successes += 1;
            belief = 1.0;
        } else {
            belief = threshold;
        }
        t += duration;
    }
    summary.final_belief = belief;
    summary
}

pub fn simulate(params: &EconomyParams, policy: &Policy, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let paths: Vec<PathSummary> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| simulate_path(params, policy, cfg, i))
        .collect();
    Ok(summarize(params, cfg, paths))
}

fn summarize(params: &EconomyParams, cfg: &SimConfig, paths: Vec<PathSummary>) -> SimResult {
    let column = |f: fn(&PathSummary) -> f64| paths.iter().map(f).collect::<Vec<_>>();
    let (mean, standard_error) = mean_and_se(&column(|p| p.payoff));
    let (high_type_fraction, high_type_standard_error) =
        mean_and_se(&column(|p| f64::from(u8::from(p.high_type))));
    let n = paths.len() as f64;
    SimResult {
        mean,
        standard_error,
        n_paths: paths.len(),
        truncation_bound: cfg.eps * (params.lambda_b() + params.c()) / params.r(),
        exhausted_paths: paths.iter().filter(|p| p.exhausted).count(),
        mean_matches: pairwise_sum(&column(|p| f64::from(p.matches))) / n,
        mean_successes: pairwise_sum(&column(|p| f64::from(p.successes))) / n,
        high_type_fraction,
        high_type_standard_error,
        paths,
    }
}

/// A threshold change applied to the optimal policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "by", rename_all = "snake_case")]
pub enum Perturbation {
    ShiftBeta(f64),
    ShiftAlpha(f64),
    DropA,
}

impl Perturbation {
    /// The perturbed policy, or `None` when a threshold would leave `(0, 1)`
    /// or there is no `a` threshold to shift.
    pub fn apply(&self, base: &Policy) -> Option<Policy> {
        let inside = |t: f64| (t > 0.0 && t < 1.0).then_some(t);
        match *self {
            Perturbation::ShiftBeta(d) => Some(Policy {
                threshold_b: inside(base.threshold_b + d)?,
                ..*base
            }),
            Perturbation::ShiftAlpha(d) => Some(Policy {
                threshold_a: Some(inside(base.threshold_a? + d)?),
                ..*base
            }),
            Perturbation::DropA => Some(Policy {
                threshold_a: None,
                ..*base
            }),
        }
    }

    /// `±d` shifts of both boundaries.
    pub fn symmetric_shifts(sizes: &[f64]) -> Vec<Perturbation> {
        sizes
            .iter()
            .flat_map(|&d| {
                [
                    Perturbation::ShiftBeta(-d),
                    Perturbation::ShiftBeta(d),
                    Perturbation::ShiftAlpha(-d),
                    Perturbation::ShiftAlpha(d),
                ]
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceRow {
    pub perturbation: Perturbation,
    pub policy: Policy,
    /// Mean of `perturbed - optimal` over paths.
    pub mean_difference: f64,
    pub standard_error: f64,
    /// The perturbed policy beats the optimal one by more than three
    /// standard errors.
    pub beats_optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceTable {
    pub optimal_mean: f64,
    pub optimal_standard_error: f64,
    pub rows: Vec<DominanceRow>,
    /// Perturbations that left the admissible range and were not run.
    pub skipped: Vec<Perturbation>,
}

impl DominanceTable {
    pub fn any_beats_optimal(&self) -> bool {
        self.rows.iter().any(|r| r.beats_optimal)
    }
}

/// Simulates each perturbed policy on the same random streams as the
/// optimal one and reports path-wise payoff differences.
pub fn policy_dominance(
    params: &EconomyParams,
    report: &SolveReport,
    perturbations: &[Perturbation],
    cfg: &SimConfig,
) -> Result<DominanceTable> {
    if *params != report.params {
        return Err(Error::ParamsMismatch);
    }
    let optimal = Policy::optimal(report);
    let base = simulate(params, &optimal, cfg)?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &perturbation in perturbations {
        let Some(policy) = perturbation.apply(&optimal) else {
            skipped.push(perturbation);
            continue;
        };
        let other = simulate(params, &policy, cfg)?;
        let diffs: Vec<f64> = other
            .paths
            .iter()
            .zip(&base.paths)
            .map(|(o, b)| o.payoff - b.payoff)
            .collect();
        let (mean_difference, standard_error) = mean_and_se(&diffs);
        rows.push(DominanceRow {
            perturbation,
            policy,
            mean_difference,
            standard_error,
            beats_optimal: mean_difference > 3.0 * standard_error,
        });
    }
    Ok(DominanceTable {
        optimal_mean: base.mean,
        optimal_standard_error: base.standard_error,
        rows,
        skipped,
    })
}

//! Benchmark without learning: beliefs stay fixed while matched, so every
//! value function is an explicit rational function of `π`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::econ::{classify_regime, EconomyParams, ProjectType, Regime, RegimeInfo};
use crate::error::{Error, Result};
use crate::learning::{self, write_curve};
use crate::roots::first_root;

pub const INDIFFERENCE_TOLERANCE: f64 = 1e-10;
const ALPHA_SCAN: usize = 256;
const ALPHA_TOLERANCE: f64 = 1e-13;

fn no_learning_tag() -> String {
    "no-learning".to_string()
}

/// Unmatched value when only `b`-projects are accepted.
pub fn w_b_branch(p: &EconomyParams, pi: f64) -> f64 {
    let (r, lb, c) = (p.r(), p.lambda_b(), p.c());
    let mb = p.meeting_rate(ProjectType::B);
    mb * (lb * pi - c) / (r * (r + lb * pi + mb))
}

/// Unmatched value when both project types are accepted.
pub fn w_ab_branch(p: &EconomyParams, pi: f64) -> f64 {
    let (r, la, lb, c) = (p.r(), p.lambda_a(), p.lambda_b(), p.c());
    let ma = p.meeting_rate(ProjectType::A);
    let mb = p.meeting_rate(ProjectType::B);
    let (ra, rb) = (r + la * pi, r + lb * pi);
    let num = mb * (lb * pi - c) * ra + ma * (la * pi - c) * rb;
    let den = ra * rb + mb * ra + ma * rb;
    num / (r * den)
}

/// `λa π - c - r ŵ_ab(π)`: positive exactly where `a`-projects are taken.
pub fn indifference(p: &EconomyParams, pi: f64) -> f64 {
    p.lambda_a() * pi - p.c() - p.r() * w_ab_branch(p, pi)
}

/// The closed-form quadratic root for `α̂`, read as
/// `(A + sqrt(D)) / (2 λa λb)`. Only used as a cross-check.
pub fn alpha_hat_quadratic(p: &EconomyParams) -> f64 {
    let (r, la, lb, c) = (p.r(), p.lambda_a(), p.lambda_b(), p.c());
    let mb = p.meeting_rate(ProjectType::B);
    let spread = mb * (lb - la);
    let a = c * lb - r * la + spread;
    let d = (r * la).powi(2) + 2.0 * r * la * (c * lb - spread) + (c * lb + spread).powi(2);
    (a + d.sqrt()) / (2.0 * la * lb)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkDiagnostics {
    /// `|λa α̂ - c - r ŵ_ab(α̂)|`.
    pub indifference_residual: Option<f64>,
    /// Root of the printed quadratic, for comparison with `alpha_hat`.
    pub alpha_hat_quadratic: Option<f64>,
    /// Jump of `ŵ` across `α̂`.
    pub w_gap_alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    #[serde(default = "no_learning_tag")]
    pub model: String,
    pub params: EconomyParams,
    pub regime: RegimeInfo,
    pub beta_hat: f64,
    pub alpha_hat: Option<f64>,
    pub diagnostics: BenchmarkDiagnostics,
}

pub fn solve_no_learning(params: &EconomyParams) -> Result<BenchmarkReport> {
    let regime = classify_regime(params);
    let beta_hat = params.c() / params.lambda_b();
    let alpha_hat = match regime.regime {
        Regime::HighCost => None,
        Regime::LowCost => {
            let root = first_root(
                "no-learning alpha",
                |pi| indifference(params, pi),
                beta_hat,
                1.0,
                ALPHA_SCAN,
                ALPHA_TOLERANCE,
            )?;
            Some(root.x)
        }
    };
    let diagnostics = BenchmarkDiagnostics {
        indifference_residual: alpha_hat.map(|a| indifference(params, a).abs()),
        alpha_hat_quadratic: alpha_hat.map(|_| alpha_hat_quadratic(params)),
        w_gap_alpha: alpha_hat.map(|a| (w_ab_branch(params, a) - w_b_branch(params, a)).abs()),
    };
    if let Some(res) = diagnostics.indifference_residual {
        if res > INDIFFERENCE_TOLERANCE {
            return Err(Error::Diagnostic {
                check: "indifference_residual",
                residual: res,
                tolerance: INDIFFERENCE_TOLERANCE,
            });
        }
    }
    Ok(BenchmarkReport {
        model: no_learning_tag(),
        params: *params,
        regime,
        beta_hat,
        alpha_hat,
        diagnostics,
    })
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn w(&self, pi: f64) -> f64 {
        if pi <= self.beta_hat {
            0.0
        } else if self.alpha_hat.is_some_and(|a| pi > a) {
            w_ab_branch(&self.params, pi)
        } else {
            w_b_branch(&self.params, pi)
        }
    }

    /// `max{ŵ, (λq π - c + λq π ŵ) / (r + λq π)}`.
    pub fn v(&self, q: ProjectType, pi: f64) -> f64 {
        let w = self.w(pi);
        let rate = q.rate(&self.params) * pi;
        let matched = (rate - self.params.c() + rate * w) / (self.params.r() + rate);
        w.max(matched)
    }

    /// Strict membership test `λq π - c > r ŵ(π)`.
    pub fn accepts(&self, q: ProjectType, pi: f64) -> bool {
        q.rate(&self.params) * pi - self.params.c() > self.params.r() * self.w(pi)
    }

    pub fn write_curve<W: Write>(&self, rows: usize, out: W) -> Result<()> {
        write_curve(rows, out, |pi| {
            [
                self.w(pi),
                self.v(ProjectType::A, pi),
                self.v(ProjectType::B, pi),
            ]
        })
    }
}

/// Learning boundaries next to their no-learning counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub beta: f64,
    pub beta_hat: f64,
    /// `β < β̂`: learning widens the `b`-section.
    pub beta_below_hat: bool,
    pub alpha: Option<f64>,
    pub alpha_hat: Option<f64>,
    /// `M̂_b ⊆ M_b`.
    pub m_b_contains_benchmark: bool,
    /// `M̂_a ⊆ M_a`, when both are non-empty.
    pub m_a_contains_benchmark: Option<bool>,
}

pub fn compare_learning(params: &EconomyParams) -> Result<Comparison> {
    let learn = learning::solve(params)?;
    let bench = solve_no_learning(params)?;
    Ok(Comparison {
        beta: learn.beta,
        beta_hat: bench.beta_hat,
        beta_below_hat: learn.beta < bench.beta_hat,
        alpha: learn.alpha,
        alpha_hat: bench.alpha_hat,
        m_b_contains_benchmark: learn.beta <= bench.beta_hat,
        m_a_contains_benchmark: learn.alpha.zip(bench.alpha_hat).map(|(a, ah)| a <= ah),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::ParamName;

    fn benchmark_example() -> BenchmarkReport {
        solve_no_learning(&EconomyParams::no_learning_example()).unwrap()
    }

    #[test]
    fn reference_constants() {
        let rep = benchmark_example();
        assert_eq!(rep.regime.regime, Regime::LowCost);
        assert_eq!(rep.beta_hat, 0.6 / 3.8);
        let alpha = rep.alpha_hat.unwrap();
        assert!((alpha - 0.648248).abs() < 1e-6, "alpha_hat = {alpha}");
    }

    #[test]
    fn indifference_sides_agree() {
        let rep = benchmark_example();
        let p = rep.params;
        let alpha = rep.alpha_hat.unwrap();
        let lhs = p.lambda_a() * alpha - p.c();
        let rhs = p.r() * w_ab_branch(&p, alpha);
        assert!((lhs - 0.372372).abs() < 1e-6);
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn quadratic_reading_reproduces_root() {
        let rep = benchmark_example();
        let gap = rep.diagnostics.alpha_hat_quadratic.unwrap() - rep.alpha_hat.unwrap();
        assert!(gap.abs() < 1e-10);
    }

    #[test]
    fn zero_at_lower_boundary() {
        let rep = benchmark_example();
        assert_eq!(rep.w(rep.beta_hat), 0.0);
        assert!(rep.v(ProjectType::B, rep.beta_hat).abs() < 1e-15);
        assert!(w_b_branch(&rep.params, rep.beta_hat).abs() < 1e-15);
    }

    #[test]
    fn w_continuous_at_alpha_hat() {
        let rep = benchmark_example();
        assert!(rep.diagnostics.w_gap_alpha.unwrap() < 1e-9);
    }

    #[test]
    fn membership_matches_value_comparison() {
        let rep = benchmark_example();
        for i in 0..=2000 {
            let pi = i as f64 / 2000.0;
            for q in ProjectType::ALL {
                let strict = rep.v(q, pi) > rep.w(pi);
                assert_eq!(rep.accepts(q, pi), strict, "q = {q}, pi = {pi}");
            }
            if rep.accepts(ProjectType::A, pi) {
                assert!(rep.accepts(ProjectType::B, pi));
            }
        }
    }

    #[test]
    fn value_has_kink_at_lower_boundary() {
        let rep = benchmark_example();
        let h = 1e-6;
        let b = rep.beta_hat;
        let v = |pi| rep.v(ProjectType::B, pi);
        let left = (v(b) - v(b - h)) / h;
        let right = (v(b + h) - v(b)) / h;
        assert!((right - left).abs() > 1e-5, "left {left}, right {right}");
    }

    #[test]
    fn high_cost_has_no_a_section() {
        let p = EconomyParams::new(0.5, 1.05, 4.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        let rep = solve_no_learning(&p).unwrap();
        assert_eq!(rep.alpha_hat, None);
        assert!(!rep.accepts(ProjectType::A, 1.0));
    }

    #[test]
    fn learning_lowers_beta() {
        let cmp = compare_learning(&EconomyParams::learning_example()).unwrap();
        assert!((cmp.beta - 0.334252).abs() < 1e-6);
        assert!((cmp.beta_hat - 0.4).abs() < 1e-15);
        assert!(cmp.beta_below_hat);
        assert!(cmp.m_b_contains_benchmark);
    }

    #[test]
    fn no_meetings_equalize_beta() {
        let p = EconomyParams::learning_example()
            .with(ParamName::Kappa, 0.0)
            .unwrap();
        let cmp = compare_learning(&p).unwrap();
        assert!((cmp.beta - cmp.beta_hat).abs() < 1e-15);
        assert!(!cmp.beta_below_hat);
    }

    #[test]
    fn json_carries_model_tag() {
        let rep = benchmark_example();
        let value: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(value["model"], "no-learning");
        assert_eq!(BenchmarkReport::from_json(&rep.to_json()).unwrap(), rep);
    }
}

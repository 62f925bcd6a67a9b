//! Optimal selection policy of the learning model.
//!
//! The solution is assembled in closed form:
//!
//! 1. classify the cost regime and read off `w(1)`;
//! 2. `β = c / (λb (1 + w(1)))`, the point where `v_b` pastes smoothly onto zero;
//! 3. `v_b` on `(β, 1]`, from value matching and smooth pasting at `β`;
//! 4. in the low-cost regime, `α` as the smallest fixed point of
//!    `α = [r λb c + κφb (λb - λa)(c + r v_b(α))] / [r λb λa (1 + w(1))]`;
//! 5. `v_a` on `(α, 1]` by value matching against `κφb/(r+κφb) · v_b`;
//! 6. the reputation value `w` from the unmatched-state Bellman equation.
//!
//! Continuation intervals are open at their lower end: evaluating exactly at
//! `β` or `α` uses the stopping branch.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::econ::{classify_regime, Belief, EconomyParams, ProjectType, Regime, RegimeInfo};
use crate::error::{Error, Result};
use crate::roots::first_root;
use crate::value_fn::ValueFn;

pub const BETA_TOLERANCE: f64 = 1e-12;
pub const ALPHA_TOLERANCE: f64 = 1e-12;
pub const ALPHA_RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const DERIVATIVE_TOLERANCE: f64 = 1e-8;
pub const JUNCTION_TOLERANCE: f64 = 1e-9;

/// Distance kept from `1` when bracketing `α`.
const ALPHA_MARGIN: f64 = 1e-9;
const ALPHA_SCAN: usize = 256;

/// Continuation interval `(lower, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
}

impl Interval {
    pub fn contains(&self, pi: f64) -> bool {
        pi > self.lower && pi <= 1.0
    }
}

/// Sections of the matching set: the beliefs at which each project type is
/// accepted (or kept).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingSet {
    pub m_a: Option<Interval>,
    pub m_b: Interval,
}

impl MatchingSet {
    pub fn section(&self, q: ProjectType) -> Option<Interval> {
        match q {
            ProjectType::A => self.m_a,
            ProjectType::B => Some(self.m_b),
        }
    }

    pub fn contains(&self, q: ProjectType, pi: f64) -> bool {
        self.section(q).is_some_and(|s| s.contains(pi))
    }
}

/// Matched value of an `a`-project.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VaFn {
    /// Low cost: closed form on `(α, 1]`, equal to `w` below.
    ClosedForm(ValueFn),
    /// High cost: `scale · v_b` everywhere.
    ScaledB { scale: f64 },
}

/// Piecewise description of the reputation value `w`:
///
/// * `0` on `[0, β]`,
/// * `scale_b · v_b` on `(β, α]` (on `(β, 1]` without `α`),
/// * `weight_a · v_a + weight_b · v_b` on `(α, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReputationFn {
    pub beta: f64,
    pub alpha: Option<f64>,
    pub scale_b: f64,
    pub weight_a: f64,
    pub weight_b: f64,
}

/// Residuals recorded while assembling a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `λb β (1 + w(1)) - c`.
    pub beta_residual: f64,
    /// `|α - map(α)|`.
    pub alpha_residual: Option<f64>,
    pub alpha_iterations: Option<usize>,
    /// `|v_a'(α+) - scale_b v_b'(α)|`.
    pub va_derivative_gap: Option<f64>,
    /// Jump of `w` across `β`.
    pub w_gap_beta: f64,
    /// Jump of `w` across `α`.
    pub w_gap_alpha: Option<f64>,
    /// `|w(1) - w1|`: the assembled `w` reproduces the regime value.
    pub w1_closure: f64,
}

impl Diagnostics {
    pub fn ensure(&self) -> Result<()> {
        let check = |name, residual: f64, tolerance| {
            if residual.abs() <= tolerance {
                Ok(())
            } else {
                Err(Error::Diagnostic {
                    check: name,
                    residual: residual.abs(),
                    tolerance,
                })
            }
        };
        check("beta_residual", self.beta_residual, BETA_TOLERANCE)?;
        if let Some(res) = self.alpha_residual {
            check("alpha_residual", res, ALPHA_RESIDUAL_TOLERANCE)?;
        }
        if let Some(gap) = self.va_derivative_gap {
            check("va_derivative_gap", gap, DERIVATIVE_TOLERANCE)?;
        }
        check("w_gap_beta", self.w_gap_beta, JUNCTION_TOLERANCE)?;
        if let Some(gap) = self.w_gap_alpha {
            check("w_gap_alpha", gap, JUNCTION_TOLERANCE)?;
        }
        check("w1_closure", self.w1_closure, JUNCTION_TOLERANCE)
    }
}

fn learning_tag() -> String {
    "learning".to_string()
}

/// The optimal tuple `(w*, v*, M*)` of the learning model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    #[serde(default = "learning_tag")]
    pub model: String,
    pub params: EconomyParams,
    pub regime: RegimeInfo,
    pub beta: f64,
    pub alpha: Option<f64>,
    pub vb: ValueFn,
    pub va: VaFn,
    pub w: ReputationFn,
    pub matching: MatchingSet,
    pub diagnostics: Diagnostics,
}

/// `c / (λb (1 + w(1)))`.
pub fn solve_beta(params: &EconomyParams, regime: &RegimeInfo) -> Belief {
    let beta = params.c() / (params.lambda_b() * (1.0 + regime.w1));
    Belief::new(beta).expect("c < lambda_b keeps beta inside (0, 1)")
}

/// `v_b` with value matching and smooth pasting onto zero at `β`.
pub fn build_vb(params: &EconomyParams, regime: &RegimeInfo, beta: Belief) -> ValueFn {
    let (r, c) = (params.r(), params.c());
    let mut vb = ValueFn::particular(r, c, params.lambda_b(), regime.w1, beta.value());
    vb.gamma = c / r - vb.p1 * beta.value();
    vb
}

/// `κφb / (r + κφb)`: weight of `v_b` in `w` where only `b` is accepted.
pub fn scale_b(params: &EconomyParams) -> f64 {
    let mb = params.meeting_rate(ProjectType::B);
    mb / (params.r() + mb)
}

fn vb_at(vb: &ValueFn, pi: f64) -> f64 {
    if pi > vb.x_low {
        vb.eval(pi)
    } else {
        0.0
    }
}

/// Right-hand side of the fixed-point equation for `α`.
pub fn alpha_map(params: &EconomyParams, regime: &RegimeInfo, vb: &ValueFn, alpha: f64) -> f64 {
    let (r, la, lb, c) = (params.r(), params.lambda_a(), params.lambda_b(), params.c());
    let mb = params.meeting_rate(ProjectType::B);
    let num = r * lb * c + mb * (lb - la) * (c + r * vb_at(vb, alpha));
    num / (r * lb * la * (1.0 + regime.w1))
}

/// Smallest fixed point of [`alpha_map`] in `(β, 1)`, or `None` in the high
/// cost regime. Also returns the refinement iteration count.
pub fn solve_alpha(
    params: &EconomyParams,
    regime: &RegimeInfo,
    vb: &ValueFn,
) -> Result<Option<(Belief, usize)>> {
    if regime.regime == Regime::HighCost {
        return Ok(None);
    }
    let beta = vb.x_low;
    let g = |a: f64| a - alpha_map(params, regime, vb, a);
    // Identical project rates collapse the map to the constant β.
    if (params.lambda_b() - params.lambda_a()).abs() == 0.0 || g(beta) >= 0.0 {
        return Ok(Some((Belief::new(beta)?, 0)));
    }
    let root = first_root(
        "alpha fixed point",
        g,
        beta,
        1.0 - ALPHA_MARGIN,
        ALPHA_SCAN,
        ALPHA_TOLERANCE,
    )?;
    Ok(Some((Belief::new(root.x)?, root.iterations)))
}

fn va_closed_form(
    params: &EconomyParams,
    regime: &RegimeInfo,
    alpha: f64,
    vb: &ValueFn,
) -> ValueFn {
    let (r, c) = (params.r(), params.c());
    let mut va = ValueFn::particular(r, c, params.lambda_a(), regime.w1, alpha);
    va.gamma = scale_b(params) * vb_at(vb, alpha) - va.affine(alpha);
    va
}

/// `|v_a'(α+) - scale_b v_b'(α)|` for a closed-form `v_a`.
fn va_derivative_gap(params: &EconomyParams, va: &ValueFn, vb: &ValueFn) -> f64 {
    let alpha = va.x_low;
    let vb_slope = if alpha > vb.x_low {
        vb.derivative(alpha)
    } else {
        0.0
    };
    (va.derivative(alpha) - scale_b(params) * vb_slope).abs()
}

/// `v_a`: closed form fixed by value matching at `α` (low cost), or the
/// scaled `v_b` (high cost). The derivative match at `α` is checked, not
/// imposed.
pub fn build_va(
    params: &EconomyParams,
    regime: &RegimeInfo,
    alpha: Option<Belief>,
    vb: &ValueFn,
) -> Result<VaFn> {
    match alpha {
        None => Ok(VaFn::ScaledB {
            scale: scale_b(params),
        }),
        Some(alpha) => {
            let va = va_closed_form(params, regime, alpha.value(), vb);
            let gap = va_derivative_gap(params, &va, vb);
            if gap > DERIVATIVE_TOLERANCE {
                return Err(Error::Diagnostic {
                    check: "va_derivative_gap",
                    residual: gap,
                    tolerance: DERIVATIVE_TOLERANCE,
                });
            }
            Ok(VaFn::ClosedForm(va))
        }
    }
}

/// Descriptor of `w` for the given boundaries.
pub fn build_w(params: &EconomyParams, beta: Belief, alpha: Option<Belief>) -> ReputationFn {
    let r = params.r();
    let ma = params.meeting_rate(ProjectType::A);
    let mb = params.meeting_rate(ProjectType::B);
    ReputationFn {
        beta: beta.value(),
        alpha: alpha.map(Belief::value),
        scale_b: scale_b(params),
        weight_a: ma / (r + ma + mb),
        weight_b: mb / (r + ma + mb),
    }
}

/// Solves the learning model.
pub fn solve(params: &EconomyParams) -> Result<SolveReport> {
    let regime = classify_regime(params);
    let beta = solve_beta(params, &regime);
    let vb = build_vb(params, &regime, beta);
    let alpha = solve_alpha(params, &regime, &vb)?;
    build_va(params, &regime, alpha.map(|(a, _)| a), &vb)?;
    let report = SolveReport::assemble(
        params,
        regime,
        beta,
        alpha.map(|(a, _)| a),
        alpha.map(|(_, n)| n),
    );
    report.diagnostics.ensure()?;
    Ok(report)
}

impl SolveReport {
    /// Builds the value functions for the given boundaries without checking
    /// that they are optimal. [`solve`] calls this with the optimal
    /// boundaries; passing perturbed ones yields a report the verifier
    /// should reject.
    pub fn assemble(
        params: &EconomyParams,
        regime: RegimeInfo,
        beta: Belief,
        alpha: Option<Belief>,
        alpha_iterations: Option<usize>,
    ) -> SolveReport {
        let vb = build_vb(params, &regime, beta);
        let (va, va_gap) = match alpha {
            Some(a) => {
                let va = va_closed_form(params, &regime, a.value(), &vb);
                let gap = va_derivative_gap(params, &va, &vb);
                (VaFn::ClosedForm(va), Some(gap))
            }
            None => (
                VaFn::ScaledB {
                    scale: scale_b(params),
                },
                None,
            ),
        };
        let w = build_w(params, beta, alpha);
        let matching = MatchingSet {
            m_a: alpha.map(|a| Interval { lower: a.value() }),
            m_b: Interval {
                lower: beta.value(),
            },
        };
        let mut report = SolveReport {
            model: learning_tag(),
            params: *params,
            regime,
            beta: beta.value(),
            alpha: alpha.map(Belief::value),
            vb,
            va,
            w,
            matching,
            diagnostics: Diagnostics {
                beta_residual: 0.0,
                alpha_residual: None,
                alpha_iterations,
                va_derivative_gap: va_gap,
                w_gap_beta: 0.0,
                w_gap_alpha: None,
                w1_closure: 0.0,
            },
        };
        let beta_residual = params.lambda_b() * report.beta * (1.0 + regime.w1) - params.c();
        let alpha_residual = report
            .alpha
            .map(|a| (a - alpha_map(params, &regime, &report.vb, a)).abs());
        let w_gap_beta = (report.w.scale_b * report.vb.eval(report.beta)).abs();
        let w_gap_alpha = report.alpha.map(|a| {
            let inner = report.w.scale_b * vb_at(&report.vb, a);
            (report.w_mixed(a) - inner).abs()
        });
        let w1_closure = (report.w(1.0) - regime.w1).abs();
        let d = &mut report.diagnostics;
        d.beta_residual = beta_residual;
        d.alpha_residual = alpha_residual;
        d.w_gap_beta = w_gap_beta;
        d.w_gap_alpha = w_gap_alpha;
        d.w1_closure = w1_closure;
        report
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `w` on the `(α, 1]` branch, evaluated with the closed forms.
    fn w_mixed(&self, pi: f64) -> f64 {
        let va = match &self.va {
            VaFn::ClosedForm(v) => v.eval(pi),
            VaFn::ScaledB { scale } => scale * vb_at(&self.vb, pi),
        };
        self.w.weight_a * va + self.w.weight_b * vb_at(&self.vb, pi)
    }

    fn in_a_section(&self, pi: f64) -> bool {
        self.alpha.is_some_and(|a| pi > a)
    }

    /// Matched value of a `b`-project.
    pub fn v_b(&self, pi: f64) -> f64 {
        vb_at(&self.vb, pi)
    }

    pub fn v_b_prime(&self, pi: f64) -> f64 {
        if pi > self.beta {
            self.vb.derivative(pi)
        } else {
            0.0
        }
    }

    /// Matched value of an `a`-project.
    pub fn v_a(&self, pi: f64) -> f64 {
        match &self.va {
            VaFn::ClosedForm(v) if pi > v.x_low => v.eval(pi),
            VaFn::ClosedForm(_) => self.w(pi),
            VaFn::ScaledB { scale } => scale * self.v_b(pi),
        }
    }

    pub fn v_a_prime(&self, pi: f64) -> f64 {
        match &self.va {
            VaFn::ClosedForm(v) if pi > v.x_low => v.derivative(pi),
            VaFn::ClosedForm(_) => self.w_prime(pi),
            VaFn::ScaledB { scale } => scale * self.v_b_prime(pi),
        }
    }

    pub fn v(&self, q: ProjectType, pi: f64) -> f64 {
        match q {
            ProjectType::A => self.v_a(pi),
            ProjectType::B => self.v_b(pi),
        }
    }

    pub fn v_prime(&self, q: ProjectType, pi: f64) -> f64 {
        match q {
            ProjectType::A => self.v_a_prime(pi),
            ProjectType::B => self.v_b_prime(pi),
        }
    }

    /// Reputation value: the value of being unmatched at belief `pi`.
    pub fn w(&self, pi: f64) -> f64 {
        if pi <= self.beta {
            0.0
        } else if self.in_a_section(pi) {
            self.w_mixed(pi)
        } else {
            self.w.scale_b * self.v_b(pi)
        }
    }

    pub fn w_prime(&self, pi: f64) -> f64 {
        if pi <= self.beta {
            0.0
        } else if self.in_a_section(pi) {
            let va_slope = match &self.va {
                VaFn::ClosedForm(v) => v.derivative(pi),
                VaFn::ScaledB { scale } => scale * self.v_b_prime(pi),
            };
            self.w.weight_a * va_slope + self.w.weight_b * self.v_b_prime(pi)
        } else {
            self.w.scale_b * self.v_b_prime(pi)
        }
    }

    /// Writes `rows` evenly spaced samples of `(pi, w, v_a, v_b)` as CSV.
    pub fn write_curve<W: Write>(&self, rows: usize, out: W) -> Result<()> {
        write_curve(rows, out, |pi| [self.w(pi), self.v_a(pi), self.v_b(pi)])
    }
}

pub(crate) fn write_curve<W, F>(rows: usize, out: W, eval: F) -> Result<()>
where
    W: Write,
    F: Fn(f64) -> [f64; 3],
{
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["pi", "w", "v_a", "v_b"])?;
    for i in 0..rows {
        let pi = if rows == 1 {
            1.0
        } else {
            i as f64 / (rows - 1) as f64
        };
        let [w, va, vb] = eval(pi);
        wtr.write_record([pi, w, va, vb].iter().map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

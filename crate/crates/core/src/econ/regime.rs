use std::fmt;

use serde::{Deserialize, Serialize};

use super::EconomyParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// At maximal reputation an `a`-project beats waiting for a `b`-project.
    LowCost,
    /// `a`-projects are never worth taking.
    HighCost,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::LowCost => f.write_str("low_cost"),
            Regime::HighCost => f.write_str("high_cost"),
        }
    }
}

/// Cost regime together with `w(1)`, the value of holding reputation one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeInfo {
    pub regime: Regime,
    pub w1: f64,
}

/// `w(1)` when only `b`-projects are accepted at reputation one.
pub fn high_cost_w1(p: &EconomyParams) -> f64 {
    let (r, lb, c) = (p.r(), p.lambda_b(), p.c());
    let mb = p.kappa() * p.phi_b();
    mb * (lb - c) / (r + mb + lb) / r
}

/// `w(1)` when both project types are accepted at reputation one.
pub fn low_cost_w1(p: &EconomyParams) -> f64 {
    let (r, la, lb, c) = (p.r(), p.lambda_a(), p.lambda_b(), p.c());
    let ma = p.kappa() * p.phi_a();
    let mb = p.kappa() * p.phi_b();
    let num = mb * (lb - c) * (r + la) + ma * (la - c) * (r + lb);
    let den = (r + la) * (r + lb) + mb * (r + la) + ma * (r + lb);
    num / den / r
}

/// `λa - c - r w_b(1)`: positive in the low-cost regime.
pub fn regime_margin(p: &EconomyParams) -> f64 {
    p.lambda_a() - p.c() - p.r() * high_cost_w1(p)
}

/// Low cost iff `λa - c > r w_b(1)`; the knife edge counts as high cost.
pub fn classify_regime(p: &EconomyParams) -> RegimeInfo {
    let w1_b = high_cost_w1(p);
    if p.lambda_a() - p.c() > p.r() * w1_b {
        RegimeInfo {
            regime: Regime::LowCost,
            w1: low_cost_w1(p),
        }
    } else {
        RegimeInfo {
            regime: Regime::HighCost,
            w1: w1_b,
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Posterior probability that the agent is the high type.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Belief(f64);

impl Belief {
    pub const ZERO: Belief = Belief(0.0);
    pub const ONE: Belief = Belief(1.0);

    pub fn new(pi: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&pi) {
            Ok(Belief(pi))
        } else {
            Err(Error::InvalidBelief(pi))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    fn is_interior(self) -> bool {
        self.0 > 0.0 && self.0 < 1.0
    }
}

impl TryFrom<f64> for Belief {
    type Error = Error;

    fn try_from(pi: f64) -> Result<Self> {
        Belief::new(pi)
    }
}

impl From<Belief> for f64 {
    fn from(b: Belief) -> f64 {
        b.0
    }
}

/// Closed-form solution of `dπ = -π(1-π) λ dt` over `t`: the odds of being
/// the high type shrink by `exp(-λ t)` while no success arrives.
pub fn belief_decay(pi0: Belief, rate: f64, t: f64) -> Belief {
    Belief(decay(pi0.0, rate, t))
}

pub(crate) fn decay(pi: f64, rate: f64, t: f64) -> f64 {
    if pi <= 0.0 || pi >= 1.0 {
        return pi;
    }
    let shrink = (-rate * t).exp();
    let num = pi * shrink;
    num / ((1.0 - pi) + num)
}

/// Time for the belief to decay from `pi0` to `target` while matched to a
/// project with success rate `rate`.
///
/// Both endpoints must be interior and `target <= pi0`; the endpoints 0 and
/// 1 are absorbing and would need an infinite wait.
pub fn hitting_time(pi0: Belief, target: Belief, rate: f64) -> Result<f64> {
    let err = |reason| Error::HittingTime {
        from: pi0.0,
        target: target.0,
        reason,
    };
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(err("rate must be positive"));
    }
    if !pi0.is_interior() || !target.is_interior() {
        return Err(err("beliefs 0 and 1 are absorbing"));
    }
    if target.0 > pi0.0 {
        return Err(err("belief only decays absent a success"));
    }
    Ok(hitting_time_unchecked(pi0.0, target.0, rate))
}

pub(crate) fn hitting_time_unchecked(pi0: f64, target: f64, rate: f64) -> f64 {
    let log_odds = |p: f64| p.ln() - (-p).ln_1p();
    ((log_odds(pi0) - log_odds(target)) / rate).max(0.0)
}

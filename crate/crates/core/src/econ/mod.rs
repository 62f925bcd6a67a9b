//! Model primitives shared by every solver: the economy's parameters, the
//! belief process and the cost-regime classification.

pub(crate) mod belief;
mod params;
mod regime;

pub use belief::{belief_decay, hitting_time, Belief};
pub use params::{EconomyParams, ParamName, ProjectType};
pub use regime::{classify_regime, high_cost_w1, low_cost_w1, regime_margin, Regime, RegimeInfo};

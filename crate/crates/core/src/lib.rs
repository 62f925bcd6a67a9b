//! Reputation and matching under learning about an agent's type.
//!
//! An agent of unknown ability is matched with projects of two types. The
//! crate solves the optimal matching policy in closed form, solves the
//! no-learning benchmark, verifies candidate solutions against the
//! variational inequality, cross-checks them with a grid value-iteration
//! oracle and a Monte Carlo simulator, and runs parameter sweeps.

pub mod econ;
pub mod error;
pub mod learning;
pub mod no_learning;
pub mod oracle;
mod roots;
pub mod sim;
pub mod sweep;
pub mod value_fn;
pub mod verify;

pub use econ::{
    belief_decay, classify_regime, hitting_time, regime_margin, Belief, EconomyParams, ParamName,
    ProjectType, Regime, RegimeInfo,
};
pub use error::{Error, Result};
pub use learning::{solve, MatchingSet, SolveReport};
pub use no_learning::{compare_learning, solve_no_learning, BenchmarkReport, Comparison};
pub use oracle::{value_iteration, GridSolution, OracleComparison, OracleConfig};
pub use sim::{policy_dominance, simulate, Perturbation, Policy, SimConfig, SimResult};
pub use sweep::{detect_shape, run_sweep, Shape, ShapeVerdict, SweepModel, SweepSpec};
pub use value_fn::ValueFn;
pub use verify::{check_all, VerificationReport};

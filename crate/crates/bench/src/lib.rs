//! Shared inputs for the criterion benchmarks.

use repmatch_core::EconomyParams;

/// The reference low-cost economy and a high-cost one.
pub fn economies() -> [(&'static str, EconomyParams); 2] {
    [
        ("low_cost", EconomyParams::learning_example()),
        (
            "high_cost",
            EconomyParams::new(0.5, 1.05, 4.0, 1.0, 2.0, 1.0, 1.0).expect("valid"),
        ),
    ]
}

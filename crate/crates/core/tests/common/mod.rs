#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repmatch_core::{classify_regime, regime_margin, EconomyParams, Regime};

pub const SAMPLE_SEED: u64 = 20_240_611;

/// Valid economies at least 5% (relative) away from the regime knife edge,
/// `per_regime` of each regime, in a fixed order.
pub fn sampled_params(per_regime: usize) -> Vec<EconomyParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let (mut low, mut high) = (Vec::new(), Vec::new());
    while low.len() < per_regime || high.len() < per_regime {
        let p = draw(&mut rng);
        let gap = p.lambda_a() - p.c();
        if regime_margin(&p).abs() < 0.05 * gap {
            continue;
        }
        let bucket = match classify_regime(&p).regime {
            Regime::LowCost => &mut low,
            Regime::HighCost => &mut high,
        };
        if bucket.len() < per_regime {
            bucket.push(p);
        }
    }
    low.into_iter().chain(high).collect()
}

fn draw(rng: &mut ChaCha8Rng) -> EconomyParams {
    let r = rng.random_range(0.05..1.5);
    let c = rng.random_range(0.1..1.5);
    let lambda_a = c + rng.random_range(0.05..1.5);
    let lambda_b = lambda_a + rng.random_range(0.1..3.0);
    let kappa = rng.random_range(0.05..3.0);
    let phi_a = rng.random_range(0.05..3.0);
    let phi_b = rng.random_range(0.05..3.0);
    EconomyParams::new(r, lambda_a, lambda_b, c, kappa, phi_a, phi_b)
        .expect("valid by construction")
}

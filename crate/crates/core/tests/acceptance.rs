//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use repmatch_core::oracle::compare;
use repmatch_core::sweep::{alpha_kappa_shape, column, Column, UShapeWitness};
use repmatch_core::{
    check_all, compare_learning, policy_dominance, run_sweep, simulate, solve, solve_no_learning,
    value_iteration, EconomyParams, OracleConfig, ParamName, Perturbation, Policy, Regime, Shape,
    SimConfig, SweepModel, SweepSpec,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure(
        (got - want).abs() <= tol,
        format!("{name} = {got}, expected {want} +/- {tol}"),
    )
}

fn learning_constants() -> Outcome {
    let rep = solve(&EconomyParams::learning_example()).map_err(|e| e.to_string())?;
    ensure(
        rep.regime.regime == Regime::LowCost,
        "regime is not low cost",
    )?;
    let alpha = rep.alpha.ok_or("alpha absent")?;
    close("w(1)", rep.regime.w1, 0.1967, 1e-4)?;
    close("beta", rep.beta, 0.334252, 1e-4)?;
    close("alpha", alpha, 0.646471, 1e-4)?;
    close("v_b(alpha)", rep.v_b(alpha), 0.170859, 1e-4)?;
    Ok(format!(
        "w1 = {:.6}, beta = {:.6}, alpha = {alpha:.6}, v_b(alpha) = {:.6}",
        rep.regime.w1,
        rep.beta,
        rep.v_b(alpha)
    ))
}

/// `ŵ_ab` written out again, independently of the library.
fn w_ab_reference(p: &EconomyParams, x: f64) -> f64 {
    let (r, la, lb, c) = (p.r(), p.lambda_a(), p.lambda_b(), p.c());
    let (ka, kb) = (p.kappa() * p.phi_a(), p.kappa() * p.phi_b());
    let num = kb * (lb * x - c) * (r + la * x) + ka * (la * x - c) * (r + lb * x);
    let den = (r + la * x) * (r + lb * x) + kb * (r + la * x) + ka * (r + lb * x);
    num / (r * den)
}

fn benchmark_constants() -> Outcome {
    let p = EconomyParams::no_learning_example();
    let rep = solve_no_learning(&p).map_err(|e| e.to_string())?;
    let alpha = rep.alpha_hat.ok_or("alpha_hat absent")?;
    close("beta_hat", rep.beta_hat, 0.157895, 1e-6)?;
    close("alpha_hat", alpha, 0.648248, 1e-4)?;
    let residual = (p.lambda_a() * alpha - p.c() - p.r() * w_ab_reference(&p, alpha)).abs();
    ensure(
        residual < 1e-6,
        format!("indifference residual {residual:e}"),
    )?;
    Ok(format!(
        "beta_hat = {:.6}, alpha_hat = {alpha:.6}, residual = {residual:.1e}",
        rep.beta_hat
    ))
}

fn verifier_certification() -> Outcome {
    let mut sets = vec![EconomyParams::learning_example()];
    sets.extend(common::sampled_params(10));
    for (i, p) in sets.iter().enumerate() {
        let rep = solve(p).map_err(|e| format!("set {i}: {e}"))?;
        let ver = check_all(&rep, 10_000).map_err(|e| e.to_string())?;
        ensure(ver.points >= 10_001, "grid too small")?;
        let first_failure = ver.failures().next().cloned();
        if let Some(fail) = first_failure {
            return Err(format!(
                "set {i} ({p:?}): {} violation {:e} at pi = {:?}",
                fail.name, fail.max_violation, fail.worst_pi
            ));
        }
    }
    Ok(format!(
        "{} parameter sets certified (10 low cost, 10 high cost, plus the reference case)",
        sets.len()
    ))
}

fn oracle_equivalence() -> Outcome {
    let p = EconomyParams::learning_example();
    let rep = solve(&p).map_err(|e| e.to_string())?;
    let run = |n_grid, dt| {
        let cfg = OracleConfig {
            n_grid,
            dt,
            ..OracleConfig::default()
        };
        let grid = value_iteration(&p, cfg).map_err(|e| e.to_string())?;
        compare(&grid, &rep).map_err(|e| e.to_string())
    };
    let coarse = run(4000, 1e-3)?;
    let fine = run(8000, 5e-4)?;
    ensure(
        coarse.max_sup_error() < 1e-2,
        format!("sup error {:e}", coarse.max_sup_error()),
    )?;
    let beta_cells = coarse.beta_cells.ok_or("no numeric beta")?;
    let alpha_cells = coarse.alpha_cells.ok_or("no numeric alpha")?;
    ensure(
        beta_cells <= 1.0,
        format!("beta off by {beta_cells:.2} cells"),
    )?;
    ensure(
        alpha_cells <= 1.0,
        format!("alpha off by {alpha_cells:.2} cells"),
    )?;
    let ratios = [
        coarse.sup_error_w / fine.sup_error_w,
        coarse.sup_error_va / fine.sup_error_va,
        coarse.sup_error_vb / fine.sup_error_vb,
    ];
    ensure(
        ratios.iter().all(|&r| r >= 1.5),
        format!("refinement ratios {ratios:?}"),
    )?;
    Ok(format!(
        "errors W {:.2e}, V_a {:.2e}, V_b {:.2e}; beta {beta_cells:.2} cells, alpha {alpha_cells:.2} cells; refinement ratios {:.2}/{:.2}/{:.2}",
        coarse.sup_error_w, coarse.sup_error_va, coarse.sup_error_vb, ratios[0], ratios[1], ratios[2]
    ))
}

fn monte_carlo() -> Outcome {
    let p = EconomyParams::learning_example();
    let rep = solve(&p).map_err(|e| e.to_string())?;
    let policy = Policy::optimal(&rep);
    let mut parts = Vec::new();
    for pi0 in [0.4, 0.6, 0.8, 1.0] {
        let cfg = SimConfig::new(pi0, 100_000, 42).map_err(|e| e.to_string())?;
        let res = simulate(&p, &policy, &cfg).map_err(|e| e.to_string())?;
        let target = rep.w(pi0);
        let z = (res.mean - target) / res.standard_error;
        ensure(
            z.abs() <= 3.0,
            format!("pi0 = {pi0}: mean {} vs w* {target}, z = {z:.2}", res.mean),
        )?;
        ensure(
            res.standard_error < 0.01,
            format!("SE {} at pi0 = {pi0}", res.standard_error),
        )?;
        parts.push(format!("z({pi0}) = {z:+.2}"));
    }
    let cfg = SimConfig::new(0.8, 100_000, 42).map_err(|e| e.to_string())?;
    let shifts = Perturbation::symmetric_shifts(&[0.05, 0.10]);
    let table = policy_dominance(&p, &rep, &shifts, &cfg).map_err(|e| e.to_string())?;
    ensure(
        table.skipped.is_empty(),
        format!("skipped {:?}", table.skipped),
    )?;
    if let Some(row) = table.rows.iter().find(|r| r.beats_optimal) {
        return Err(format!(
            "{:?} beats optimal by {} (SE {})",
            row.perturbation, row.mean_difference, row.standard_error
        ));
    }
    Ok(format!(
        "{}; {} perturbations dominated",
        parts.join(", "),
        table.rows.len()
    ))
}

fn strictly(series: &[Option<f64>], increasing: bool) -> Result<(), String> {
    let values: Vec<f64> = series
        .iter()
        .map(|v| v.ok_or("missing value in sweep"))
        .collect::<Result<_, _>>()?;
    let ok = values
        .windows(2)
        .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
    ensure(
        ok,
        format!(
            "series not strictly {}",
            if increasing {
                "increasing"
            } else {
                "decreasing"
            }
        ),
    )
}

fn comparative_statics() -> Outcome {
    let sweep = |base, param, from, to, model| {
        run_sweep(&SweepSpec {
            base,
            param,
            from,
            to,
            steps: 100,
            model,
        })
        .map_err(|e| e.to_string())
    };
    let learning_example = EconomyParams::learning_example();
    let kappa = sweep(
        learning_example,
        ParamName::Kappa,
        0.01,
        1.45,
        SweepModel::Learning,
    )?;
    strictly(&column(&kappa, Column::Beta), false).map_err(|e| format!("kappa: {e}"))?;
    let cost = sweep(
        learning_example,
        ParamName::C,
        0.3,
        1.75,
        SweepModel::Learning,
    )?;
    strictly(&column(&cost, Column::Beta), true).map_err(|e| format!("c: {e}"))?;
    let rate = sweep(
        learning_example,
        ParamName::R,
        0.1,
        3.0,
        SweepModel::Learning,
    )?;
    strictly(&column(&rate, Column::Beta), true).map_err(|e| format!("r: {e}"))?;
    let benchmark_example = EconomyParams::no_learning_example();
    let bench = sweep(
        benchmark_example,
        ParamName::Kappa,
        0.1,
        4.0,
        SweepModel::NoLearning,
    )?;
    ensure(
        bench.iter().all(|r| r.regime == Some(Regime::LowCost)),
        "benchmark sweep leaves the low-cost regime",
    )?;
    strictly(&column(&bench, Column::AlphaHat), true).map_err(|e| format!("alpha_hat: {e}"))?;
    Ok("beta falls in kappa on [0.01, 1.45], rises in c on [0.3, 1.75] and r on [0.1, 3]; alpha_hat rises in kappa on [0.1, 4]".into())
}

fn u_shape_witness() -> Outcome {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/u_shape_witness.json");
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let witness = UShapeWitness::from_json(&text).map_err(|e| e.to_string())?;
    let (alpha, verdict) = alpha_kappa_shape(&witness.spec()).map_err(|e| e.to_string())?;
    match verdict.shape {
        Shape::UShaped { argmin } if argmin > 0 && argmin + 1 < alpha.len() => {
            ensure(
                argmin == witness.argmin,
                format!("argmin moved to {argmin}"),
            )?;
            Ok(format!(
                "alpha falls from {:.4} to {:.4} at index {argmin}, then rises to {:.4}",
                alpha[0],
                alpha[argmin],
                alpha[alpha.len() - 1]
            ))
        }
        other => Err(format!("shape {other:?}")),
    }
}

fn learning_vs_benchmark() -> Outcome {
    let sets = common::sampled_params(10);
    for (i, p) in sets.iter().enumerate() {
        let cmp = compare_learning(p).map_err(|e| format!("set {i}: {e}"))?;
        ensure(
            cmp.beta < cmp.beta_hat,
            format!("set {i}: beta {} >= beta_hat {}", cmp.beta, cmp.beta_hat),
        )?;
        let idle = p.with(ParamName::Kappa, 0.0).map_err(|e| e.to_string())?;
        let cmp = compare_learning(&idle).map_err(|e| e.to_string())?;
        ensure(
            (cmp.beta - cmp.beta_hat).abs() <= 1e-10,
            format!(
                "set {i} at kappa = 0: beta {} vs beta_hat {}",
                cmp.beta, cmp.beta_hat
            ),
        )?;
    }
    Ok(format!(
        "beta < beta_hat on {} sets, equal at kappa = 0",
        sets.len()
    ))
}

struct Criterion {
    id: u8,
    title: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

const CRITERIA: [Criterion; 8] = [
    Criterion {
        id: 1,
        title: "reference learning constants",
        budget: Duration::from_secs(1),
        run: learning_constants,
    },
    Criterion {
        id: 2,
        title: "reference no-learning constants",
        budget: Duration::from_secs(1),
        run: benchmark_constants,
    },
    Criterion {
        id: 3,
        title: "verifier certification",
        budget: Duration::from_secs(10),
        run: verifier_certification,
    },
    Criterion {
        id: 4,
        title: "grid oracle equivalence",
        budget: Duration::from_secs(60),
        run: oracle_equivalence,
    },
    Criterion {
        id: 5,
        title: "Monte Carlo validation",
        budget: Duration::from_secs(120),
        run: monte_carlo,
    },
    Criterion {
        id: 6,
        title: "comparative statics",
        budget: Duration::from_secs(10),
        run: comparative_statics,
    },
    Criterion {
        id: 7,
        title: "U-shape witness",
        budget: Duration::from_secs(30),
        run: u_shape_witness,
    },
    Criterion {
        id: 8,
        title: "learning vs no-learning",
        budget: Duration::from_secs(10),
        run: learning_vs_benchmark,
    },
];

fn main() -> ExitCode {
    let mut failed = 0;
    for c in &CRITERIA {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => {
                Err(format!("{detail}; over budget of {:?}", c.budget))
            }
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} criterion {}: {} ({:.2}s): {detail}",
            c.id,
            c.title,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        CRITERIA.len() - failed,
        CRITERIA.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

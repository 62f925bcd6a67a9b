use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::anyhow;
use repmatch_core::oracle::{compare, OracleConfig};
use repmatch_core::sweep::{self, alpha_kappa_shape, search_u_shape, Column, WitnessBox};
use repmatch_core::{
    check_all, compare_learning, policy_dominance, run_sweep, simulate, solve, solve_no_learning,
    value_iteration, Belief, EconomyParams, ParamName, Perturbation, Policy, Shape, SimConfig,
    SolveReport, SweepModel, SweepSpec,
};

use crate::{
    Command, CompareArgs, ModelArg, OracleArgs, SimulateArgs, SolveArgs, SweepArgs, VerifyArgs,
    WitnessArgs,
};

/// Failure of a subcommand, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// A check failed or a solver could not finish (exit 1).
    Check(anyhow::Error),
    /// Bad input or I/O (exit 2).
    Usage(anyhow::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Usage(_) => 2,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Check(e) | CliError::Usage(e) => format!("{e:#}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

trait UsageContext<T> {
    fn usage(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> UsageContext<T> for Result<T, E> {
    fn usage(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| CliError::Usage(e.into().context(what())))
    }
}

fn check<T>(res: repmatch_core::Result<T>) -> CliResult<T> {
    res.map_err(|e| CliError::Check(e.into()))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).usage(|| format!("reading {}", path.display()))
}

fn load_params(path: &Path) -> CliResult<EconomyParams> {
    EconomyParams::from_json(&read(path)?).usage(|| format!("parsing {}", path.display()))
}

fn load_report(path: &Path) -> CliResult<SolveReport> {
    SolveReport::from_json(&read(path)?).usage(|| format!("parsing {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).usage(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}").usage(|| "writing stdout".into())
        }
    }
}

fn create(path: &Path) -> CliResult<fs::File> {
    fs::File::create(path).usage(|| format!("creating {}", path.display()))
}

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Solve(a) => solve_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Witness(a) => witness_cmd(a),
    }
}

fn solve_cmd(a: SolveArgs) -> CliResult<()> {
    let params = load_params(&a.params)?;
    let curve = a.emit_curve.zip(a.curve_out.as_deref());
    match a.model {
        ModelArg::Learning => {
            let rep = check(solve(&params))?;
            if let Some((rows, path)) = curve {
                rep.write_curve(rows, create(path)?)
                    .usage(|| format!("writing {}", path.display()))?;
            }
            emit(a.out.as_deref(), &rep.to_json())
        }
        ModelArg::NoLearning => {
            let rep = check(solve_no_learning(&params))?;
            if let Some((rows, path)) = curve {
                rep.write_curve(rows, create(path)?)
                    .usage(|| format!("writing {}", path.display()))?;
            }
            emit(a.out.as_deref(), &rep.to_json())
        }
        ModelArg::Both => Err(CliError::Usage(anyhow!(
            "solve takes --model learning or no-learning"
        ))),
    }
}

fn verify_cmd(a: VerifyArgs) -> CliResult<()> {
    let rep = load_report(&a.report)?;
    let ver = check_all(&rep, a.grid).usage(|| "verification grid".into())?;
    emit(a.out.as_deref(), &ver.to_json())?;
    if ver.passed {
        Ok(())
    } else {
        let names: Vec<_> = ver.failures().map(|c| c.name.as_str()).collect();
        Err(CliError::Check(anyhow!(
            "failed checks: {}",
            names.join(", ")
        )))
    }
}

fn oracle_cmd(a: OracleArgs) -> CliResult<()> {
    let params = load_params(&a.params)?;
    let cfg = OracleConfig {
        n_grid: a.n_grid,
        dt: a.dt,
        tol: a.tol,
        max_iter: a.max_iter,
        tie_tolerance: a.tie_tolerance,
    };
    cfg.validate(&params)
        .usage(|| "oracle configuration".into())?;
    let grid = check(value_iteration(&params, cfg))?;
    if let Some(path) = &a.csv {
        grid.write_csv(create(path)?)
            .usage(|| format!("writing {}", path.display()))?;
    }
    let json = match &a.compare {
        Some(path) => {
            let rep = load_report(path)?;
            let cmp =
                compare(&grid, &rep).usage(|| format!("comparing with {}", path.display()))?;
            serde_json::to_string_pretty(&cmp)
        }
        None => serde_json::to_string_pretty(&serde_json::json!({
            "n_grid": grid.config.n_grid,
            "dt": grid.config.dt,
            "iterations": grid.iterations,
            "sup_norm_delta": grid.sup_norm_delta,
            "boundary_a": grid.boundary_a,
            "boundary_b": grid.boundary_b,
        })),
    }
    .expect("serializable");
    emit(a.out.as_deref(), &json)
}

fn simulate_cmd(a: SimulateArgs) -> CliResult<()> {
    let params = load_params(&a.params)?;
    let rep = load_report(&a.policy)?;
    let cfg = SimConfig {
        pi0: Belief::new(a.pi0).usage(|| "--pi0".into())?,
        n_paths: a.paths,
        seed: a.seed,
        eps: a.eps,
        max_events: a.max_events,
    };
    cfg.validate().usage(|| "simulation configuration".into())?;
    if params != rep.params {
        return Err(CliError::Usage(anyhow!(
            "{} was solved for different parameters",
            a.policy.display()
        )));
    }
    let res = check(simulate(&params, &Policy::optimal(&rep), &cfg))?;
    if let Some(path) = &a.paths_out {
        res.write_paths_csv(create(path)?)
            .usage(|| format!("writing {}", path.display()))?;
    }
    if a.dominance.is_empty() {
        return emit(a.out.as_deref(), &res.to_json());
    }
    let shifts = Perturbation::symmetric_shifts(&a.dominance);
    let table = check(policy_dominance(&params, &rep, &shifts, &cfg))?;
    let json = serde_json::to_string_pretty(&serde_json::json!({
        "simulation": res,
        "dominance": table,
    }))
    .expect("serializable");
    emit(a.out.as_deref(), &json)?;
    if table.any_beats_optimal() {
        Err(CliError::Check(anyhow!(
            "a perturbed policy beats the optimal one"
        )))
    } else {
        Ok(())
    }
}

fn sweep_cmd(a: SweepArgs) -> CliResult<()> {
    let base = load_params(&a.params)?;
    let param: ParamName = a.param.parse().usage(|| "--param".into())?;
    let shape_column: Option<Column> = a
        .shape
        .as_deref()
        .map(str::parse)
        .transpose()
        .usage(|| "--shape".into())?;
    let model = match a.model {
        ModelArg::Learning => SweepModel::Learning,
        ModelArg::NoLearning => SweepModel::NoLearning,
        ModelArg::Both => SweepModel::Both,
    };
    let spec = SweepSpec {
        base,
        param,
        from: a.from,
        to: a.to,
        steps: a.steps,
        model,
    };
    let rows = run_sweep(&spec).usage(|| "sweep grid".into())?;
    match &a.out {
        Some(path) => sweep::write_csv(&rows, create(path)?),
        None => sweep::write_csv(&rows, io::stdout().lock()),
    }
    .usage(|| "writing sweep table".into())?;
    if let Some(col) = shape_column {
        let verdict = check(sweep::detect_shape(&sweep::column(&rows, col)))?;
        let json = serde_json::to_string_pretty(&verdict).expect("serializable");
        match &a.shape_out {
            Some(path) => fs::write(path, json).usage(|| format!("writing {}", path.display()))?,
            None => eprintln!("{json}"),
        }
    }
    Ok(())
}

fn compare_cmd(a: CompareArgs) -> CliResult<()> {
    let params = load_params(&a.params)?;
    let cmp = check(compare_learning(&params))?;
    emit(
        a.out.as_deref(),
        &serde_json::to_string_pretty(&cmp).expect("serializable"),
    )
}

fn witness_cmd(a: WitnessArgs) -> CliResult<()> {
    let space = match &a.search_box {
        Some(path) => {
            serde_json::from_str(&read(path)?).usage(|| format!("parsing {}", path.display()))?
        }
        None => WitnessBox::default(),
    };
    let witness = search_u_shape(&space)
        .ok_or_else(|| CliError::Check(anyhow!("no U-shaped alpha(kappa) in the search box")))?;
    // Re-run from the stored spec so the emitted fixture is reproducible.
    let (_, verdict) = check(alpha_kappa_shape(&witness.spec()))?;
    if !matches!(verdict.shape, Shape::UShaped { .. }) {
        return Err(CliError::Check(anyhow!(
            "witness does not reproduce: {:?}",
            verdict.shape
        )));
    }
    emit(a.out.as_deref(), &witness.to_json())
}

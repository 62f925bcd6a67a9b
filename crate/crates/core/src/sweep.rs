//! Comparative statics: one-parameter sweeps, shape classification of the
//! resulting series, and a search for configurations whose `a`-boundary
//! is U-shaped in the meeting rate.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::econ::{classify_regime, EconomyParams, ParamName, Regime};
use crate::error::{Error, Result};
use crate::learning;
use crate::no_learning;

/// Relative dead-band: differences below this share of the series range
/// count as flat.
pub const DEAD_BAND: f64 = 1e-9;

pub const CSV_HEADER: [&str; 11] = [
    "index",
    "param",
    "value",
    "status",
    "reason",
    "regime",
    "w1",
    "beta",
    "alpha",
    "beta_hat",
    "alpha_hat",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepModel {
    Learning,
    NoLearning,
    Both,
}

impl SweepModel {
    fn learning(self) -> bool {
        matches!(self, SweepModel::Learning | SweepModel::Both)
    }

    fn no_learning(self) -> bool {
        matches!(self, SweepModel::NoLearning | SweepModel::Both)
    }
}

impl FromStr for SweepModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "learning" => Ok(SweepModel::Learning),
            "no-learning" => Ok(SweepModel::NoLearning),
            "both" => Ok(SweepModel::Both),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: EconomyParams,
    pub param: ParamName,
    pub from: f64,
    pub to: f64,
    /// Number of grid points, endpoints included.
    pub steps: usize,
    pub model: SweepModel,
}

impl SweepSpec {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.steps == 0 || !self.from.is_finite() || !self.to.is_finite() {
            return Err(Error::InvalidConfig(
                "a sweep needs at least one point and finite endpoints".into(),
            ));
        }
        if self.steps == 1 {
            return Ok(vec![self.from]);
        }
        let last = (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|i| self.from + (self.to - self.from) * i as f64 / last)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// The grid value gives invalid parameters.
    Skipped,
    /// A solver reported an error.
    Failed,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowStatus::Ok => "ok",
            RowStatus::Skipped => "skipped",
            RowStatus::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub param: ParamName,
    pub value: f64,
    pub status: RowStatus,
    pub reason: Option<String>,
    pub regime: Option<Regime>,
    pub w1: Option<f64>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub beta_hat: Option<f64>,
    pub alpha_hat: Option<f64>,
}

fn solve_row(spec: &SweepSpec, index: usize, value: f64) -> SweepRow {
    let mut row = SweepRow {
        index,
        param: spec.param,
        value,
        status: RowStatus::Ok,
        reason: None,
        regime: None,
        w1: None,
        beta: None,
        alpha: None,
        beta_hat: None,
        alpha_hat: None,
    };
    let params = match spec.base.with(spec.param, value) {
        Ok(p) => p,
        Err(e) => {
            row.status = RowStatus::Skipped;
            row.reason = Some(e.to_string());
            return row;
        }
    };
    let regime = classify_regime(&params);
    row.regime = Some(regime.regime);
    row.w1 = Some(regime.w1);
    let fail = |row: &mut SweepRow, e: Error| {
        row.status = RowStatus::Failed;
        row.reason = Some(e.to_string());
    };
    if spec.model.learning() {
        match learning::solve(&params) {
            Ok(rep) => {
                row.beta = Some(rep.beta);
                row.alpha = rep.alpha;
            }
            Err(e) => fail(&mut row, e),
        }
    }
    if spec.model.no_learning() {
        match no_learning::solve_no_learning(&params) {
            Ok(rep) => {
                row.beta_hat = Some(rep.beta_hat);
                row.alpha_hat = rep.alpha_hat;
            }
            Err(e) => fail(&mut row, e),
        }
    }
    row
}

/// Solves every grid point independently; rows come back in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let grid = spec.grid()?;
    Ok(grid
        .par_iter()
        .enumerate()
        .map(|(i, &v)| solve_row(spec, i, v))
        .collect())
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(CSV_HEADER)?;
    for row in rows {
        wtr.write_record([
            row.index.to_string(),
            row.param.to_string(),
            row.value.to_string(),
            row.status.to_string(),
            row.reason.clone().unwrap_or_default(),
            row.regime.map(|r| r.to_string()).unwrap_or_default(),
            num(row.w1),
            num(row.beta),
            num(row.alpha),
            num(row.beta_hat),
            num(row.alpha_hat),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Column of a sweep table, for shape detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    W1,
    Beta,
    Alpha,
    BetaHat,
    AlphaHat,
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "w1" => Ok(Column::W1),
            "beta" => Ok(Column::Beta),
            "alpha" => Ok(Column::Alpha),
            "beta_hat" => Ok(Column::BetaHat),
            "alpha_hat" => Ok(Column::AlphaHat),
            other => Err(Error::InvalidConfig(format!("unknown column `{other}`"))),
        }
    }
}

pub fn column(rows: &[SweepRow], col: Column) -> Vec<Option<f64>> {
    rows.iter()
        .map(|r| match col {
            Column::W1 => r.w1,
            Column::Beta => r.beta,
            Column::Alpha => r.alpha,
            Column::BetaHat => r.beta_hat,
            Column::AlphaHat => r.alpha_hat,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Increasing,
    Decreasing,
    UShaped { argmin: usize },
    InverseU { argmax: usize },
    NonMonotoneOther,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeVerdict {
    pub shape: Shape,
    /// Indices where the direction of the series changes.
    pub witnesses: Vec<usize>,
    /// Consecutive differences that fell inside the dead-band.
    pub flat_steps: usize,
}

impl ShapeVerdict {
    /// Monotone with no flat steps.
    pub fn is_strict(&self) -> bool {
        matches!(self.shape, Shape::Increasing | Shape::Decreasing) && self.flat_steps == 0
    }
}

/// Classifies a series by the signs of its consecutive differences.
///
/// Absent values at either end are trimmed; an absent value in between is
/// an error. Indices in the verdict refer to the untrimmed series. A flat
/// series is `NonMonotoneOther`.
pub fn detect_shape(series: &[Option<f64>]) -> Result<ShapeVerdict> {
    let start = series
        .iter()
        .position(Option::is_some)
        .unwrap_or(series.len());
    let end = series
        .iter()
        .rposition(Option::is_some)
        .map_or(start, |i| i + 1);
    let values: Vec<f64> = series[start..end]
        .iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Shape(format!("gap at index {}", start + i))))
        .collect::<Result<_>>()?;
    if values.len() < 3 {
        return Err(Error::Shape(format!(
            "need at least 3 values, got {}",
            values.len()
        )));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let band = DEAD_BAND * (hi - lo);
    let signs: Vec<i8> = values
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d.abs() <= band {
                0
            } else if d > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    let flat_steps = signs.iter().filter(|&&s| s == 0).count();

    // Runs of equal non-zero sign, with the index where each run starts.
    let mut runs: Vec<(i8, usize)> = Vec::new();
    for (i, &s) in signs.iter().enumerate() {
        if s != 0 && runs.last().is_none_or(|&(prev, _)| prev != s) {
            runs.push((s, i));
        }
    }
    let witnesses: Vec<usize> = runs.iter().skip(1).map(|&(_, i)| start + i).collect();
    let extreme = |pick_max: bool| {
        let mut best = 0;
        for (i, &v) in values.iter().enumerate() {
            if (pick_max && v > values[best]) || (!pick_max && v < values[best]) {
                best = i;
            }
        }
        start + best
    };
    let shape = match runs.iter().map(|&(s, _)| s).collect::<Vec<_>>().as_slice() {
        [1] => Shape::Increasing,
        [-1] => Shape::Decreasing,
        [-1, 1] => Shape::UShaped {
            argmin: extreme(false),
        },
        [1, -1] => Shape::InverseU {
            argmax: extreme(true),
        },
        _ => Shape::NonMonotoneOther,
    };
    Ok(ShapeVerdict {
        shape,
        witnesses,
        flat_steps,
    })
}

/// Coarse box of candidate economies for the U-shape search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessBox {
    pub r: Vec<f64>,
    pub c: Vec<f64>,
    pub lambda_a: Vec<f64>,
    pub lambda_b: Vec<f64>,
    pub phi_a: Vec<f64>,
    pub phi_b: Vec<f64>,
    pub kappa_from: f64,
    pub kappa_to: f64,
    pub kappa_steps: usize,
}

impl Default for WitnessBox {
    fn default() -> Self {
        WitnessBox {
            r: vec![0.1, 0.5, 0.9],
            c: vec![0.3, 0.6, 1.2],
            lambda_a: vec![1.5, 1.8],
            lambda_b: vec![3.0, 3.8],
            phi_a: vec![0.35, 1.0, 3.0],
            phi_b: vec![0.4, 1.0],
            kappa_from: 0.01,
            kappa_to: 1.45,
            kappa_steps: 100,
        }
    }
}

impl WitnessBox {
    fn candidates(&self) -> Vec<EconomyParams> {
        let mut out = Vec::new();
        for &r in &self.r {
            for &c in &self.c {
                for &la in &self.lambda_a {
                    for &lb in &self.lambda_b {
                        for &pa in &self.phi_a {
                            for &pb in &self.phi_b {
                                if let Ok(p) =
                                    EconomyParams::new(r, la, lb, c, self.kappa_from, pa, pb)
                                {
                                    out.push(p);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// An economy whose `α` first falls and then rises along a `κ` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UShapeWitness {
    pub base: EconomyParams,
    pub kappa_from: f64,
    pub kappa_to: f64,
    pub kappa_steps: usize,
    pub argmin: usize,
    pub alpha: Vec<f64>,
}

impl UShapeWitness {
    pub fn spec(&self) -> SweepSpec {
        SweepSpec {
            base: self.base,
            param: ParamName::Kappa,
            from: self.kappa_from,
            to: self.kappa_to,
            steps: self.kappa_steps,
            model: SweepModel::Learning,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `α(κ)` along the sweep if every point is low cost and solved, with its
/// shape.
pub fn alpha_kappa_shape(spec: &SweepSpec) -> Result<(Vec<f64>, ShapeVerdict)> {
    let rows = run_sweep(spec)?;
    let alpha: Option<Vec<f64>> = rows
        .iter()
        .map(|r| {
            (r.status == RowStatus::Ok && r.regime == Some(Regime::LowCost)).then_some(r.alpha?)
        })
        .collect();
    let alpha = alpha.ok_or_else(|| {
        Error::Shape("sweep leaves the low-cost regime or has failed rows".into())
    })?;
    let series: Vec<Option<f64>> = alpha.iter().copied().map(Some).collect();
    let verdict = detect_shape(&series)?;
    Ok((alpha, verdict))
}

/// First candidate in the box, in grid order, whose `α(κ)` is U-shaped with
/// an interior minimum.
pub fn search_u_shape(space: &WitnessBox) -> Option<UShapeWitness> {
    space.candidates().into_par_iter().find_map_first(|base| {
        let spec = SweepSpec {
            base,
            param: ParamName::Kappa,
            from: space.kappa_from,
            to: space.kappa_to,
            steps: space.kappa_steps,
            model: SweepModel::Learning,
        };
        let (alpha, verdict) = alpha_kappa_shape(&spec).ok()?;
        match verdict.shape {
            Shape::UShaped { argmin } if argmin > 0 && argmin + 1 < alpha.len() => {
                Some(UShapeWitness {
                    base,
                    kappa_from: space.kappa_from,
                    kappa_to: space.kappa_to,
                    kappa_steps: space.kappa_steps,
                    argmin,
                    alpha,
                })
            }
            _ => None,
        }
    })
}

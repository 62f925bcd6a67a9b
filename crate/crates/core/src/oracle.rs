//! Brute-force dynamic programming on a belief grid.
//!
//! Solves the coupled fixed point `(W, V_a, V_b)` by explicit value
//! iteration, with no use of the closed forms. Over a step `dt` an unmatched
//! agent meets a `q`-project with probability `κφq dt` and takes the better
//! of staying unmatched and matching. A matched agent pays `c dt`, succeeds
//! with probability `λq π dt` (earning `1 + W(1)`), otherwise drifts to the
//! decayed belief, and may quit into `W` first.
//!
//! Flows earned within a step are discounted by half a step and
//! continuation values by a full step.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::econ::belief::decay;
use crate::econ::{EconomyParams, ProjectType};
use crate::error::{Error, Result};
use crate::learning::SolveReport;

pub const MIN_GRID: usize = 1000;
/// Largest admissible per-step event probability.
pub const MAX_STEP_PROBABILITY: f64 = 0.1;
const PAR_MIN_LEN: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub n_grid: usize,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// `V_q` counts as continuing only where it exceeds `W` by more than this.
    pub tie_tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            n_grid: 4000,
            dt: 1e-3,
            tol: 1e-10,
            max_iter: 1_000_000,
            tie_tolerance: 1e-12,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self, params: &EconomyParams) -> Result<()> {
        if self.n_grid < MIN_GRID {
            return Err(Error::InvalidConfig(format!(
                "n_grid must be at least {MIN_GRID}, got {}",
                self.n_grid
            )));
        }
        if !(self.dt > 0.0 && self.tol > 0.0 && self.tie_tolerance >= 0.0) {
            return Err(Error::InvalidConfig(
                "dt and tol must be positive, tie_tolerance non-negative".into(),
            ));
        }
        let meet = params.total_meeting_rate() * self.dt;
        let succeed = params.lambda_b() * self.dt;
        if meet > MAX_STEP_PROBABILITY || succeed > MAX_STEP_PROBABILITY {
            return Err(Error::InvalidConfig(format!(
                "dt = {} gives step probabilities {meet:.3} (meeting) and {succeed:.3} \
                 (success); both must be at most {MAX_STEP_PROBABILITY}",
                self.dt
            )));
        }
        Ok(())
    }
}

/// First continuing grid point of a section and the boundary estimate, the
/// midpoint of the cell it closes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericBoundary {
    pub first_index: usize,
    pub estimate: f64,
    /// Every grid point from `first_index` on is continuing.
    pub is_interval: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub params: EconomyParams,
    pub config: OracleConfig,
    pub pi_grid: Vec<f64>,
    pub w: Vec<f64>,
    pub v_a: Vec<f64>,
    pub v_b: Vec<f64>,
    pub boundary_a: Option<NumericBoundary>,
    pub boundary_b: Option<NumericBoundary>,
    pub iterations: usize,
    pub sup_norm_delta: f64,
}

impl GridSolution {
    pub fn values(&self, q: ProjectType) -> &[f64] {
        match q {
            ProjectType::A => &self.v_a,
            ProjectType::B => &self.v_b,
        }
    }

    pub fn boundary(&self, q: ProjectType) -> Option<NumericBoundary> {
        match q {
            ProjectType::A => self.boundary_a,
            ProjectType::B => self.boundary_b,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["pi", "W", "V_a", "V_b"])?;
        for i in 0..self.pi_grid.len() {
            let row = [self.pi_grid[i], self.w[i], self.v_a[i], self.v_b[i]];
            wtr.write_record(row.iter().map(|v| v.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Linear interpolation weights for the belief reached after one step.
#[derive(Debug, Clone)]
struct Transport {
    index: Vec<usize>,
    frac: Vec<f64>,
}

impl Transport {
    fn new(n: usize, rate: f64, dt: f64) -> Self {
        let (index, frac) = (0..=n)
            .map(|i| {
                let x = decay(i as f64 / n as f64, rate, dt) * n as f64;
                let k = (x.floor() as usize).min(n - 1);
                (k, x - k as f64)
            })
            .unzip();
        Transport { index, frac }
    }

    fn apply(&self, values: &[f64], i: usize) -> f64 {
        let k = self.index[i];
        let f = self.frac[i];
        values[k] * (1.0 - f) + values[k + 1] * f
    }
}

/// Value-iteration state, exposed so single sweeps can be inspected.
#[derive(Debug, Clone)]
pub struct OracleState {
    params: EconomyParams,
    config: OracleConfig,
    pi: Vec<f64>,
    transport: [Transport; 2],
    w: Vec<f64>,
    v: [Vec<f64>; 2],
    iterations: usize,
    delta: f64,
}

impl OracleState {
    /// Starts from `W = V_a = V_b = 0`.
    pub fn new(params: &EconomyParams, config: OracleConfig) -> Result<Self> {
        config.validate(params)?;
        let n = config.n_grid;
        let zeros = vec![0.0; n + 1];
        Ok(OracleState {
            params: *params,
            config,
            pi: (0..=n).map(|i| i as f64 / n as f64).collect(),
            transport: [
                Transport::new(n, params.lambda_a(), config.dt),
                Transport::new(n, params.lambda_b(), config.dt),
            ],
            w: zeros.clone(),
            v: [zeros.clone(), zeros],
            iterations: 0,
            delta: f64::INFINITY,
        })
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn v(&self, q: ProjectType) -> &[f64] {
        &self.v[q as usize]
    }

    /// One Bellman sweep; returns the sup-norm change.
    pub fn step(&mut self) -> f64 {
        let p = self.params;
        let dt = self.config.dt;
        let disc = (-p.r() * dt).exp();
        let half = (-p.r() * dt / 2.0).exp();
        let (ma, mb) = (
            p.meeting_rate(ProjectType::A),
            p.meeting_rate(ProjectType::B),
        );
        let stay = disc * (1.0 - (ma + mb) * dt);

        let (w, [va, vb]) = (&self.w, &self.v);
        let new_w: Vec<f64> = (0..w.len())
            .into_par_iter()
            .with_min_len(PAR_MIN_LEN)
            .map(|i| {
                let meet = ma * w[i].max(va[i]) + mb * w[i].max(vb[i]);
                stay * w[i] + half * dt * meet
            })
            .collect();

        let reward = 1.0 + new_w[new_w.len() - 1];
        let new_v: Vec<Vec<f64>> = ProjectType::ALL
            .iter()
            .map(|&q| {
                let rate = q.rate(&p);
                let old = &self.v[q as usize];
                let transport = &self.transport[q as usize];
                let pi = &self.pi;
                let new_w = &new_w;
                (0..old.len())
                    .into_par_iter()
                    .with_min_len(PAR_MIN_LEN)
                    .map(|i| {
                        let jump = rate * pi[i] * dt;
                        let flow = half * (jump * reward - p.c() * dt);
                        let cont = flow + disc * (1.0 - jump) * transport.apply(old, i);
                        new_w[i].max(cont)
                    })
                    .collect()
            })
            .collect();

        let sup = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
        };
        let mut delta = sup(&self.w, &new_w);
        for (old, new) in self.v.iter().zip(&new_v) {
            delta = delta.max(sup(old, new));
        }
        self.w = new_w;
        let mut new_v = new_v.into_iter();
        self.v = [new_v.next().unwrap(), new_v.next().unwrap()];
        self.iterations += 1;
        self.delta = delta;
        delta
    }

    fn boundary(&self, q: ProjectType) -> Option<NumericBoundary> {
        let tie = self.config.tie_tolerance;
        let v = &self.v[q as usize];
        let continuing = |i: usize| v[i] > self.w[i] + tie;
        let first = (0..v.len()).find(|&i| continuing(i))?;
        let estimate = if first == 0 {
            0.0
        } else {
            (self.pi[first - 1] + self.pi[first]) / 2.0
        };
        Some(NumericBoundary {
            first_index: first,
            estimate,
            is_interval: (first..v.len()).all(continuing),
        })
    }

    pub fn into_solution(self) -> GridSolution {
        let boundary_a = self.boundary(ProjectType::A);
        let boundary_b = self.boundary(ProjectType::B);
        let [v_a, v_b] = self.v;
        GridSolution {
            params: self.params,
            config: self.config,
            pi_grid: self.pi,
            w: self.w,
            v_a,
            v_b,
            boundary_a,
            boundary_b,
            iterations: self.iterations,
            sup_norm_delta: self.delta,
        }
    }
}

/// Iterates from zero until the sup-norm change drops below `config.tol`.
pub fn value_iteration(params: &EconomyParams, config: OracleConfig) -> Result<GridSolution> {
    let mut state = OracleState::new(params, config)?;
    while state.iterations < config.max_iter {
        if state.step() < config.tol {
            return Ok(state.into_solution());
        }
    }
    Err(Error::NoConvergence {
        iterations: state.iterations,
        delta: state.delta,
    })
}

/// Grid solution measured against a closed-form report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub n_grid: usize,
    pub dt: f64,
    pub sup_error_w: f64,
    pub sup_error_va: f64,
    pub sup_error_vb: f64,
    pub beta: f64,
    pub beta_numeric: Option<f64>,
    /// `|β_numeric - β|` in grid cells.
    pub beta_cells: Option<f64>,
    pub alpha: Option<f64>,
    pub alpha_numeric: Option<f64>,
    pub alpha_cells: Option<f64>,
    /// Both solutions agree on whether `a`-projects are ever taken.
    pub a_section_agrees: bool,
    pub sections_are_intervals: bool,
}

impl OracleComparison {
    pub fn max_sup_error(&self) -> f64 {
        self.sup_error_w
            .max(self.sup_error_va)
            .max(self.sup_error_vb)
    }
}

pub fn compare(grid: &GridSolution, report: &SolveReport) -> Result<OracleComparison> {
    if grid.params != report.params {
        return Err(Error::ParamsMismatch);
    }
    let sup = |values: &[f64], exact: &dyn Fn(f64) -> f64| {
        grid.pi_grid
            .iter()
            .zip(values)
            .fold(0.0_f64, |m, (&pi, v)| m.max((v - exact(pi)).abs()))
    };
    let n = grid.config.n_grid as f64;
    let cells =
        |num: Option<NumericBoundary>, exact: f64| num.map(|b| (b.estimate - exact).abs() * n);
    let alpha_cells = match (grid.boundary_a, report.alpha) {
        (Some(b), Some(a)) => cells(Some(b), a),
        _ => None,
    };
    Ok(OracleComparison {
        n_grid: grid.config.n_grid,
        dt: grid.config.dt,
        sup_error_w: sup(&grid.w, &|pi| report.w(pi)),
        sup_error_va: sup(&grid.v_a, &|pi| report.v_a(pi)),
        sup_error_vb: sup(&grid.v_b, &|pi| report.v_b(pi)),
        beta: report.beta,
        beta_numeric: grid.boundary_b.map(|b| b.estimate),
        beta_cells: cells(grid.boundary_b, report.beta),
        alpha: report.alpha,
        alpha_numeric: grid.boundary_a.map(|b| b.estimate),
        alpha_cells,
        a_section_agrees: grid.boundary_a.is_some() == report.alpha.is_some(),
        sections_are_intervals: [grid.boundary_a, grid.boundary_b]
            .iter()
            .flatten()
            .all(|b| b.is_interval),
    })
}

//! The end-to-end pipeline: exact dynamics, purification, and one unitary fit
//! per time point on a uniform grid.
//!
//! Every time point gets its own seed (`seed + index`), so results do not
//! depend on the number of worker threads. Warm starts chain the fits and
//! therefore run sequentially.

use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{LindbladSpec, Propagator};
use crate::linalg::{ComplexMatrix, Subsystem};
use crate::models::{all_excited, tfim_lindblad, tls_lindblad, TfimParams, TlsParams};
use crate::purification::{contract, optimize_purification, schmidt_purify, PurificationOptions, PurifiedState};
use crate::shots::{run_tomography_experiment, ShotConfig, TomographyOutcome};
use crate::state::DensityMatrix;
use crate::unitary::{solve_unitary, HermitianParams, SolverOptions, UnitaryFit, UnitarySchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Tls,
    Tfim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PurificationMode {
    Schmidt,
    Optimize,
}

/// Experiment configuration, read from a single JSON object. Missing keys take
/// their defaults. The initial state is the all-excited product state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    pub delta: f64,
    pub omega: f64,
    pub gamma: f64,
    /// TFIM only.
    pub sites: usize,
    #[serde(rename = "J")]
    pub coupling_j: f64,
    #[serde(rename = "h")]
    pub field_h: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub purification_mode: PurificationMode,
    pub warm_start: bool,
    /// Shots per basis circuit for the tomography replay; `None` uses exact probabilities.
    pub shots: Option<u64>,
    pub seed: u64,
    pub output_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: Model::Tls,
            delta: 0.5,
            omega: 0.5,
            gamma: 0.1,
            sites: 2,
            coupling_j: 1.0,
            field_h: 1.0,
            t_max: 10.0,
            n_points: 50,
            purification_mode: PurificationMode::Schmidt,
            warm_start: true,
            shots: None,
            seed: 0,
            output_dir: "results".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn tls() -> Self {
        Self::default()
    }

    pub fn tfim() -> Self {
        ExperimentConfig {
            model: Model::Tfim,
            ..Self::default()
        }
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidParameter(format!("n_points must be >= 2, got {}", self.n_points)));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidParameter(format!("t_max must be finite and > 0, got {}", self.t_max)));
        }
        if self.shots == Some(0) {
            return Err(Error::InvalidParameter("shots must be >= 1".into()));
        }
        match self.model {
            Model::Tls => self.tls_params().validate(),
            Model::Tfim => self.tfim_params().validate(),
        }
    }

    pub fn tls_params(&self) -> TlsParams {
        TlsParams {
            delta: self.delta,
            omega: self.omega,
            gamma: self.gamma,
        }
    }

    pub fn tfim_params(&self) -> TfimParams {
        TfimParams {
            sites: self.sites,
            coupling_j: self.coupling_j,
            field_h: self.field_h,
            gamma: self.gamma,
        }
    }

    pub fn lindblad(&self) -> Result<LindbladSpec> {
        match self.model {
            Model::Tls => tls_lindblad(&self.tls_params()),
            Model::Tfim => tfim_lindblad(&self.tfim_params()),
        }
    }

    pub fn system_dim(&self) -> usize {
        match self.model {
            Model::Tls => 2,
            Model::Tfim => 1 << self.sites,
        }
    }

    pub fn initial_state(&self) -> DensityMatrix {
        match self.model {
            Model::Tls => all_excited(1),
            Model::Tfim => all_excited(self.sites),
        }
    }

    /// `t_i = t_max * i / (n_points - 1)`; the last point is exactly `t_max`.
    pub fn grid(&self) -> Vec<f64> {
        let last = self.n_points - 1;
        (0..self.n_points)
            .map(|i| if i == last { self.t_max } else { self.t_max * i as f64 / last as f64 })
            .collect()
    }

    pub fn label(&self) -> String {
        match self.model {
            Model::Tls => format!("tls delta={} omega={} gamma={}", self.delta, self.omega, self.gamma),
            Model::Tfim => format!(
                "tfim sites={} J={} h={} gamma={}",
                self.sites, self.coupling_j, self.field_h, self.gamma
            ),
        }
    }
}

/// Everything computed for one grid point.
#[derive(Debug, Clone)]
pub struct TimePoint {
    pub t: f64,
    pub exact: DensityMatrix,
    /// Purification of `exact`, the fit target.
    pub purified: PurifiedState,
    /// `||Tr_B(purified) - exact||_F`.
    pub purification_distance: f64,
    pub fit: UnitaryFit,
    /// `Tr_B(U psi0)`.
    pub reconstructed: DensityMatrix,
    /// `||reconstructed - exact||_F`.
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub psi0: PurifiedState,
    pub points: Vec<TimePoint>,
}

/// Aggregate numbers written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub metric: String,
    pub t_max: f64,
    pub n_points: usize,
    pub mean_distance: f64,
    pub max_distance: f64,
    pub mean_purification_distance: f64,
    pub max_residual: f64,
    pub max_unitarity_error: f64,
    pub total_iterations: usize,
}

pub const DISTANCE_METRIC: &str =
    "Frobenius norm ||rho_exact(t) - Tr_B(U(t) psi0)||_F per time point";

impl ExperimentResult {
    pub fn schedule(&self) -> Result<UnitarySchedule> {
        UnitarySchedule::new(
            self.points.iter().map(|p| p.fit.clone()).collect(),
            self.config.label(),
        )
    }

    pub fn exact_trajectory(&self) -> Vec<DensityMatrix> {
        self.points.iter().map(|p| p.exact.clone()).collect()
    }

    pub fn summary(&self) -> Summary {
        let n = self.points.len().max(1) as f64;
        let fold_max = |f: fn(&TimePoint) -> f64| self.points.iter().map(f).fold(0.0, f64::max);
        Summary {
            experiment: self.config.label(),
            metric: DISTANCE_METRIC.into(),
            t_max: self.config.t_max,
            n_points: self.config.n_points,
            mean_distance: self.points.iter().map(|p| p.distance).sum::<f64>() / n,
            max_distance: fold_max(|p| p.distance),
            mean_purification_distance: self.points.iter().map(|p| p.purification_distance).sum::<f64>() / n,
            max_residual: fold_max(|p| p.fit.residual),
            max_unitarity_error: fold_max(|p| p.fit.unitary.unitarity_error()),
            total_iterations: self.points.iter().map(|p| p.fit.iterations).sum(),
        }
    }
}

fn stage<T>(name: &'static str, t: f64, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        t,
        source: Box::new(e),
    })
}

/// Runs `f(0..n)` on up to `jobs` threads, preserving order.
fn map_points<T, F>(n: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        return pool.install(|| (0..n).into_par_iter().map(&f).collect());
    }
    let _ = jobs;
    (0..n).map(f).collect()
}

fn purify(cfg: &ExperimentConfig, rho: &DensityMatrix, index: usize) -> Result<PurifiedState> {
    match cfg.purification_mode {
        PurificationMode::Schmidt => schmidt_purify(rho),
        PurificationMode::Optimize => {
            let opts = PurificationOptions {
                seed: cfg.seed.wrapping_add(index as u64),
                ..PurificationOptions::default()
            };
            Ok(optimize_purification(rho, None, &opts)?.state)
        }
    }
}

fn solver_options(cfg: &ExperimentConfig, index: usize) -> SolverOptions {
    SolverOptions {
        seed: cfg.seed.wrapping_add(index as u64),
        ..SolverOptions::default()
    }
}

/// Propagates, purifies and fits every grid point. `jobs` bounds the worker
/// threads; output is identical for every value.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentResult> {
    cfg.validate()?;
    let spec = cfg.lindblad()?;
    let propagator = Propagator::new(&spec)?;
    let rho0 = cfg.initial_state();
    let psi0 = stage("purification", 0.0, schmidt_purify(&rho0))?;
    let grid = cfg.grid();
    info!("run_experiment: {} on {} points, jobs = {jobs}", cfg.label(), grid.len());

    let prepared = map_points(grid.len(), jobs, |i| {
        let t = grid[i];
        let exact = stage("propagation", t, propagator.propagate(&rho0, t))?.rho;
        let purified = stage("purification", t, purify(cfg, &exact, i))?;
        let pd = stage("purification", t, contract(&purified, Subsystem::Bath))?.distance(&exact);
        Ok((exact, purified, pd))
    })?;

    let fits: Vec<UnitaryFit> = if cfg.warm_start {
        let mut fits: Vec<UnitaryFit> = Vec::with_capacity(grid.len());
        for (i, (_, target, _)) in prepared.iter().enumerate() {
            let t = grid[i];
            let warm: Option<HermitianParams> = match i {
                0 => None,
                1 => Some(fits[0].generator.clone()),
                _ => Some(fits[i - 1].generator.scaled(t / grid[i - 1])),
            };
            let fit = solve_unitary(&psi0, target, warm.as_ref(), t, &solver_options(cfg, i));
            fits.push(stage("unitary fit", t, fit)?);
        }
        fits
    } else {
        map_points(grid.len(), jobs, |i| {
            let t = grid[i];
            stage("unitary fit", t, solve_unitary(&psi0, &prepared[i].1, None, t, &solver_options(cfg, i)))
        })?
    };

    let mut points = Vec::with_capacity(grid.len());
    for ((exact, purified, purification_distance), fit) in prepared.into_iter().zip(fits) {
        let t = fit.time_label;
        let evolved = stage("reconstruction", t, crate::shots::apply_unitary(&fit.unitary, &psi0))?;
        let reconstructed = stage("reconstruction", t, contract(&evolved, Subsystem::Bath))?;
        points.push(TimePoint {
            t,
            distance: reconstructed.distance(&exact),
            exact,
            purified,
            purification_distance,
            fit,
            reconstructed,
        });
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        psi0,
        points,
    })
}

/// Exact trajectory on the schedule's time points.
pub fn exact_trajectory(cfg: &ExperimentConfig, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    let propagator = Propagator::new(&cfg.lindblad()?)?;
    let rho0 = cfg.initial_state();
    times
        .iter()
        .map(|&t| stage("propagation", t, propagator.propagate(&rho0, t)).map(|p| p.rho))
        .collect()
}

/// Replays a schedule with tomography; `cfg.shots = None` uses exact probabilities.
pub fn replay_schedule(cfg: &ExperimentConfig, schedule: &UnitarySchedule) -> Result<Vec<TomographyOutcome>> {
    cfg.validate()?;
    if cfg.system_dim() != 2 {
        return Err(Error::Dimension(format!(
            "tomography replay needs a single-qubit system, the config describes d = {}",
            cfg.system_dim()
        )));
    }
    if let Some(first) = schedule.entries().first() {
        if first.unitary.rows() != 4 {
            return Err(Error::Dimension(format!(
                "schedule unitaries are {0}x{0}, expected 4x4",
                first.unitary.rows()
            )));
        }
    }
    let exact = exact_trajectory(cfg, &schedule.times())?;
    let psi0 = schmidt_purify(&cfg.initial_state())?;
    let shot_cfg = cfg.shots.map(|s| ShotConfig::new(s, cfg.seed)).transpose()?;
    run_tomography_experiment(schedule, &psi0, &exact, shot_cfg.as_ref())
}

/// Independent real coefficients of a `d x d` density matrix: the diagonal
/// populations, then `(re, im)` of each upper-triangle coherence.
pub fn matrix_columns(d: usize) -> Vec<String> {
    let mut cols: Vec<String> = (0..d).map(|i| format!("rho{i}{i}_re")).collect();
    for i in 0..d {
        for j in (i + 1)..d {
            cols.push(format!("rho{i}{j}_re"));
            cols.push(format!("rho{i}{j}_im"));
        }
    }
    cols
}

pub fn matrix_values(m: &ComplexMatrix) -> Vec<f64> {
    let d = m.rows();
    let mut vals: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
    for i in 0..d {
        for j in (i + 1)..d {
            vals.push(m[(i, j)].re);
            vals.push(m[(i, j)].im);
        }
    }
    vals
}

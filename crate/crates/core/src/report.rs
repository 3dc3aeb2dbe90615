//! Result files: writing, reading back, and the invariant checks behind
//! `validate`.
//!
//! Output is deterministic. Floats use the shortest representation that
//! round-trips, and nothing depends on the clock or the thread count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{exact_trajectory, matrix_columns, matrix_values, ExperimentConfig, ExperimentResult, Summary};
use crate::linalg::{expm_hermitian_generator, ComplexMatrix};
use crate::shots::{distance_stats, tomography_csv, TomographyOutcome};
use crate::state::DensityMatrix;
use crate::unitary::UnitarySchedule;

pub const CONFIG_FILE: &str = "config.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SCHEDULE_FILE: &str = "unitaries.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TOMOGRAPHY_FILE: &str = "tomography.csv";
pub const TOMOGRAPHY_SUMMARY_FILE: &str = "tomography_summary.json";
pub const SCHEMA_FILE: &str = "SCHEMA.md";

const UNITARITY_TOL: f64 = 1e-10;
const GENERATOR_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-6;
const EXACT_TOL: f64 = 1e-10;
const RECOMPUTE_TOL: f64 = 1e-12;

pub const SCHEMA: &str = r#"# Output schema

All CSV files start with one `#` comment line that records the model,
its parameters and the time grid. Skip it with `comment='#'` or similar.

Density-matrix elements use the computational basis with `|0>` as the ground
state. Multi-site indices run with site 0 as the most significant bit.
`rhoIJ_re` / `rhoIJ_im` are the real and imaginary parts of element (I, J).
Only the diagonal and the upper triangle are written; the lower triangle
follows from Hermiticity.

## config.json

The resolved experiment configuration, including defaults.

## trajectory.csv

| column | meaning |
|---|---|
| `t` | time point |
| `exact_rhoII_re` | population I of the Lindblad solution |
| `exact_rhoIJ_re`, `exact_rhoIJ_im` | coherence (I, J), I < J, of the Lindblad solution |
| `fit_rhoII_re`, `fit_rhoIJ_re`, `fit_rhoIJ_im` | same elements of `Tr_B(U(t) psi0)` |
| `purification_distance` | `||Tr_B(psi(t)) - rho_exact(t)||_F` for the purification used as fit target |
| `distance` | `||Tr_B(U(t) psi0) - rho_exact(t)||_F` |
| `residual` | `||psi(t) - U(t) psi0||_2` of the unitary fit |

## unitaries.json

JSON array, one entry per time point, ordered by `t`:
`{"t": t, "unitary": M, "generator": M, "residual": r}` where
`unitary = exp(i * generator)` maps `psi0` at time 0 to the purification at `t`,
and every matrix `M` is `{"rows": r, "cols": c, "re": [...], "im": [...]}` in
row-major order. The state index is `system * d + bath`.

## summary.json

`mean_distance` and `max_distance` aggregate the `distance` column.
`mean_purification_distance` aggregates `purification_distance`.
`max_residual` and `max_unitarity_error` (`||U^dagger U - I||_F`) are maxima over the schedule.

## tomography.csv

| column | meaning |
|---|---|
| `t` | time point |
| `rho00_re`, `rho01_re`, `rho01_im`, `rho11_re` | reconstructed system-qubit density matrix |
| `distance` | `||rho_reconstructed - rho_exact||_F` |
| `shots` | shots per basis circuit (Z, X, Y); empty in exact-probability mode |
| `seed` | sampling seed for this time point (base seed + index); empty in exact-probability mode |

## tomography_summary.json

Mean and population standard deviation of the per-point `distance` values.
"#;

fn csv_header_comment(cfg: &ExperimentConfig) -> String {
    format!("# {} t_max={} n_points={}\n", cfg.label(), cfg.t_max, cfg.n_points)
}

pub fn trajectory_csv(result: &ExperimentResult) -> String {
    let d = result.config.system_dim();
    let cols = matrix_columns(d);
    let mut out = csv_header_comment(&result.config);
    out.push('t');
    for prefix in ["exact", "fit"] {
        for c in &cols {
            let _ = write!(out, ",{prefix}_{c}");
        }
    }
    out.push_str(",purification_distance,distance,residual\n");
    for p in &result.points {
        let _ = write!(out, "{}", p.t);
        for m in [p.exact.matrix(), p.reconstructed.matrix()] {
            for v in matrix_values(m) {
                let _ = write!(out, ",{v}");
            }
        }
        let _ = writeln!(out, ",{},{},{}", p.purification_distance, p.distance, p.fit.residual);
    }
    out
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes config, trajectory, schedule, summary and schema into `dir`.
pub fn write_experiment(result: &ExperimentResult, dir: &Path) -> Result<Summary> {
    fs::create_dir_all(dir)?;
    let summary = result.summary();
    write_file(dir, CONFIG_FILE, &to_json_string(&result.config)?)?;
    write_file(dir, TRAJECTORY_FILE, &trajectory_csv(result))?;
    write_file(dir, SCHEDULE_FILE, &(result.schedule()?.to_json()? + "\n"))?;
    write_file(dir, SUMMARY_FILE, &to_json_string(&summary)?)?;
    write_file(dir, SCHEMA_FILE, SCHEMA)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographySummary {
    pub experiment: String,
    pub metric: String,
    /// `None` in exact-probability mode.
    pub shots: Option<u64>,
    pub seed: u64,
    pub n_points: usize,
    pub mean_distance: f64,
    pub std_distance: f64,
    pub max_distance: f64,
}

pub fn tomography_summary(cfg: &ExperimentConfig, outcomes: &[TomographyOutcome]) -> TomographySummary {
    let (mean, std) = distance_stats(outcomes);
    TomographySummary {
        experiment: cfg.label(),
        metric: "mean and population standard deviation of per-point Frobenius distances ||rho_tomography - rho_exact||_F".into(),
        shots: cfg.shots,
        seed: cfg.seed,
        n_points: outcomes.len(),
        mean_distance: mean,
        std_distance: std,
        max_distance: outcomes.iter().map(|o| o.distance_to_exact).fold(0.0, f64::max),
    }
}

pub fn write_tomography(cfg: &ExperimentConfig, outcomes: &[TomographyOutcome], dir: &Path) -> Result<TomographySummary> {
    fs::create_dir_all(dir)?;
    let summary = tomography_summary(cfg, outcomes);
    let csv = csv_header_comment(cfg) + &tomography_csv(outcomes, cfg.shots);
    write_file(dir, TOMOGRAPHY_FILE, &csv)?;
    write_file(dir, TOMOGRAPHY_SUMMARY_FILE, &to_json_string(&summary)?)?;
    write_file(dir, SCHEMA_FILE, SCHEMA)?;
    Ok(summary)
}

pub fn read_config(dir: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_json(&fs::read_to_string(dir.join(CONFIG_FILE))?)
}

pub fn read_schedule(path: &Path) -> Result<UnitarySchedule> {
    UnitarySchedule::from_json(&fs::read_to_string(path)?, path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportMode {
    /// `U(t, 0)` for every time point.
    Absolute,
    /// `U(t_n, t_{n-1}) = U(t_n, 0) U(t_{n-1}, 0)^dagger`.
    Step,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    pub t_start: f64,
    pub t_end: f64,
    pub unitary: ComplexMatrix,
}

/// Schedule JSON in the requested form.
pub fn export_unitaries(schedule: &UnitarySchedule, mode: ExportMode) -> Result<String> {
    match mode {
        ExportMode::Absolute => Ok(schedule.to_json()? + "\n"),
        ExportMode::Step => {
            let mut prev = 0.0;
            let records: Vec<StepRecord> = schedule
                .step_unitaries()
                .into_iter()
                .map(|(t, unitary)| {
                    let r = StepRecord {
                        t_start: prev,
                        t_end: t,
                        unitary,
                    };
                    prev = t;
                    r
                })
                .collect();
            to_json_string(&records)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn record(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn record_result(&mut self, name: &str, r: Result<String>) {
        match r {
            Ok(detail) => self.record(name, true, detail),
            Err(e) => self.record(name, false, e.to_string()),
        }
    }
}

/// Rows of a CSV written by this module, with the comment line skipped.
fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(csv_error)?;
    let header: Vec<String> = reader.headers().map_err(csv_error)?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_error)?;
        let row = rec
            .iter()
            .map(|f| if f.is_empty() { Ok(f64::NAN) } else { f.parse::<f64>() })
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    Ok((header, rows))
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("csv: {e}"))
}

fn column(header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::InvalidParameter(format!("missing column {name}")))
}

/// Inverse of `matrix_values`.
fn density_from_columns(d: usize, vals: &[f64]) -> Result<DensityMatrix> {
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)].re = vals[i];
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            m[(i, j)] = num_complex::Complex64::new(vals[k], vals[k + 1]);
            m[(j, i)] = m[(i, j)].conj();
            k += 2;
        }
    }
    DensityMatrix::new(m)
}

fn check_schedule(cfg: &ExperimentConfig, schedule: &UnitarySchedule) -> Result<String> {
    let grid = cfg.grid();
    if schedule.times() != grid {
        return Err(Error::InvalidParameter("schedule times differ from the configured grid".into()));
    }
    let dim = cfg.system_dim() * cfg.system_dim();
    let mut worst_gen: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    let mut worst_unit: f64 = 0.0;
    for e in schedule.entries() {
        if e.unitary.rows() != dim {
            return Err(Error::Dimension(format!("unitary is {0}x{0}, expected {dim}x{dim}", e.unitary.rows())));
        }
        worst_unit = worst_unit.max(e.unitary.unitarity_error());
        let u = expm_hermitian_generator(&crate::unitary::hermitian_from_params(&e.generator))?;
        worst_gen = worst_gen.max(u.max_abs_diff(&e.unitary));
        worst_res = worst_res.max(e.residual);
    }
    if worst_unit > UNITARITY_TOL {
        return Err(Error::NotUnitary(worst_unit));
    }
    if worst_gen > GENERATOR_TOL {
        return Err(Error::InvalidParameter(format!("exp(i generator) differs from unitary by {worst_gen:e}")));
    }
    if worst_res > RESIDUAL_TOL {
        return Err(Error::InvalidParameter(format!("fit residual {worst_res:e} exceeds {RESIDUAL_TOL:e}")));
    }
    Ok(format!(
        "{} entries, max unitarity error {worst_unit:e}, max residual {worst_res:e}",
        schedule.len()
    ))
}

fn check_trajectory(cfg: &ExperimentConfig, dir: &Path) -> Result<(String, f64)> {
    let (header, rows) = read_csv(&dir.join(TRAJECTORY_FILE))?;
    let d = cfg.system_dim();
    let cols = matrix_columns(d);
    let exact_idx = cols.iter().map(|c| column(&header, &format!("exact_{c}"))).collect::<Result<Vec<_>>>()?;
    let fit_idx = cols.iter().map(|c| column(&header, &format!("fit_{c}"))).collect::<Result<Vec<_>>>()?;
    let t_idx = column(&header, "t")?;
    let dist_idx = column(&header, "distance")?;
    if rows.len() != cfg.n_points {
        return Err(Error::InvalidParameter(format!("{} rows, expected {}", rows.len(), cfg.n_points)));
    }
    let times: Vec<f64> = rows.iter().map(|r| r[t_idx]).collect();
    let truth = exact_trajectory(cfg, &times)?;
    let mut worst_exact: f64 = 0.0;
    let mut worst_dist: f64 = 0.0;
    let mut sum = 0.0;
    for (row, truth) in rows.iter().zip(&truth) {
        let pick = |idx: &[usize]| idx.iter().map(|&i| row[i]).collect::<Vec<f64>>();
        let exact = density_from_columns(d, &pick(&exact_idx))?;
        let fit = density_from_columns(d, &pick(&fit_idx))?;
        worst_exact = worst_exact.max(exact.distance(truth));
        worst_dist = worst_dist.max((exact.distance(&fit) - row[dist_idx]).abs());
        sum += row[dist_idx];
    }
    if worst_exact > EXACT_TOL {
        return Err(Error::InvalidParameter(format!("exact columns deviate from propagation by {worst_exact:e}")));
    }
    if worst_dist > RECOMPUTE_TOL {
        return Err(Error::InvalidParameter(format!("distance column off by {worst_dist:e}")));
    }
    let mean = sum / rows.len() as f64;
    Ok((format!("{} rows are density matrices, exact columns reproduce", rows.len()), mean))
}

fn check_tomography(dir: &Path) -> Result<String> {
    let (header, rows) = read_csv(&dir.join(TOMOGRAPHY_FILE))?;
    let idx = ["rho00_re", "rho11_re", "rho01_re", "rho01_im"]
        .iter()
        .map(|c| column(&header, c))
        .collect::<Result<Vec<_>>>()?;
    for row in &rows {
        let vals: Vec<f64> = idx.iter().map(|&i| row[i]).collect();
        density_from_columns(2, &vals)?;
    }
    Ok(format!("{} reconstructed states are density matrices", rows.len()))
}

/// Invariant suite over a results directory written by `write_experiment`
/// (and optionally `write_tomography`).
pub fn validate_results(dir: &Path) -> ValidationReport {
    let mut report = ValidationReport::default();
    let cfg = match read_config(dir) {
        Ok(cfg) => {
            report.record("config", true, cfg.label());
            cfg
        }
        Err(e) => {
            report.record("config", false, e.to_string());
            return report;
        }
    };
    let schedule = read_schedule(&dir.join(SCHEDULE_FILE));
    report.record_result("schedule", schedule.and_then(|s| check_schedule(&cfg, &s)));

    let trajectory = check_trajectory(&cfg, dir);
    let mean = trajectory.as_ref().ok().map(|t| t.1);
    report.record_result("trajectory", trajectory.map(|t| t.0));

    let summary: Result<Summary> = fs::read_to_string(dir.join(SUMMARY_FILE))
        .map_err(Error::from)
        .and_then(|s| Ok(serde_json::from_str(&s)?));
    report.record_result(
        "summary",
        summary.and_then(|s| match mean {
            Some(m) if (m - s.mean_distance).abs() > RECOMPUTE_TOL => Err(Error::InvalidParameter(format!(
                "mean_distance {} disagrees with trajectory mean {m}",
                s.mean_distance
            ))),
            _ => Ok(format!("mean distance {:e}, max distance {:e}", s.mean_distance, s.max_distance)),
        }),
    );
    report.record(
        "schema",
        dir.join(SCHEMA_FILE).is_file(),
        format!("{SCHEMA_FILE} present"),
    );
    if dir.join(TOMOGRAPHY_FILE).is_file() {
        report.record_result("tomography", check_tomography(dir));
    }
    report
}

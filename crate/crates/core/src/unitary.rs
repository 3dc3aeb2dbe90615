//! Fitting system-bath unitaries `U = exp(i H)` that carry one purified state
//! onto another.
//!
//! The generator is a single Hermitian matrix on the joint space, so a
//! `D`-level joint space has `D^2` real parameters.

use log::debug;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use crate::bfgs::{bfgs_minimize, BfgsOptions, BfgsResult};
use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian_generator, hermitian_eig, ComplexMatrix, ComplexVector};
use crate::purification::PurifiedState;

const UNITARITY_TOL: f64 = 1e-10;

/// Real encoding of a `D x D` Hermitian matrix: the `D` diagonal entries, then
/// the real parts of the strict upper triangle (row-major), then their
/// imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianParams {
    dim: usize,
    values: Vec<f64>,
}

impl HermitianParams {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "{dim}x{dim} Hermitian matrix needs {} parameters, got {}",
                dim * dim,
                values.len()
            )));
        }
        Ok(HermitianParams { dim, values })
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianParams {
            dim,
            values: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, s: f64) -> HermitianParams {
        HermitianParams {
            dim: self.dim,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}

fn upper_pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim).flat_map(move |p| ((p + 1)..dim).map(move |q| (p, q)))
}

pub fn hermitian_from_params(p: &HermitianParams) -> ComplexMatrix {
    let d = p.dim;
    let off = d * (d - 1) / 2;
    let mut h = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = Complex64::new(p.values[i], 0.0);
    }
    for (k, (i, j)) in upper_pairs(d).enumerate() {
        let z = Complex64::new(p.values[d + k], p.values[d + off + k]);
        h[(i, j)] = z;
        h[(j, i)] = z.conj();
    }
    h
}

/// Inverse of [`hermitian_from_params`]; reads the diagonal real parts and the upper triangle.
pub fn params_from_hermitian(h: &ComplexMatrix) -> Result<HermitianParams> {
    if !h.is_square() {
        return Err(Error::Dimension("generator must be square".into()));
    }
    let d = h.rows();
    let off = d * (d - 1) / 2;
    let mut values = vec![0.0; d * d];
    for i in 0..d {
        values[i] = h[(i, i)].re;
    }
    for (k, (i, j)) in upper_pairs(d).enumerate() {
        values[d + k] = h[(i, j)].re;
        values[d + off + k] = h[(i, j)].im;
    }
    HermitianParams::new(d, values)
}

/// Divided difference of `exp(i x)` at `(a, b)`:
/// `(e^{ia} - e^{ib}) / (a - b) = i e^{i(a+b)/2} sinc((a-b)/2)`.
fn exp_divided_difference(a: f64, b: f64) -> Complex64 {
    let half = 0.5 * (a - b);
    let sinc = if half.abs() < 1e-8 {
        1.0 - half * half / 6.0
    } else {
        half.sin() / half
    };
    Complex64::new(0.0, sinc) * Complex64::from_polar(1.0, 0.5 * (a + b))
}

/// Value of `||target - exp(i H) psi0||^2` and its gradient in the parameter
/// encoding, from the Daleckii-Krein formula for the differential of `exp(i H)`.
fn squared_fit(dim: usize, x: &[f64], psi0: &ComplexVector, target: &ComplexVector) -> (f64, Vec<f64>) {
    let params = HermitianParams {
        dim,
        values: x.to_vec(),
    };
    let h = hermitian_from_params(&params);
    let eig = hermitian_eig(&h).expect("generator is Hermitian by construction");
    let v = &eig.vectors;
    let u = eig.reconstruct_with(|w| Complex64::from_polar(1.0, w));
    let r = target.sub(&u.apply(psi0));
    let value = r.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>();

    let vd = v.dagger();
    let a = vd.apply(&r);
    let b = vd.apply(psi0);
    let mut w = ComplexMatrix::zeros(dim, dim);
    for j in 0..dim {
        for k in 0..dim {
            w[(j, k)] = a[j].conj() * exp_divided_difference(eig.values[j], eig.values[k]) * b[k];
        }
    }
    // dg = -2 Re sum_pq E_pq G_pq with G = conj(V) W V^T.
    let g = v.conj().matmul(&w).matmul(&v.transpose());

    let off = dim * (dim - 1) / 2;
    let mut grad = vec![0.0; dim * dim];
    for p in 0..dim {
        grad[p] = -2.0 * g[(p, p)].re;
    }
    for (k, (p, q)) in upper_pairs(dim).enumerate() {
        grad[dim + k] = -2.0 * (g[(p, q)] + g[(q, p)]).re;
        grad[dim + off + k] = 2.0 * (g[(p, q)].im - g[(q, p)].im);
    }
    (value, grad)
}

fn check_dims(p: &HermitianParams, psi0: &PurifiedState, target: &PurifiedState) -> Result<()> {
    if psi0.dim() != target.dim() || p.dim != psi0.dim() {
        return Err(Error::Dimension(format!(
            "generator dim {}, initial state dim {}, target dim {}",
            p.dim,
            psi0.dim(),
            target.dim()
        )));
    }
    Ok(())
}

/// `||target - exp(i H(p)) psi0||` and its gradient with respect to `p`.
/// At a zero residual the gradient is reported as zero.
pub fn fit_objective(
    p: &HermitianParams,
    psi0: &PurifiedState,
    target: &PurifiedState,
) -> Result<(f64, Vec<f64>)> {
    check_dims(p, psi0, target)?;
    let (sq, grad) = squared_fit(p.dim, &p.values, psi0.amplitudes(), target.amplitudes());
    let value = sq.sqrt();
    if value == 0.0 {
        return Ok((0.0, vec![0.0; grad.len()]));
    }
    Ok((value, grad.iter().map(|g| g / (2.0 * value)).collect()))
}

/// One fitted unitary.
#[derive(Debug, Clone)]
pub struct UnitaryFit {
    pub time_label: f64,
    pub unitary: ComplexMatrix,
    pub generator: HermitianParams,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub bfgs: BfgsOptions,
    /// Required residual `||target - U psi0||`.
    pub tolerance: f64,
    /// Random restarts after the warm/zero start.
    pub restarts: usize,
    /// Restart generator entries are uniform in `[-restart_scale, restart_scale]`.
    pub restart_scale: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            bfgs: BfgsOptions::default(),
            tolerance: 1e-6,
            restarts: 5,
            restart_scale: 0.1,
            seed: 0,
        }
    }
}

/// Fits `U = exp(i H)` with `U psi0 ~ target`.
///
/// The squared residual is minimized (it is smooth at the optimum); the
/// reported residual is its square root. Starts from `warm_start` or the zero
/// generator, then from random generators.
pub fn solve_unitary(
    psi0: &PurifiedState,
    target: &PurifiedState,
    warm_start: Option<&HermitianParams>,
    time_label: f64,
    opts: &SolverOptions,
) -> Result<UnitaryFit> {
    let dim = psi0.dim();
    let start = warm_start.cloned().unwrap_or_else(|| HermitianParams::zeros(dim));
    check_dims(&start, psi0, target)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    let mut total_iterations = 0;
    for attempt in 0..=opts.restarts {
        let x0: Vec<f64> = if attempt == 0 {
            start.values.clone()
        } else {
            (0..dim * dim)
                .map(|_| opts.restart_scale * (2.0 * rng.gen::<f64>() - 1.0))
                .collect()
        };
        let res = bfgs_minimize(
            |x| squared_fit(dim, x, psi0.amplitudes(), target.amplitudes()),
            &x0,
            &opts.bfgs,
        );
        total_iterations += res.iterations;
        let residual = res.value.max(0.0).sqrt();
        if best.as_ref().is_none_or(|b| residual < b.0) {
            best = Some((residual, res.x, res.iterations));
        }
        if residual <= opts.tolerance {
            break;
        }
        debug!("solve_unitary: t = {time_label}, attempt {attempt} stalled at {residual:e}");
    }
    let (residual, x, _) = best.expect("at least one attempt");
    if residual > opts.tolerance {
        return Err(Error::NoConvergence {
            best: residual,
            attempts: opts.restarts + 1,
        });
    }
    let generator = HermitianParams::new(dim, x)?;
    let unitary = expm_hermitian_generator(&hermitian_from_params(&generator))?;
    let err = unitary.unitarity_error();
    if err > UNITARITY_TOL {
        return Err(Error::NotUnitary(err));
    }
    // Residual of the exported unitary, which may differ from the optimizer's in the last bits.
    let residual = target.amplitudes().sub(&unitary.apply(psi0.amplitudes())).norm();
    Ok(UnitaryFit {
        time_label,
        unitary,
        generator,
        residual,
        iterations: total_iterations,
    })
}

/// Fits ordered by strictly increasing time.
#[derive(Debug, Clone)]
pub struct UnitarySchedule {
    entries: Vec<UnitaryFit>,
    pub source_experiment: String,
}

/// One schedule entry in the exported JSON array.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleRecord {
    pub t: f64,
    pub unitary: ComplexMatrix,
    pub generator: ComplexMatrix,
    pub residual: f64,
}

impl UnitarySchedule {
    pub fn new(entries: Vec<UnitaryFit>, source_experiment: impl Into<String>) -> Result<Self> {
        if entries.windows(2).any(|w| !(w[1].time_label > w[0].time_label)) {
            return Err(Error::InvalidParameter(
                "schedule times must be strictly increasing".into(),
            ));
        }
        Ok(UnitarySchedule {
            entries,
            source_experiment: source_experiment.into(),
        })
    }

    pub fn entries(&self) -> &[UnitaryFit] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.time_label).collect()
    }

    pub fn to_records(&self) -> Vec<ScheduleRecord> {
        self.entries
            .iter()
            .map(|e| ScheduleRecord {
                t: e.time_label,
                unitary: e.unitary.clone(),
                generator: hermitian_from_params(&e.generator),
                residual: e.residual,
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_records())?)
    }

    /// Rebuilds a schedule from exported records, checking unitarity and the
    /// generator/unitary consistency.
    pub fn from_records(records: Vec<ScheduleRecord>, source: impl Into<String>) -> Result<Self> {
        let mut entries = Vec::with_capacity(records.len());
        for r in records {
            let err = r.unitary.unitarity_error();
            if err > UNITARITY_TOL {
                return Err(Error::NotUnitary(err));
            }
            r.generator.ensure_hermitian(1e-12)?;
            if r.generator.rows() != r.unitary.rows() {
                return Err(Error::Dimension("generator and unitary sizes differ".into()));
            }
            entries.push(UnitaryFit {
                time_label: r.t,
                generator: params_from_hermitian(&r.generator)?,
                unitary: r.unitary,
                residual: r.residual,
                iterations: 0,
            });
        }
        Self::new(entries, source)
    }

    pub fn from_json(json: &str, source: impl Into<String>) -> Result<Self> {
        let records: Vec<ScheduleRecord> = serde_json::from_str(json)?;
        Self::from_records(records, source)
    }

    /// Step-to-step unitaries `U(t_n, t_{n-1}) = U(t_n, 0) U(t_{n-1}, 0)^dagger`;
    /// the first entry is `U(t_0, 0)` itself.
    pub fn step_unitaries(&self) -> Vec<(f64, ComplexMatrix)> {
        let mut out = Vec::with_capacity(self.entries.len());
        let mut prev: Option<&ComplexMatrix> = None;
        for e in &self.entries {
            let step = match prev {
                None => e.unitary.clone(),
                Some(p) => e.unitary.matmul(&p.dagger()),
            };
            out.push((e.time_label, step));
            prev = Some(&e.unitary);
        }
        out
    }
}

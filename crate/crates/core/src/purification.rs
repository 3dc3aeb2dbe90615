//! Purification of density matrices into system-bath pure states.
//!
//! A purified state of a `d`-level system lives on `d * d` levels with
//! composite index `sys * d + bath`. Reshaping the amplitudes row-major gives
//! the `d x d` coefficient matrix `Psi[(sys, bath)]`, so that
//! `Tr_B |psi><psi| = Psi Psi^dagger` and `Tr_S |psi><psi| = Psi^T Psi^*`.

use log::debug;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bfgs::{bfgs_minimize, BfgsOptions};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_norm, hermitian_eig, ComplexMatrix, ComplexVector, Subsystem};
use crate::state::{DensityMatrix, DENSITY_TOL};

const NORM_TOL: f64 = 1e-12;

/// Unit vector on the `d * d` system-bath space.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PurifiedState {
    amplitudes: ComplexVector,
    #[serde(skip)]
    d_sys: usize,
}

impl PurifiedState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let n = amplitudes.dim();
        let d_sys = (n as f64).sqrt().round() as usize;
        if d_sys == 0 || d_sys * d_sys != n {
            return Err(Error::Dimension(format!(
                "purified state length {n} is not a perfect square"
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "purified state must have unit norm, got {norm}"
            )));
        }
        Ok(PurifiedState { amplitudes, d_sys })
    }

    /// Normalizes `amplitudes` before validating.
    pub fn from_unnormalized(amplitudes: ComplexVector) -> Result<Self> {
        let v = amplitudes
            .normalized()
            .ok_or_else(|| Error::InvalidParameter("zero purified state".into()))?;
        Self::new(v)
    }

    /// Product state `|sys> (x) |bath>` of computational basis states.
    pub fn product_basis(d: usize, sys: usize, bath: usize) -> Self {
        PurifiedState {
            amplitudes: ComplexVector::basis(d * d, sys * d + bath),
            d_sys: d,
        }
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn d_sys(&self) -> usize {
        self.d_sys
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.dim()
    }

    /// Coefficient matrix `Psi[(sys, bath)]`.
    pub fn coefficient_matrix(&self) -> ComplexMatrix {
        let d = self.d_sys;
        ComplexMatrix::from_vec(d, d, self.amplitudes.as_slice().to_vec())
            .expect("d x d amplitudes")
    }

    /// `|psi><psi|` on the joint space.
    pub fn joint_density(&self) -> ComplexMatrix {
        self.amplitudes.outer(&self.amplitudes)
    }
}

impl<'de> Deserialize<'de> for PurifiedState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = ComplexVector::deserialize(deserializer)?;
        PurifiedState::new(v).map_err(serde::de::Error::custom)
    }
}

/// Eigen-expansion `rho = sum_k w_k |psi_k><psi_k|`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Descending, non-negative, summing to one.
    pub weights: Vec<f64>,
    pub states: Vec<ComplexVector>,
    /// Total magnitude of negative eigenvalues clipped to zero.
    pub clipped: f64,
}

impl Spectrum {
    /// `gamma_kl = sqrt(w_k w_l)`, the coherence weights between eigen-components.
    pub fn coherence_weights(&self) -> Vec<Vec<f64>> {
        self.weights
            .iter()
            .map(|wk| self.weights.iter().map(|wl| (wk * wl).sqrt()).collect())
            .collect()
    }

    /// Von Neumann entropy `-sum w ln w` in nats.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.weights)
    }
}

fn entropy_of(weights: &[f64]) -> f64 {
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.ln())
        .sum()
}

pub fn spectral_decompose(rho: &DensityMatrix) -> Result<Spectrum> {
    let eig = hermitian_eig(&rho.matrix().hermitian_part())?;
    let mut clipped = 0.0;
    let mut weights = Vec::with_capacity(eig.values.len());
    for &w in &eig.values {
        if w < -DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {w:e}")));
        }
        if w < 0.0 {
            clipped += -w;
            weights.push(0.0);
        } else {
            weights.push(w);
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    if clipped > 0.0 {
        debug!("spectral_decompose: clipped {clipped:e} of negative weight");
    }
    let states = (0..weights.len()).map(|k| eig.vector(k)).collect();
    Ok(Spectrum {
        weights,
        states,
        clipped,
    })
}

/// Closed-form purification `sum_k sqrt(w_k) |psi_k> (x) |psi_k>`, with the
/// bath eigenvectors chosen equal to the system ones.
pub fn schmidt_purify(rho: &DensityMatrix) -> Result<PurifiedState> {
    let spec = spectral_decompose(rho)?;
    let d = rho.dim();
    let mut amps = ComplexVector::zeros(d * d);
    for (w, psi) in spec.weights.iter().zip(&spec.states) {
        if *w == 0.0 {
            continue;
        }
        amps = amps.add(&psi.kron(psi).scale(Complex64::new(w.sqrt(), 0.0)));
    }
    PurifiedState::from_unnormalized(amps)
}

fn reduced(state: &PurifiedState, over: Subsystem) -> ComplexMatrix {
    let psi = state.coefficient_matrix();
    match over {
        Subsystem::Bath => psi.matmul(&psi.dagger()),
        Subsystem::System => psi.transpose().matmul(&psi.conj()),
    }
}

/// Reduced density matrix of `|psi><psi|` after tracing out `over`.
pub fn contract(state: &PurifiedState, over: Subsystem) -> Result<DensityMatrix> {
    DensityMatrix::new(reduced(state, over).hermitian_part())
}

/// Entanglement entropy between system and bath, from the Schmidt spectrum.
pub fn entanglement_entropy(state: &PurifiedState) -> Result<f64> {
    let eig = hermitian_eig(&reduced(state, Subsystem::Bath).hermitian_part())?;
    let w: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    Ok(entropy_of(&w))
}

#[derive(Debug, Clone)]
pub struct PurificationResult {
    pub state: PurifiedState,
    /// `||rho - Tr_B||_F + ||rho - Tr_S||_F` at the returned state.
    pub objective_value: f64,
    /// `||Tr_S - Tr_B||_F` at the returned state.
    pub bath_match_residual: f64,
    pub attempts: usize,
}

#[derive(Debug, Clone)]
pub struct PurificationOptions {
    /// Attempts from random starts after the first one.
    pub restarts: usize,
    pub seed: u64,
    /// Uniform noise amplitude added to the closed-form start when no guess is supplied.
    pub perturbation: f64,
    pub bfgs: BfgsOptions,
    /// Accept immediately at or below this objective.
    pub target: f64,
    /// Best objective still reported as success once restarts are exhausted.
    pub accept: f64,
}

impl Default for PurificationOptions {
    fn default() -> Self {
        PurificationOptions {
            restarts: 5,
            seed: 0,
            perturbation: 1e-3,
            bfgs: BfgsOptions {
                grad_tol: 1e-15,
                max_iter: 2000,
                ..BfgsOptions::default()
            },
            target: 1e-8,
            accept: 1e-6,
        }
    }
}

/// Residual matrices `(Tr_B - rho, conj(Tr_S - rho))` written in terms of `Psi`:
/// `Psi Psi^dag - rho` and `Psi^dag Psi - rho^*`.
fn residuals(psi: &ComplexMatrix, target: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let a = psi.matmul(&psi.dagger()).sub(target);
    let b = psi.dagger().matmul(psi).sub(&target.conj());
    (a, b)
}

/// Objective `f(psi) = ||rho - Tr_B||_F + ||rho - Tr_S||_F` with `psi` normalized.
pub fn purification_objective(target: &DensityMatrix, state: &PurifiedState) -> f64 {
    let (a, b) = residuals(&state.coefficient_matrix(), target.matrix());
    frobenius_norm(&a) + frobenius_norm(&b)
}

/// Smooth surrogate minimized by the optimizer: the sum of squared residual
/// norms, over `2 d^2` real parameters (real parts then imaginary parts)
/// normalized inside the objective. Returns value and gradient.
pub fn squared_objective(target: &ComplexMatrix, x: &[f64]) -> (f64, Vec<f64>) {
    let n = x.len() / 2;
    let d = (n as f64).sqrt().round() as usize;
    let raw: Vec<Complex64> = (0..n).map(|i| Complex64::new(x[i], x[n + i])).collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return (f64::INFINITY, vec![0.0; x.len()]);
    }
    let psi_vec: Vec<Complex64> = raw.iter().map(|z| z / norm).collect();
    let psi = ComplexMatrix::from_vec(d, d, psi_vec.clone()).expect("d x d");
    let (a, b) = residuals(&psi, target);
    let value = frobenius_norm(&a).powi(2) + frobenius_norm(&b).powi(2);

    // Complex gradient w.r.t. psi (d/dRe + i d/dIm): 4 (A Psi + Psi B).
    let g = a.matmul(&psi).add(&psi.matmul(&b)).scale_re(4.0);
    let g = g.as_slice();
    // Project out the radial direction and undo the normalization.
    let radial: f64 = psi_vec.iter().zip(g).map(|(p, gi)| (p.conj() * gi).re).sum();
    let mut grad = vec![0.0; x.len()];
    for i in 0..n {
        let gi = (g[i] - psi_vec[i] * radial) / norm;
        grad[i] = gi.re;
        grad[n + i] = gi.im;
    }
    (value, grad)
}

fn to_params(v: &ComplexVector) -> Vec<f64> {
    let s = v.as_slice();
    s.iter().map(|z| z.re).chain(s.iter().map(|z| z.im)).collect()
}

fn from_params(x: &[f64]) -> ComplexVector {
    let n = x.len() / 2;
    ComplexVector::from_vec((0..n).map(|i| Complex64::new(x[i], x[n + i])).collect())
}

/// Finds a purification by numerical minimization of the symmetric
/// two-contraction objective, with restarts from random states.
pub fn optimize_purification(
    target: &DensityMatrix,
    initial_guess: Option<&PurifiedState>,
    opts: &PurificationOptions,
) -> Result<PurificationResult> {
    let d = target.dim();
    let n = d * d;
    if let Some(g) = initial_guess {
        if g.d_sys() != d {
            return Err(Error::Dimension(format!(
                "initial guess is for d = {}, target has d = {d}",
                g.d_sys()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let first = match initial_guess {
        Some(g) => to_params(g.amplitudes()),
        None => {
            let base = to_params(schmidt_purify(target)?.amplitudes());
            base.iter()
                .map(|v| v + opts.perturbation * (2.0 * rng.gen::<f64>() - 1.0))
                .collect()
        }
    };

    let tm = target.matrix().clone();
    let mut best: Option<PurificationResult> = None;
    for attempt in 0..=opts.restarts {
        let x0 = if attempt == 0 {
            first.clone()
        } else {
            to_params(&crate::random::random_state(&mut rng, n))
        };
        let res = bfgs_minimize(|x| squared_objective(&tm, x), &x0, &opts.bfgs);
        let state = PurifiedState::from_unnormalized(from_params(&res.x))?;
        let objective_value = purification_objective(target, &state);
        let bath_match_residual = frobenius_norm(
            &reduced(&state, Subsystem::System).sub(&reduced(&state, Subsystem::Bath)),
        );
        let candidate = PurificationResult {
            state,
            objective_value,
            bath_match_residual,
            attempts: attempt + 1,
        };
        if best
            .as_ref()
            .is_none_or(|b| candidate.objective_value < b.objective_value)
        {
            best = Some(candidate);
        }
        if objective_value <= opts.target {
            break;
        }
        debug!("optimize_purification: attempt {attempt} stalled at {objective_value:e}");
    }
    let mut best = best.expect("at least one attempt");
    best.attempts = best.attempts.max(1);
    if best.objective_value > opts.accept {
        return Err(Error::NoConvergence {
            best: best.objective_value,
            attempts: opts.restarts + 1,
        });
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::random::random_density;
    use crate::testutil::assert_close;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn pure_state_spectrum() {
        let s = spectral_decompose(&DensityMatrix::basis(2, 0)).unwrap();
        assert_eq!(s.weights, vec![1.0, 0.0]);
        assert_eq!(s.states[0], ComplexVector::basis(2, 0));
        assert_eq!(s.states[1], ComplexVector::basis(2, 1));
    }

    #[test]
    fn maximally_mixed_spectrum() {
        let rho = DensityMatrix::new(ComplexMatrix::identity(2).scale_re(0.5)).unwrap();
        let s = spectral_decompose(&rho).unwrap();
        assert_eq!(s.weights, vec![0.5, 0.5]);
        assert!(s.states[0].inner(&s.states[1]).norm() < 1e-15);
    }

    #[test]
    fn constructed_spectrum() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ComplexVector::from_vec(vec![c(r), c(r)]);
        let minus = ComplexVector::from_vec(vec![c(r), c(-r)]);
        let rho = plus.outer(&plus).scale_re(0.75).add(&minus.outer(&minus).scale_re(0.25));
        let s = spectral_decompose(&DensityMatrix::new(rho).unwrap()).unwrap();
        assert!((s.weights[0] - 0.75).abs() < 1e-15 && (s.weights[1] - 0.25).abs() < 1e-15);
        assert!(s.states[0].sub(&plus).norm() < 1e-15);
        assert!(s.states[1].sub(&minus).norm() < 1e-15);
        let g = s.coherence_weights();
        assert!((g[0][1] - (0.75f64 * 0.25).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tiny_negative_eigenvalues_are_clipped() {
        let rho = DensityMatrix::new(ComplexMatrix::diag(&[c(1.0 + 5e-11), c(-5e-11)])).unwrap();
        let s = spectral_decompose(&rho).unwrap();
        assert_eq!(s.weights, vec![1.0, 0.0]);
        assert!((s.clipped - 5e-11).abs() < 1e-20);
    }

    #[test]
    fn schmidt_examples() {
        let p = schmidt_purify(&DensityMatrix::basis(2, 0)).unwrap();
        assert_eq!(p, PurifiedState::product_basis(2, 0, 0));
        let mixed = DensityMatrix::new(ComplexMatrix::identity(2).scale_re(0.5)).unwrap();
        let bell = schmidt_purify(&mixed).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expect = ComplexVector::from_vec(vec![c(r), c(0.0), c(0.0), c(r)]);
        assert!(bell.amplitudes().sub(&expect).norm() < 1e-15);
        assert_close(contract(&bell, Subsystem::Bath).unwrap().matrix(), mixed.matrix(), 1e-15);
    }

    #[test]
    fn contract_product_and_bell() {
        let p = PurifiedState::product_basis(2, 0, 0);
        assert_eq!(contract(&p, Subsystem::Bath).unwrap(), DensityMatrix::basis(2, 0));
        let p = PurifiedState::product_basis(2, 1, 0);
        assert_eq!(contract(&p, Subsystem::Bath).unwrap(), DensityMatrix::basis(2, 1));
        assert_eq!(contract(&p, Subsystem::System).unwrap(), DensityMatrix::basis(2, 0));
    }

    #[test]
    fn round_trip_and_bath_mirror() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in [2, 3, 4] {
            for _ in 0..10 {
                let rho = random_density(&mut rng, d);
                let psi = schmidt_purify(&rho).unwrap();
                let back = contract(&psi, Subsystem::Bath).unwrap();
                assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
                let bath = contract(&psi, Subsystem::System).unwrap();
                let ws = hermitian_eig(rho.matrix()).unwrap().values;
                let wb = hermitian_eig(bath.matrix()).unwrap().values;
                for (a, b) in ws.iter().zip(&wb) {
                    assert!((a - b).abs() < 1e-10);
                }
                assert!(purification_objective(&rho, &psi) <= 1e-12);
                let s = spectral_decompose(&rho).unwrap();
                assert!((entanglement_entropy(&psi).unwrap() - s.entropy()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn squared_objective_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let rho = random_density(&mut rng, 2);
        let x: Vec<f64> = (0..8).map(|_| rng.gen::<f64>() - 0.5).collect();
        let (_, g) = squared_objective(rho.matrix(), &x);
        let h = 1e-6;
        for i in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (squared_objective(rho.matrix(), &xp).0 - squared_objective(rho.matrix(), &xm).0) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + fd.abs()), "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn optimizer_examples() {
        let opts = PurificationOptions::default();
        let res = optimize_purification(&DensityMatrix::basis(2, 0), None, &opts).unwrap();
        assert!(res.objective_value <= 1e-8);
        let mixed = DensityMatrix::new(ComplexMatrix::identity(2).scale_re(0.5)).unwrap();
        let res = optimize_purification(&mixed, None, &opts).unwrap();
        assert!(res.objective_value <= 1e-8);
        assert!(contract(&res.state, Subsystem::Bath).unwrap().distance(&mixed) <= 1e-8);
        assert!(res.bath_match_residual <= 1e-8);
    }

    #[test]
    fn optimizer_from_random_start_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let rho = random_density(&mut rng, 2);
        let guess = PurifiedState::new(crate::random::random_state(&mut rng, 4)).unwrap();
        let res = optimize_purification(&rho, Some(&guess), &PurificationOptions::default()).unwrap();
        let a = contract(&res.state, Subsystem::Bath).unwrap();
        let b = contract(&schmidt_purify(&rho).unwrap(), Subsystem::Bath).unwrap();
        assert!(a.distance(&rho) <= 1e-8 && b.distance(&rho) <= 1e-8);
    }

    #[test]
    fn rejects_non_square_length() {
        let v = ComplexVector::basis(3, 0);
        assert!(PurifiedState::new(v).is_err());
        let json = r#"{"dim":4,"re":[1.0,0.0,0.0,0.0],"im":[0.0,0.0,0.0,0.0]}"#;
        let p: PurifiedState = serde_json::from_str(json).unwrap();
        assert_eq!(p.d_sys(), 2);
        assert_eq!(serde_json::to_string(&p).unwrap(), json);
        let _ = pauli::x();
    }
}

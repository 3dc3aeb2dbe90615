//! Browser bindings for the static demo page in `www/`.
//!
//! Each export takes plain numbers and returns a JSON string, so the page
//! needs no serialization glue beyond `JSON.parse`. The `*_json` functions
//! hold the logic and are callable natively.

use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use purifier::experiment::{replay_schedule, run_experiment, ExperimentConfig};
use purifier::linalg::{ComplexMatrix, Subsystem};
use purifier::purification::{contract, schmidt_purify, spectral_decompose};
use purifier::shots::{bloch_vector, distance_stats};
use purifier::state::DensityMatrix;

/// Upper bound on grid points, to keep the page responsive.
const MAX_POINTS: usize = 400;
const MAX_SHOTS: u64 = 1_000_000;

#[derive(Serialize)]
struct Trajectory {
    t: Vec<f64>,
    exact_excited: Vec<f64>,
    fit_excited: Vec<f64>,
    exact_coherence: Vec<[f64; 2]>,
    fit_coherence: Vec<[f64; 2]>,
    distance: Vec<f64>,
    residual: Vec<f64>,
    mean_distance: f64,
    max_distance: f64,
}

#[derive(Serialize)]
struct Purification {
    weights: Vec<f64>,
    entropy: f64,
    purity: f64,
    amplitudes_re: Vec<f64>,
    amplitudes_im: Vec<f64>,
    round_trip_error: f64,
}

#[derive(Serialize)]
struct Tomography {
    t: Vec<f64>,
    exact_bloch: Vec<[f64; 3]>,
    measured_bloch: Vec<[f64; 3]>,
    distance: Vec<f64>,
    mean_distance: f64,
    std_distance: f64,
}

fn tls_config(delta: f64, omega: f64, gamma: f64, t_max: f64, n_points: usize) -> Result<ExperimentConfig, String> {
    if n_points > MAX_POINTS {
        return Err(format!("at most {MAX_POINTS} points"));
    }
    let cfg = ExperimentConfig {
        delta,
        omega,
        gamma,
        t_max,
        n_points,
        ..ExperimentConfig::tls()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Two-level system under drive and decay: exact populations and coherences
/// next to those reproduced by the fitted system-bath unitaries.
pub fn fit_trajectory_json(delta: f64, omega: f64, gamma: f64, t_max: f64, n_points: usize) -> Result<String, String> {
    let cfg = tls_config(delta, omega, gamma, t_max, n_points)?;
    let res = run_experiment(&cfg, 1).map_err(|e| e.to_string())?;
    let s = res.summary();
    let coh = |m: &ComplexMatrix| [m[(0, 1)].re, m[(0, 1)].im];
    to_json(&Trajectory {
        t: res.points.iter().map(|p| p.t).collect(),
        exact_excited: res.points.iter().map(|p| p.exact.matrix()[(1, 1)].re).collect(),
        fit_excited: res.points.iter().map(|p| p.reconstructed.matrix()[(1, 1)].re).collect(),
        exact_coherence: res.points.iter().map(|p| coh(p.exact.matrix())).collect(),
        fit_coherence: res.points.iter().map(|p| coh(p.reconstructed.matrix())).collect(),
        distance: res.points.iter().map(|p| p.distance).collect(),
        residual: res.points.iter().map(|p| p.fit.residual).collect(),
        mean_distance: s.mean_distance,
        max_distance: s.max_distance,
    })
}

/// Schmidt purification of the qubit state
/// `[[1 - p, c], [conj(c), p]]` with `c = coh_re + i coh_im`.
pub fn purify_qubit_json(p_excited: f64, coh_re: f64, coh_im: f64) -> Result<String, String> {
    let m = ComplexMatrix::from_vec(
        2,
        2,
        vec![
            (1.0 - p_excited).into(),
            Complex64::new(coh_re, coh_im),
            Complex64::new(coh_re, -coh_im),
            p_excited.into(),
        ],
    )
    .map_err(|e| e.to_string())?;
    let rho = DensityMatrix::new(m).map_err(|e| e.to_string())?;
    let spectrum = spectral_decompose(&rho).map_err(|e| e.to_string())?;
    let psi = schmidt_purify(&rho).map_err(|e| e.to_string())?;
    let back = contract(&psi, Subsystem::Bath).map_err(|e| e.to_string())?;
    to_json(&Purification {
        entropy: spectrum.entropy(),
        weights: spectrum.weights,
        purity: rho.purity(),
        amplitudes_re: psi.amplitudes().as_slice().iter().map(|z| z.re).collect(),
        amplitudes_im: psi.amplitudes().as_slice().iter().map(|z| z.im).collect(),
        round_trip_error: back.distance(&rho),
    })
}

/// Fits the two-level trajectory, then replays it with `shots` samples per
/// basis and reconstructs the qubit by tomography.
pub fn tomography_json(
    delta: f64,
    omega: f64,
    gamma: f64,
    t_max: f64,
    n_points: usize,
    shots: u64,
    seed: u64,
) -> Result<String, String> {
    if shots == 0 || shots > MAX_SHOTS {
        return Err(format!("shots must be in 1..={MAX_SHOTS}"));
    }
    let cfg = ExperimentConfig {
        shots: Some(shots),
        seed,
        ..tls_config(delta, omega, gamma, t_max, n_points)?
    };
    let res = run_experiment(&cfg, 1).map_err(|e| e.to_string())?;
    let schedule = res.schedule().map_err(|e| e.to_string())?;
    let outcomes = replay_schedule(&cfg, &schedule).map_err(|e| e.to_string())?;
    let (mean, std) = distance_stats(&outcomes);
    to_json(&Tomography {
        t: outcomes.iter().map(|o| o.t).collect(),
        exact_bloch: res.points.iter().map(|p| bloch_vector(&p.exact)).collect(),
        measured_bloch: outcomes.iter().map(|o| bloch_vector(&o.reconstructed_rho)).collect(),
        distance: outcomes.iter().map(|o| o.distance_to_exact).collect(),
        mean_distance: mean,
        std_distance: std,
    })
}

#[wasm_bindgen]
pub fn fit_trajectory(delta: f64, omega: f64, gamma: f64, t_max: f64, n_points: usize) -> Result<String, JsError> {
    fit_trajectory_json(delta, omega, gamma, t_max, n_points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn purify_qubit(p_excited: f64, coh_re: f64, coh_im: f64) -> Result<String, JsError> {
    purify_qubit_json(p_excited, coh_re, coh_im).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn tomography(
    delta: f64,
    omega: f64,
    gamma: f64,
    t_max: f64,
    n_points: usize,
    shots: u32,
    seed: u32,
) -> Result<String, JsError> {
    tomography_json(delta, omega, gamma, t_max, n_points, shots.into(), seed.into()).map_err(|e| JsError::new(&e))
}

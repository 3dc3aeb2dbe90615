//! Finite-shot replay of a unitary schedule with single-qubit tomography.
//!
//! Only the system qubit is measured; the bath qubit is marginalized exactly
//! before sampling. Each basis needs one circuit, so a time point costs three.
//!
//! Sampling uses ChaCha8 (`rand_chacha`) seeded with `seed_from_u64(seed)` and
//! the stream number set to the basis index (Z = 0, X = 1, Y = 2). A shot
//! reports outcome 1 when a uniform `f64` draw falls below `p(1)`, so counts
//! are exactly binomial and bit-reproducible on every platform.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, kron, pauli, ComplexMatrix, ONE};
use crate::purification::PurifiedState;
use crate::state::DensityMatrix;
use crate::unitary::UnitarySchedule;

const UNITARITY_TOL: f64 = 1e-10;
const NORM_DRIFT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    fn stream(self) -> u64 {
        match self {
            Basis::Z => 0,
            Basis::X => 1,
            Basis::Y => 2,
        }
    }

    /// Pre-measurement rotation: identity for Z, H for X, and S^dagger followed
    /// by H (the matrix `H S^dagger`) for Y. Each maps the +1 eigenstate of
    /// its Pauli onto `|0>`.
    pub fn rotation(self) -> ComplexMatrix {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let h = ComplexMatrix::from_real(2, 2, &[r, r, r, -r]).expect("finite");
        match self {
            Basis::Z => pauli::identity(),
            Basis::X => h,
            Basis::Y => {
                let s_dag = ComplexMatrix::diag(&[ONE, Complex64::new(0.0, -1.0)]);
                h.matmul(&s_dag)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotConfig {
    pub shots: u64,
    pub seed: u64,
}

impl ShotConfig {
    pub fn new(shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be >= 1".into()));
        }
        Ok(ShotConfig { shots, seed })
    }
}

/// Outcome counts for one basis, keyed by bitstring in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    #[serde(rename = "0")]
    pub zeros: u64,
    #[serde(rename = "1")]
    pub ones: u64,
}

impl Counts {
    pub fn total(&self) -> u64 {
        self.zeros + self.ones
    }

    /// `(n0 - n1) / shots`.
    pub fn expectation(&self) -> f64 {
        (self.zeros as f64 - self.ones as f64) / self.total() as f64
    }
}

/// `U |psi>`, renormalized if the norm drifts beyond 1e-12.
pub fn apply_unitary(u: &ComplexMatrix, psi: &PurifiedState) -> Result<PurifiedState> {
    if u.rows() != psi.dim() || u.cols() != psi.dim() {
        return Err(Error::Dimension(format!(
            "unitary is {}x{}, state has dimension {}",
            u.rows(),
            u.cols(),
            psi.dim()
        )));
    }
    let err = u.unitarity_error();
    if err > UNITARITY_TOL {
        return Err(Error::NotUnitary(err));
    }
    let out = u.apply(psi.amplitudes());
    if (out.norm() - 1.0).abs() > NORM_DRIFT {
        PurifiedState::from_unnormalized(out)
    } else {
        PurifiedState::new(out)
    }
}

fn require_qubit(psi: &PurifiedState) -> Result<()> {
    if psi.d_sys() != 2 {
        return Err(Error::Dimension(format!(
            "tomography needs a single system qubit, got d = {}",
            psi.d_sys()
        )));
    }
    Ok(())
}

/// Exact `(p0, p1)` for the system qubit after rotating into `basis`.
pub fn exact_probabilities(psi: &PurifiedState, basis: Basis) -> Result<(f64, f64)> {
    require_qubit(psi)?;
    let rotated = kron(&basis.rotation(), &pauli::identity()).apply(psi.amplitudes());
    let a = rotated.as_slice();
    let p0 = a[0].norm_sqr() + a[1].norm_sqr();
    let p1 = a[2].norm_sqr() + a[3].norm_sqr();
    let total = p0 + p1;
    Ok((p0 / total, p1 / total))
}

/// Draws `config.shots` measurement outcomes of the system qubit in `basis`.
pub fn measure_system_qubit(psi: &PurifiedState, basis: Basis, config: &ShotConfig) -> Result<Counts> {
    let (_, p1) = exact_probabilities(psi, basis)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(basis.stream());
    let ones = (0..config.shots).filter(|_| rng.gen::<f64>() < p1).count() as u64;
    Ok(Counts {
        zeros: config.shots - ones,
        ones,
    })
}

/// A reconstructed qubit state and whether it had to be projected back onto
/// the set of density matrices.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub rho: DensityMatrix,
    pub projected: bool,
}

/// `rho = (I + <X> X + <Y> Y + <Z> Z) / 2`, clipped to the nearest density
/// matrix when an eigenvalue is negative.
pub fn reconstruct_from_expectations(x: f64, y: f64, z: f64) -> Result<Reconstruction> {
    let raw = pauli::identity()
        .add(&pauli::x().scale_re(x))
        .add(&pauli::y().scale_re(y))
        .add(&pauli::z().scale_re(z))
        .scale_re(0.5);
    let eig = hermitian_eig(&raw)?;
    if eig.values.iter().all(|&w| w >= 0.0) {
        return Ok(Reconstruction {
            rho: DensityMatrix::new(raw)?,
            projected: false,
        });
    }
    let clipped: Vec<f64> = eig.values.iter().map(|w| w.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let mut k = 0;
    let rho = eig.reconstruct_with(|_| {
        let w = clipped[k] / total;
        k += 1;
        Complex64::new(w, 0.0)
    });
    log::debug!("reconstruct_qubit: projected Bloch vector ({x}, {y}, {z})");
    Ok(Reconstruction {
        rho: DensityMatrix::new(rho.hermitian_part())?,
        projected: true,
    })
}

pub fn reconstruct_qubit(z: &Counts, x: &Counts, y: &Counts) -> Result<Reconstruction> {
    let shots = z.total();
    if shots == 0 || x.total() != shots || y.total() != shots {
        return Err(Error::InvalidParameter(format!(
            "inconsistent shot totals: Z {}, X {}, Y {}",
            z.total(),
            x.total(),
            y.total()
        )));
    }
    reconstruct_from_expectations(x.expectation(), y.expectation(), z.expectation())
}

#[derive(Debug, Clone)]
pub struct TomographyOutcome {
    pub t: f64,
    /// Counts in Z, X, Y order; `None` in exact-probability mode.
    pub counts: Option<[Counts; 3]>,
    pub reconstructed_rho: DensityMatrix,
    pub distance_to_exact: f64,
    /// Seed used for this time point.
    pub seed: Option<u64>,
}

/// Replays `schedule` on `psi0`: for each time point, apply the unitary,
/// measure in Z, X and Y, reconstruct, and compare with `exact`.
/// With `config = None` the exact outcome probabilities replace sampling.
/// Time point `i` samples with seed `config.seed + i`.
pub fn run_tomography_experiment(
    schedule: &UnitarySchedule,
    psi0: &PurifiedState,
    exact: &[DensityMatrix],
    config: Option<&ShotConfig>,
) -> Result<Vec<TomographyOutcome>> {
    if schedule.len() != exact.len() {
        return Err(Error::Dimension(format!(
            "schedule has {} time points but the trajectory has {}",
            schedule.len(),
            exact.len()
        )));
    }
    require_qubit(psi0)?;
    schedule
        .entries()
        .iter()
        .zip(exact)
        .enumerate()
        .map(|(i, (entry, rho_exact))| {
            let psi = apply_unitary(&entry.unitary, psi0)?;
            let (rec, counts, seed) = match config {
                Some(cfg) => {
                    let point = ShotConfig {
                        shots: cfg.shots,
                        seed: cfg.seed.wrapping_add(i as u64),
                    };
                    let z = measure_system_qubit(&psi, Basis::Z, &point)?;
                    let x = measure_system_qubit(&psi, Basis::X, &point)?;
                    let y = measure_system_qubit(&psi, Basis::Y, &point)?;
                    (reconstruct_qubit(&z, &x, &y)?, Some([z, x, y]), Some(point.seed))
                }
                None => {
                    let expect = |b| exact_probabilities(&psi, b).map(|(p0, p1)| p0 - p1);
                    let (z, x, y) = (expect(Basis::Z)?, expect(Basis::X)?, expect(Basis::Y)?);
                    (reconstruct_from_expectations(x, y, z)?, None, None)
                }
            };
            Ok(TomographyOutcome {
                t: entry.time_label,
                counts,
                distance_to_exact: rec.rho.distance(rho_exact),
                reconstructed_rho: rec.rho,
                seed,
            })
        })
        .collect()
}

/// Mean and population standard deviation of the per-point distances.
pub fn distance_stats(outcomes: &[TomographyOutcome]) -> (f64, f64) {
    mean_std(outcomes.iter().map(|o| o.distance_to_exact))
}

pub(crate) fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// CSV with columns `t,rho00_re,rho01_re,rho01_im,rho11_re,distance,shots,seed`.
/// Exact-probability rows leave `shots` and `seed` empty.
pub fn tomography_csv(outcomes: &[TomographyOutcome], shots: Option<u64>) -> String {
    let mut out = String::from("t,rho00_re,rho01_re,rho01_im,rho11_re,distance,shots,seed\n");
    for o in outcomes {
        let m = o.reconstructed_rho.matrix();
        let shots = shots.map(|s| s.to_string()).unwrap_or_default();
        let seed = o.seed.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            o.t,
            m[(0, 0)].re,
            m[(0, 1)].re,
            m[(0, 1)].im,
            m[(1, 1)].re,
            o.distance_to_exact,
            shots,
            seed
        );
    }
    out
}

/// Bloch vector `(<X>, <Y>, <Z>)` of a qubit density matrix.
pub fn bloch_vector(rho: &DensityMatrix) -> [f64; 3] {
    let m = rho.matrix();
    [
        2.0 * m[(0, 1)].re,
        -2.0 * m[(0, 1)].im,
        (m[(0, 0)] - m[(1, 1)]).re,
    ]
}

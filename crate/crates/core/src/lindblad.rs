//! Exact reference dynamics: the Lindbladian superoperator, its exponential,
//! Kraus maps, and a Stinespring dilation used to cross-check Kraus maps.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    devectorize, expm, frobenius_norm, kron, partial_trace, vectorize, ComplexMatrix,
    ComplexVector, Subsystem, I, ONE,
};
use crate::state::{DensityMatrix, KrausSet};

const HAMILTONIAN_TOL: f64 = 1e-12;
const DRIFT_FLOOR: f64 = 1e-12;
const GRAM_SCHMIDT_TOL: f64 = 1e-12;
const ISOMETRY_TOL: f64 = 1e-10;

/// Hamiltonian and jump operators of a Markovian master equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindbladSpec {
    pub hamiltonian: ComplexMatrix,
    pub dissipators: Vec<ComplexMatrix>,
}

impl LindbladSpec {
    pub fn new(hamiltonian: ComplexMatrix, dissipators: Vec<ComplexMatrix>) -> Result<Self> {
        let spec = LindbladSpec {
            hamiltonian,
            dissipators,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.hamiltonian.rows();
        if !self.hamiltonian.is_square() {
            return Err(Error::Dimension("Hamiltonian must be square".into()));
        }
        self.hamiltonian.ensure_hermitian(HAMILTONIAN_TOL)?;
        if let Some(c) = self
            .dissipators
            .iter()
            .find(|c| c.rows() != d || c.cols() != d)
        {
            return Err(Error::Dimension(format!(
                "dissipator is {}x{} but the Hamiltonian is {d}x{d}",
                c.rows(),
                c.cols()
            )));
        }
        Ok(())
    }
}

/// Column-stacked Lindbladian
/// `L = -i I(x)H + i H^T(x)I + sum_k [ C_k^* (x) C_k - 1/2 I (x) C_k^dag C_k - 1/2 (C_k^T C_k^*) (x) I ]`.
pub fn build_lindbladian(spec: &LindbladSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    let d = spec.dim();
    let id = ComplexMatrix::identity(d);
    let h = &spec.hamiltonian;
    let mut l = kron(&id, h)
        .scale(-I)
        .add(&kron(&h.transpose(), &id).scale(I));
    for c in &spec.dissipators {
        let cdc = c.dagger().matmul(c);
        l = l
            .add(&kron(&c.conj(), c))
            .sub(&kron(&id, &cdc).scale_re(0.5))
            .sub(&kron(&c.transpose().matmul(&c.conj()), &id).scale_re(0.5));
    }
    Ok(l)
}

/// A propagated density matrix and the size of the cleanup applied to it.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub rho: DensityMatrix,
    /// `||rho_clean - rho_raw||_F`; zero when no cleanup was needed.
    pub correction: f64,
}

/// Propagates from t = 0 with a cached Lindbladian.
#[derive(Debug, Clone)]
pub struct Propagator {
    d: usize,
    lindbladian: ComplexMatrix,
}

impl Propagator {
    pub fn new(spec: &LindbladSpec) -> Result<Self> {
        Ok(Propagator {
            d: spec.dim(),
            lindbladian: build_lindbladian(spec)?,
        })
    }

    pub fn lindbladian(&self) -> &ComplexMatrix {
        &self.lindbladian
    }

    /// `devec(exp(L t) vec(rho0))`, computed fresh from t = 0.
    pub fn propagate(&self, rho0: &DensityMatrix, t: f64) -> Result<Propagation> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
        }
        if rho0.dim() != self.d {
            return Err(Error::Dimension(format!(
                "state has dimension {} but the Lindbladian acts on {}",
                rho0.dim(),
                self.d
            )));
        }
        if t == 0.0 {
            return Ok(Propagation {
                rho: rho0.clone(),
                correction: 0.0,
            });
        }
        let prop = expm(&self.lindbladian.scale_re(t));
        let raw = devectorize(&prop.apply(&vectorize(rho0.matrix())), self.d)?;
        let (clean, correction) = clean_density(raw);
        if correction > 0.0 {
            debug!("propagate: t = {t}, hermiticity/trace correction {correction:e}");
        }
        Ok(Propagation {
            rho: DensityMatrix::new(clean)?,
            correction,
        })
    }
}

/// Hermitizes and renormalizes the trace when drift exceeds the floor.
pub(crate) fn clean_density(raw: ComplexMatrix) -> (ComplexMatrix, f64) {
    let mut out = raw.clone();
    if out.hermiticity_error() > DRIFT_FLOOR {
        out = out.hermitian_part();
    }
    let tr = out.trace();
    if (tr.re - 1.0).abs() > DRIFT_FLOOR || tr.im.abs() > DRIFT_FLOOR {
        out = out.scale_re(1.0 / tr.re);
    }
    let correction = frobenius_norm(&out.sub(&raw));
    (out, correction)
}

pub fn propagate(spec: &LindbladSpec, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    Ok(Propagator::new(spec)?.propagate(rho0, t)?.rho)
}

/// `sum_k M_k rho M_k^dagger`.
pub fn apply_kraus(kraus: &KrausSet, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let err = kraus.completeness_error();
    if err > crate::state::KRAUS_COMPLETENESS_TOL {
        return Err(Error::IncompleteKraus(err));
    }
    if kraus.dim() != rho.dim() {
        return Err(Error::Dimension(format!(
            "Kraus operators act on {} levels, state has {}",
            kraus.dim(),
            rho.dim()
        )));
    }
    let d = rho.dim();
    let out = kraus.operators().iter().fold(ComplexMatrix::zeros(d, d), |acc, m| {
        acc.add(&m.matmul(rho.matrix()).matmul(&m.dagger()))
    });
    DensityMatrix::new(out.hermitian_part())
}

/// Output of a Stinespring dilation run.
#[derive(Debug, Clone)]
pub struct StinespringOutput {
    pub rho: DensityMatrix,
    /// Bath dimension used by the dilation: the number of Kraus operators.
    pub bath_dim: usize,
    /// The completed unitary on system (x) bath, composite index `sys * bath_dim + bath`.
    pub unitary: ComplexMatrix,
}

/// Unitary on `d * K` levels whose action on `|psi> (x) |0>` is
/// `sum_k M_k |psi> (x) |k>`; the remaining columns come from Gram-Schmidt
/// over the computational basis.
pub fn stinespring_unitary(kraus: &KrausSet) -> Result<ComplexMatrix> {
    let d = kraus.dim();
    let k = kraus.len();
    let n = d * k;
    let mut u = ComplexMatrix::zeros(n, n);
    let mut columns: Vec<ComplexVector> = Vec::with_capacity(n);

    // Isometry columns sit at composite indices (j, bath = 0).
    for j in 0..d {
        let mut v = ComplexVector::zeros(n);
        for (b, m) in kraus.operators().iter().enumerate() {
            for s in 0..d {
                v[s * k + b] = m[(s, j)];
            }
        }
        let residual = orthogonalize(&v, &columns);
        if (residual.norm() - 1.0).abs() > ISOMETRY_TOL {
            return Err(Error::GramSchmidtBreakdown(j * k));
        }
        columns.push(v);
    }

    // Complete with computational basis vectors. A candidate nearly inside the
    // current span is skipped; the squared residuals over all candidates sum to
    // the complement dimension, so some later candidate always clears 0.25 / n.
    let accept = 0.5 / (n as f64).sqrt();
    let mut fill = Vec::with_capacity(n - d);
    let mut candidate = 0;
    while columns.len() < n {
        if candidate == n {
            return Err(Error::GramSchmidtBreakdown(columns.len()));
        }
        let r = orthogonalize(&ComplexVector::basis(n, candidate), &columns);
        candidate += 1;
        if r.norm() > accept.max(GRAM_SCHMIDT_TOL) {
            let v = r.normalized().expect("nonzero residual");
            columns.push(v.clone());
            fill.push(v);
        }
    }

    let mut fill = fill.into_iter();
    for (j, isometry) in columns.iter().take(d).enumerate() {
        for b in 0..k {
            let col = if b == 0 {
                isometry.clone()
            } else {
                fill.next().expect("Gram-Schmidt produced n - d columns")
            };
            u.set_column(j * k + b, &col);
        }
    }
    Ok(u)
}

fn orthogonalize(v: &ComplexVector, basis: &[ComplexVector]) -> ComplexVector {
    let mut r = v.clone();
    for _ in 0..2 {
        for q in basis {
            r = r.sub(&q.scale(q.inner(&r)));
        }
    }
    r
}

/// Applies a Kraus channel through its dilation:
/// `Tr_B[ U (rho (x) |0><0|) U^dagger ]`.
pub fn stinespring_apply(kraus: &KrausSet, rho: &DensityMatrix) -> Result<StinespringOutput> {
    let err = kraus.completeness_error();
    if err > crate::state::KRAUS_COMPLETENESS_TOL {
        return Err(Error::IncompleteKraus(err));
    }
    if kraus.dim() != rho.dim() {
        return Err(Error::Dimension("Kraus set and state dimensions differ".into()));
    }
    let d = rho.dim();
    let k = kraus.len();
    let u = stinespring_unitary(kraus)?;
    let mut bath0 = ComplexMatrix::zeros(k, k);
    bath0[(0, 0)] = ONE;
    let joint = u.matmul(&kron(rho.matrix(), &bath0)).matmul(&u.dagger());
    let reduced = partial_trace(&joint, d, k, Subsystem::Bath)?;
    Ok(StinespringOutput {
        rho: DensityMatrix::new(reduced.hermitian_part())?,
        bath_dim: k,
        unitary: u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::random::{random_density, random_hermitian, random_kraus, random_matrix};
    use crate::testutil::assert_close;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn damping(gamma: f64) -> LindbladSpec {
        LindbladSpec::new(
            ComplexMatrix::zeros(2, 2),
            vec![pauli::lower().scale_re(gamma.sqrt())],
        )
        .unwrap()
    }

    fn ad_kraus(gamma: f64, t: f64) -> KrausSet {
        let e = (-gamma * t).exp();
        KrausSet::new(vec![
            ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, e.sqrt()]).unwrap(),
            ComplexMatrix::from_real(2, 2, &[0.0, (1.0 - e).sqrt(), 0.0, 0.0]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn empty_spec_gives_zero_superoperator() {
        let spec = LindbladSpec::new(ComplexMatrix::zeros(2, 2), vec![]).unwrap();
        assert_eq!(build_lindbladian(&spec).unwrap(), ComplexMatrix::zeros(4, 4));
    }

    #[test]
    fn damping_rates_at_origin() {
        // d/dt rho_11 = -gamma, d/dt rho_00 = +gamma for rho = |1><1|.
        let gamma = 0.1;
        let l = build_lindbladian(&damping(gamma)).unwrap();
        let rate = devectorize(&l.apply(&vectorize(DensityMatrix::basis(2, 1).matrix())), 2).unwrap();
        assert!((rate[(1, 1)].re + gamma).abs() < 1e-15);
        assert!((rate[(0, 0)].re - gamma).abs() < 1e-15);
        assert!(rate[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn trace_functional_annihilates_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in [2, 3, 4] {
            let spec = LindbladSpec::new(
                random_hermitian(&mut rng, d),
                (0..3).map(|_| random_matrix(&mut rng, d, d)).collect(),
            )
            .unwrap();
            let l = build_lindbladian(&spec).unwrap();
            let id = vectorize(&ComplexMatrix::identity(d));
            for col in 0..d * d {
                let v: num_complex::Complex64 =
                    (0..d * d).map(|r| id[r].conj() * l[(r, col)]).sum();
                assert!(v.norm() < 1e-12, "column {col}: {v}");
            }
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(&mut rng, 2);
        let out = propagate(&damping(0.3), &rho, 0.0).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn negative_time_rejected() {
        let rho = DensityMatrix::basis(2, 0);
        assert!(propagate(&damping(0.1), &rho, -1.0).is_err());
    }

    #[test]
    fn undriven_damping_matches_analytic_decay() {
        let gamma = 0.1;
        let spec = damping(gamma);
        let rho0 = DensityMatrix::basis(2, 1);
        for t in [0.5, 1.0, 5.0, 10.0, 40.0] {
            let rho = propagate(&spec, &rho0, t).unwrap();
            assert!((rho.matrix()[(1, 1)].re - (-gamma * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_system_keeps_purity() {
        let h = pauli::z().scale_re(-0.25).sub(&pauli::x().scale_re(0.25));
        let spec = LindbladSpec::new(h, vec![]).unwrap();
        let rho0 = DensityMatrix::basis(2, 1);
        for t in [0.3, 2.0, 9.7] {
            let rho = propagate(&spec, &rho0, t).unwrap();
            assert!((rho.purity() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn semigroup_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let spec = LindbladSpec::new(
            random_hermitian(&mut rng, 3),
            vec![random_matrix(&mut rng, 3, 3).scale_re(0.3)],
        )
        .unwrap();
        let rho = random_density(&mut rng, 3);
        let p = Propagator::new(&spec).unwrap();
        let direct = p.propagate(&rho, 1.7).unwrap().rho;
        let mid = p.propagate(&rho, 0.6).unwrap().rho;
        let two_step = p.propagate(&mid, 1.1).unwrap().rho;
        assert!(direct.distance(&two_step) < 1e-10);
    }

    #[test]
    fn kraus_identity_and_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(&mut rng, 2);
        let id = KrausSet::new(vec![ComplexMatrix::identity(2)]).unwrap();
        assert_close(apply_kraus(&id, &rho).unwrap().matrix(), rho.matrix(), 1e-15);
        assert_close(apply_kraus(&ad_kraus(0.1, 0.0), &rho).unwrap().matrix(), rho.matrix(), 1e-15);
        let late = apply_kraus(&ad_kraus(0.1, 1e4), &rho).unwrap();
        assert_close(late.matrix(), DensityMatrix::basis(2, 0).matrix(), 1e-15);
    }

    #[test]
    fn kraus_matches_lindblad_for_damping() {
        let gamma = 0.1;
        let spec = damping(gamma);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho0 = random_density(&mut rng, 2);
        for t in [0.2, 1.0, 3.3, 10.0] {
            let a = propagate(&spec, &rho0, t).unwrap();
            let b = apply_kraus(&ad_kraus(gamma, t), &rho0).unwrap();
            assert!(a.distance(&b) < 1e-10);
        }
    }

    #[test]
    fn stinespring_identity_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = random_density(&mut rng, 2);
        let id = KrausSet::new(vec![ComplexMatrix::identity(2)]).unwrap();
        let out = stinespring_apply(&id, &rho).unwrap();
        assert_eq!(out.bath_dim, 1);
        assert_close(out.rho.matrix(), rho.matrix(), 1e-14);
    }

    #[test]
    fn stinespring_matches_kraus() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let rho = random_density(&mut rng, 2);
        let ad = ad_kraus(1.0, 0.5);
        let out = stinespring_apply(&ad, &rho).unwrap();
        assert_eq!(out.bath_dim, 2);
        assert!(out.unitary.unitarity_error() < 1e-12);
        assert!(out.rho.matrix().max_abs_diff(apply_kraus(&ad, &rho).unwrap().matrix()) < 1e-10);
        for k in 1..=4 {
            let set = random_kraus(&mut rng, 2, k);
            let a = stinespring_apply(&set, &rho).unwrap();
            let b = apply_kraus(&set, &rho).unwrap();
            assert!(a.rho.matrix().max_abs_diff(b.matrix()) < 1e-10);
        }
    }
}

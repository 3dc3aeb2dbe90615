//! Validated state and channel types shared by the dynamics modules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_norm, hermitian_eig, ComplexMatrix, ComplexVector};

/// Tolerance for the Hermiticity, trace and positivity checks on density matrices.
pub const DENSITY_TOL: f64 = 1e-10;
/// Tolerance on `||sum_k M_k^dagger M_k - I||_F`.
pub const KRAUS_COMPLETENESS_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        check_density(&m)?;
        Ok(DensityMatrix(m))
    }

    /// `|psi><psi|` for a normalized `psi`.
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        let psi = psi
            .normalized()
            .ok_or_else(|| Error::InvalidDensityMatrix("zero state vector".into()))?;
        Self::new(psi.outer(&psi))
    }

    /// Computational basis projector `|k><k|`.
    pub fn basis(d: usize, k: usize) -> Self {
        DensityMatrix(ComplexVector::basis(d, k).outer(&ComplexVector::basis(d, k)))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn purity(&self) -> f64 {
        self.0.matmul(&self.0).trace().re
    }

    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        frobenius_norm(&self.0.sub(&other.0))
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(deserializer)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

fn check_density(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "density matrix must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let herm = m.hermiticity_error();
    if herm > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!(
            "not Hermitian (deviation {herm:e})"
        )));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!("trace is {tr}")));
    }
    let eig = hermitian_eig(&m.hermitian_part())?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!(
            "negative eigenvalue {min:e}"
        )));
    }
    Ok(())
}

/// Kraus representation `rho -> sum_k M_k rho M_k^dagger` of a channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrausSet {
    #[serde(rename = "kraus")]
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let d = operators
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus set".into()))?
            .rows();
        if operators.iter().any(|m| m.rows() != d || m.cols() != d) {
            return Err(Error::Dimension("Kraus operators must share one square shape".into()));
        }
        let set = KrausSet { operators };
        let err = set.completeness_error();
        if err > KRAUS_COMPLETENESS_TOL {
            return Err(Error::IncompleteKraus(err));
        }
        Ok(set)
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn completeness_error(&self) -> f64 {
        let d = self.operators[0].rows();
        let sum = self
            .operators
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, m| acc.add(&m.dagger().matmul(m)));
        frobenius_norm(&sum.sub(&ComplexMatrix::identity(d)))
    }
}

impl<'de> Deserialize<'de> for KrausSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            kraus: Vec<ComplexMatrix>,
        }
        let r = Repr::deserialize(deserializer)?;
        KrausSet::new(r.kraus).map_err(serde::de::Error::custom)
    }
}

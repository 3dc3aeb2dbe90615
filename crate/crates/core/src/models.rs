//! Model systems: a driven two-level system under amplitude damping and the
//! damped transverse-field Ising chain.
//!
//! Basis convention: `|0>` is the ground state and `|1>` the excited state,
//! `sigma_z = diag(1, -1)` and `sigma_- = |0><1|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::LindbladSpec;
use crate::linalg::{kron, pauli, ComplexMatrix};
use crate::state::{DensityMatrix, KrausSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsParams {
    pub delta: f64,
    pub omega: f64,
    pub gamma: f64,
}

impl TlsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !self.delta.is_finite() || !self.omega.is_finite() || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter("TLS parameters must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfimParams {
    pub sites: usize,
    #[serde(rename = "J")]
    pub coupling_j: f64,
    #[serde(rename = "h")]
    pub field_h: f64,
    pub gamma: f64,
}

impl TfimParams {
    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::InvalidParameter(format!(
                "TFIM needs at least 2 sites, got {}",
                self.sites
            )));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !self.coupling_j.is_finite() || !self.field_h.is_finite() || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter("TFIM parameters must be finite".into()));
        }
        Ok(())
    }
}

/// `H = -(delta/2) sigma_z - (omega/2) sigma_x` with a single jump operator `sqrt(gamma) sigma_-`.
pub fn tls_lindblad(p: &TlsParams) -> Result<LindbladSpec> {
    p.validate()?;
    let h = pauli::z()
        .scale_re(-p.delta / 2.0)
        .sub(&pauli::x().scale_re(p.omega / 2.0));
    LindbladSpec::new(h, vec![pauli::lower().scale_re(p.gamma.sqrt())])
}

/// Amplitude-damping Kraus pair at time `t`:
/// `M0 = diag(1, sqrt(e^{-gamma t}))`, `M1 = sqrt(1 - e^{-gamma t}) |0><1|`.
pub fn tls_kraus(p: &TlsParams, t: f64) -> Result<KrausSet> {
    p.validate()?;
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let decay = (-p.gamma * t).exp();
    let m0 = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, decay.sqrt()])?;
    let m1 = ComplexMatrix::from_real(2, 2, &[0.0, (1.0 - decay).sqrt(), 0.0, 0.0])?;
    KrausSet::new(vec![m0, m1])
}

/// Single-site operator lifted onto an open chain of `sites` qubits.
fn site_operator(op: &ComplexMatrix, site: usize, sites: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::identity(1);
    for s in 0..sites {
        let factor = if s == site { op.clone() } else { pauli::identity() };
        out = kron(&out, &factor);
    }
    out
}

/// `H = J sum_i Z_i Z_{i+1} - h sum_i X_i` with open boundaries, one jump
/// operator `sqrt(gamma) sigma_-^i` per site. Site 0 is the leftmost tensor factor.
pub fn tfim_lindblad(p: &TfimParams) -> Result<LindbladSpec> {
    p.validate()?;
    let n = p.sites;
    let dim = 1 << n;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for i in 0..n - 1 {
        let zz = site_operator(&pauli::z(), i, n).matmul(&site_operator(&pauli::z(), i + 1, n));
        h = h.add(&zz.scale_re(p.coupling_j));
    }
    for i in 0..n {
        h = h.sub(&site_operator(&pauli::x(), i, n).scale_re(p.field_h));
    }
    let jumps = (0..n)
        .map(|i| site_operator(&pauli::lower(), i, n).scale_re(p.gamma.sqrt()))
        .collect();
    LindbladSpec::new(h, jumps)
}

/// All sites excited: `|1...1><1...1|`.
pub fn all_excited(sites: usize) -> DensityMatrix {
    let dim = 1 << sites;
    DensityMatrix::basis(dim, dim - 1)
}

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Dense complex vector. Serializes as `{"dim": n, "re": [...], "im": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorRepr", into = "VectorRepr")]
pub struct ComplexVector {
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<ComplexVector> for VectorRepr {
    fn from(v: ComplexVector) -> Self {
        VectorRepr {
            dim: v.dim(),
            re: v.data.iter().map(|z| z.re).collect(),
            im: v.data.iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<VectorRepr> for ComplexVector {
    type Error = Error;

    fn try_from(r: VectorRepr) -> Result<Self> {
        if r.re.len() != r.dim || r.im.len() != r.dim {
            return Err(Error::Dimension(format!(
                "vector of dim {} has {} real and {} imaginary parts",
                r.dim,
                r.re.len(),
                r.im.len()
            )));
        }
        let data: Vec<_> = r
            .re
            .into_iter()
            .zip(r.im)
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("vector has non-finite entries".into()));
        }
        Ok(ComplexVector { data })
    }
}

impl ComplexVector {
    pub fn zeros(dim: usize) -> Self {
        ComplexVector {
            data: vec![ZERO; dim],
        }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[k] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_vec(data: Vec<Complex64>) -> Self {
        ComplexVector { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|self><other|`.
    pub fn outer(&self, other: &ComplexVector) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim(), other.dim());
        for (i, a) in self.data.iter().enumerate() {
            for (j, b) in other.data.iter().enumerate() {
                m[(i, j)] = a * b.conj();
            }
        }
        m
    }

    pub fn kron(&self, other: &ComplexVector) -> ComplexVector {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                out.push(a * b);
            }
        }
        ComplexVector { data: out }
    }

    pub fn scale(&self, s: Complex64) -> ComplexVector {
        ComplexVector {
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), other.dim());
        ComplexVector {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), other.dim());
        ComplexVector {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Returns `self / ||self||`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<ComplexVector> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(Complex64::new(1.0 / n, 0.0)))
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.data[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let v = ComplexVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, -0.8)]);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"{"dim":2,"re":[0.6,0.0],"im":[0.0,-0.8]}"#);
        assert_eq!(serde_json::from_str::<ComplexVector>(&json).unwrap(), v);
        assert!(serde_json::from_str::<ComplexVector>(r#"{"dim":3,"re":[1.0],"im":[0.0]}"#).is_err());
    }

    #[test]
    fn zero_vector_has_no_normalization() {
        assert!(ComplexVector::zeros(3).normalized().is_none());
    }
}

//! Matrix exponentials.

use num_complex::Complex64;

use super::{hermitian_eig, solve, ComplexMatrix};
use crate::error::Result;

const PADE_DEGREE: usize = 6;
const SCALED_NORM_BOUND: f64 = 0.5;

/// Coefficients of the diagonal [6/6] Padé approximant to exp:
/// `c_k = (2m - k)! m! / ((2m)! k! (m - k)!)`.
fn pade_coefficients() -> [f64; PADE_DEGREE + 1] {
    let m = PADE_DEGREE;
    let mut c = [0.0; PADE_DEGREE + 1];
    c[0] = 1.0;
    for k in 1..=m {
        c[k] = c[k - 1] * (m + 1 - k) as f64 / (k * (2 * m + 1 - k)) as f64;
    }
    c
}

/// General matrix exponential by scaling and squaring with a fixed degree-6
/// Padé approximant. The scaling exponent `s` is the smallest with
/// `||a / 2^s||_1 <= 0.5`.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    assert!(a.is_square(), "expm of a non-square matrix");
    let n = a.rows();
    let norm = a.norm_1();
    let mut s = 0i32;
    if norm > SCALED_NORM_BOUND {
        s = (norm / SCALED_NORM_BOUND).log2().ceil() as i32;
        s = s.max(0);
    }
    let scaled = a.scale_re(0.5f64.powi(s));

    let c = pade_coefficients();
    let ident = ComplexMatrix::identity(n);
    let mut power = ident.clone();
    let mut num = ident.scale_re(c[0]);
    let mut den = ident.scale_re(c[0]);
    for (k, ck) in c.iter().enumerate().skip(1) {
        power = power.matmul(&scaled);
        let term = power.scale_re(*ck);
        num = num.add(&term);
        den = if k % 2 == 0 { den.add(&term) } else { den.sub(&term) };
    }
    // The denominator is well conditioned for ||a||_1 <= 0.5.
    let mut result = solve(&den, &num).expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..s {
        result = result.matmul(&result);
    }
    result
}

/// `exp(i h)` for Hermitian `h`, via the eigendecomposition `h = V diag(w) V^dagger`.
pub fn expm_hermitian_generator(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    Ok(eig.reconstruct_with(|w| Complex64::from_polar(1.0, w)))
}

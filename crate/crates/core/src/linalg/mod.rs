//! Dense complex linear algebra for the small operators used throughout the
//! crate (system dimension up to 4, superoperators up to 16x16).
//!
//! Vectorization convention: column stacking. A d x d matrix `rho` maps to the
//! length d^2 vector whose entry `j * d + i` is `rho[(i, j)]`, so that
//! `vec(A * rho * B) = kron(B^T, A) * vec(rho)`. The Lindbladian superoperator
//! in [`crate::lindblad`] is written in this convention.

mod eig;
mod expm;
mod matrix;
mod vector;

pub use eig::{hermitian_eig, Eigh};
pub use expm::{expm, expm_hermitian_generator};
pub use matrix::ComplexMatrix;
pub use vector::ComplexVector;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which factor of a bipartite space a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    System,
    Bath,
}

/// Kronecker product: `kron(a, b)[(i * b.rows + k, j * b.cols + l)] = a[(i, j)] * b[(k, l)]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out[(i * b.rows() + k, j * b.cols() + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Partial trace of an operator on a `d_sys * d_bath` space.
///
/// Composite indices are `sys * d_bath + bath`; the system is the slow index.
pub fn partial_trace(
    rho_sb: &ComplexMatrix,
    d_sys: usize,
    d_bath: usize,
    over: Subsystem,
) -> Result<ComplexMatrix> {
    let n = d_sys * d_bath;
    if rho_sb.rows() != n || rho_sb.cols() != n {
        return Err(Error::Dimension(format!(
            "partial trace expects {n}x{n}, got {}x{}",
            rho_sb.rows(),
            rho_sb.cols()
        )));
    }
    let out = match over {
        Subsystem::Bath => {
            let mut out = ComplexMatrix::zeros(d_sys, d_sys);
            for i in 0..d_sys {
                for j in 0..d_sys {
                    let mut acc = ZERO;
                    for b in 0..d_bath {
                        acc += rho_sb[(i * d_bath + b, j * d_bath + b)];
                    }
                    out[(i, j)] = acc;
                }
            }
            out
        }
        Subsystem::System => {
            let mut out = ComplexMatrix::zeros(d_bath, d_bath);
            for i in 0..d_bath {
                for j in 0..d_bath {
                    let mut acc = ZERO;
                    for s in 0..d_sys {
                        acc += rho_sb[(s * d_bath + i, s * d_bath + j)];
                    }
                    out[(i, j)] = acc;
                }
            }
            out
        }
    };
    Ok(out)
}

/// Column-stacking vectorization of a square matrix.
pub fn vectorize(a: &ComplexMatrix) -> ComplexVector {
    let mut out = Vec::with_capacity(a.rows() * a.cols());
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            out.push(a[(i, j)]);
        }
    }
    ComplexVector::from_vec(out)
}

/// Inverse of [`vectorize`] for a `d x d` matrix.
pub fn devectorize(v: &ComplexVector, d: usize) -> Result<ComplexMatrix> {
    if v.dim() != d * d {
        return Err(Error::Dimension(format!(
            "cannot devectorize length {} into {d}x{d}",
            v.dim()
        )));
    }
    let mut out = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            out[(i, j)] = v[j * d + i];
        }
    }
    Ok(out)
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solve `a * x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    if a.cols() != n || b.rows() != n {
        return Err(Error::Dimension(format!(
            "solve: {}x{} system with {}x{} right-hand side",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let m = b.cols();
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| lu[(r, col)].norm().total_cmp(&lu[(s, col)].norm()))
            .unwrap_or(col);
        if lu[(pivot, col)].norm() == 0.0 {
            return Err(Error::Singular);
        }
        if pivot != col {
            lu.swap_rows(pivot, col);
            x.swap_rows(pivot, col);
        }
        let inv = ONE / lu[(col, col)];
        for r in (col + 1)..n {
            let factor = lu[(r, col)] * inv;
            if factor == ZERO {
                continue;
            }
            for c in col..n {
                let v = lu[(col, c)];
                lu[(r, c)] -= factor * v;
            }
            for c in 0..m {
                let v = x[(col, c)];
                x[(r, c)] -= factor * v;
            }
        }
    }
    for col in (0..n).rev() {
        let inv = ONE / lu[(col, col)];
        for c in 0..m {
            let mut acc = x[(col, c)];
            for k in (col + 1)..n {
                acc -= lu[(col, k)] * x[(k, c)];
            }
            x[(col, c)] = acc * inv;
        }
    }
    Ok(x)
}

/// Pauli matrices and ladder operators in the basis |0> = ground, |1> = excited.
pub mod pauli {
    use super::{ComplexMatrix, I, ONE, ZERO};

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[[ZERO, -I], [I, ZERO]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[[ONE, ZERO], [ZERO, -ONE]])
    }

    /// Lowering operator |0><1|.
    pub fn lower() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[[ZERO, ONE], [ZERO, ZERO]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{assert_close, random_hermitian, random_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn kron_identity_and_diagonal() {
        assert_eq!(kron(&pauli::identity(), &pauli::identity()), ComplexMatrix::identity(4));
        let zz = kron(&pauli::z(), &pauli::z());
        assert_eq!(zz, ComplexMatrix::diag(&[c(1.0), c(-1.0), c(-1.0), c(1.0)]));
    }

    #[test]
    fn kron_block_structure() {
        let xi = kron(&pauli::x(), &pauli::identity());
        for i in 0..4 {
            for j in 0..4 {
                let expect = if (i + 2) % 4 == j { ONE } else { ZERO };
                assert_eq!(xi[(i, j)], expect, "({i},{j})");
            }
        }
    }

    #[test]
    fn kron_associative_on_integer_matrices() {
        let a = ComplexMatrix::from_rows(&[[c(1.0), c(2.0)], [c(-3.0), I]]);
        let b = ComplexMatrix::from_rows(&[[c(0.0), c(5.0)], [c(1.0), c(1.0)]]);
        let cc = pauli::y();
        assert_eq!(kron(&kron(&a, &b), &cc), kron(&a, &kron(&b, &cc)));
    }

    #[test]
    fn kron_associative_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 2, 3);
        let b = random_matrix(&mut rng, 3, 2);
        let cc = random_matrix(&mut rng, 2, 2);
        assert_close(&kron(&kron(&a, &b), &cc), &kron(&a, &kron(&b, &cc)), 1e-14);
    }

    #[test]
    fn partial_trace_examples() {
        let mut zero2 = ComplexMatrix::zeros(4, 4);
        zero2[(0, 0)] = ONE;
        let mut ground = ComplexMatrix::zeros(2, 2);
        ground[(0, 0)] = ONE;
        assert_eq!(partial_trace(&zero2, 2, 2, Subsystem::Bath).unwrap(), ground);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = ComplexVector::from_vec(vec![c(s), ZERO, ZERO, c(s)]);
        let rho = bell.outer(&bell);
        let half = ComplexMatrix::identity(2).scale(c(0.5));
        assert_close(&partial_trace(&rho, 2, 2, Subsystem::Bath).unwrap(), &half, 1e-15);
        assert_close(&partial_trace(&rho, 2, 2, Subsystem::System).unwrap(), &half, 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dimensions() {
        let rho = ComplexMatrix::identity(3);
        assert!(matches!(
            partial_trace(&rho, 2, 2, Subsystem::Bath),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (da, db) in [(2, 2), (2, 3), (4, 2)] {
            let a = random_matrix(&mut rng, da, da);
            let b = random_matrix(&mut rng, db, db);
            let pt = partial_trace(&kron(&a, &b), da, db, Subsystem::Bath).unwrap();
            assert_close(&pt, &a.scale(b.trace()), 1e-13);
            let pt = partial_trace(&kron(&a, &b), da, db, Subsystem::System).unwrap();
            assert_close(&pt, &b.scale(a.trace()), 1e-13);
        }
    }

    #[test]
    fn vectorization_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2, 4] {
            let a = random_matrix(&mut rng, d, d);
            let b = random_matrix(&mut rng, d, d);
            let rho = random_hermitian(&mut rng, d);
            let lhs = vectorize(&a.matmul(&rho).matmul(&b));
            let rhs = kron(&b.transpose(), &a).apply(&vectorize(&rho));
            assert!(lhs.sub(&rhs).norm() <= 1e-13);
            assert_eq!(devectorize(&vectorize(&a), d).unwrap(), a);
        }
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_norm(&ComplexMatrix::zeros(2, 2)), 0.0);
        assert_eq!(frobenius_norm(&ComplexMatrix::identity(4)), 2.0);
        let m = pauli::x().add(&pauli::y().scale(I));
        assert_eq!(m, ComplexMatrix::from_rows(&[[ZERO, c(2.0)], [ZERO, ZERO]]));
        assert_eq!(frobenius_norm(&m), 2.0);
    }

    #[test]
    fn solve_recovers_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_matrix(&mut rng, 5, 5);
        let x = random_matrix(&mut rng, 5, 2);
        let b = a.matmul(&x);
        assert_close(&solve(&a, &b).unwrap(), &x, 1e-12);
        assert!(matches!(
            solve(&ComplexMatrix::zeros(2, 2), &ComplexMatrix::identity(2)),
            Err(Error::Singular)
        ));
    }
}

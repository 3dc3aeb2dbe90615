//! Seeded random operators for tests, demos and cross-checks.

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::state::{DensityMatrix, KrausSet};

/// Standard normal deviate by Box-Muller; keeps the sampler portable.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Matrix with i.i.d. complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols)
        .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
        .collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("finite gaussian entries")
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    random_matrix(rng, n, n).hermitian_part()
}

/// Unit vector drawn uniformly from the complex sphere.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexVector {
    let v = ComplexVector::from_vec(
        (0..dim)
            .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
            .collect(),
    );
    v.normalized().expect("gaussian vector is nonzero")
}

/// Full-rank density matrix `A A^dagger / tr(A A^dagger)`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    let a = random_matrix(rng, d, d);
    let aa = a.matmul(&a.dagger());
    let tr = aa.trace().re;
    DensityMatrix::new(aa.scale_re(1.0 / tr).hermitian_part()).expect("A A^dagger is a valid state")
}

/// Random unitary from Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    orthonormal_columns(&random_matrix(rng, n, n))
}

/// Random channel with `k` Kraus operators on a `d`-level system, taken as
/// the blocks of a random `(k d) x d` isometry.
pub fn random_kraus<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> KrausSet {
    let iso = orthonormal_columns(&random_matrix(rng, k * d, d));
    let ops = (0..k)
        .map(|b| {
            let mut m = ComplexMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] = iso[(b * d + i, j)];
                }
            }
            m
        })
        .collect();
    KrausSet::new(ops).expect("blocks of an isometry form a complete Kraus set")
}

fn orthonormal_columns(a: &ComplexMatrix) -> ComplexMatrix {
    let mut q = a.clone();
    for j in 0..a.cols() {
        let mut v = q.column(j);
        for _ in 0..2 {
            for p in 0..j {
                let u = q.column(p);
                v = v.sub(&u.scale(u.inner(&v)));
            }
        }
        let v = v.normalized().expect("gaussian columns are independent");
        q.set_column(j, &v);
    }
    q
}

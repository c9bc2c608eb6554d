//! Seeded generators for test instances.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::{ComplexMatrix, HermitianMatrix};
use crate::sparsifier::FrameFamily;

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianMatrix {
    let g = random_complex_matrix(n, n, rng);
    let sym = ComplexMatrix::from_fn(n, n, |i, j| (g.get(i, j) + g.get(j, i).conj()) * 0.5);
    HermitianMatrix::from_matrix(&sym, 1e-12).expect("symmetrized matrix is Hermitian")
}

/// Orthonormalizes the columns of `m` in place (modified Gram–Schmidt, two passes).
pub fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    let mut q: Vec<Vec<Complex64>> = (0..cols).map(|j| m.column(j)).collect();
    for _pass in 0..2 {
        for j in 0..cols {
            for k in 0..j {
                let (done, rest) = q.split_at_mut(j);
                let proj: Complex64 = done[k].iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in rest[0].iter_mut().zip(&done[k]) {
                    *x -= proj * y;
                }
            }
            let norm = q[j].iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
            for x in q[j].iter_mut() {
                *x /= norm;
            }
        }
    }
    ComplexMatrix::from_fn(rows, cols, |i, j| q[j][i])
}

/// Rows of an `m × n` matrix with orthonormal columns: a Parseval frame for `ℂⁿ`.
pub fn random_parseval_frame<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> FrameFamily {
    assert!(m >= n, "need m >= n");
    FrameFamily::new(orthonormalize_columns(&random_complex_matrix(m, n, rng)))
}

/// Random unitary `n × n` matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    orthonormalize_columns(&random_complex_matrix(n, n, rng))
}

/// `k` distinct sorted indices drawn uniformly from `0..m`.
pub fn random_subset<R: Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut idx = rand::seq::index::sample(rng, m, k).into_vec();
    idx.sort_unstable();
    idx
}

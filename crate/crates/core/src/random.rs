//! Seeded random generators with prescribed spectra.
//!
//! Matrices are assembled as `U · diag(λ) · U^T` where `U` is a random
//! orthonormal basis whose first column is the constant vector `1/√n`.
//! Every result is therefore symmetric with zero row sums, and the kernel
//! dimension is controlled through the chosen eigenvalues. Off-diagonal
//! entries come out with mixed signs, so these are genuinely signed
//! Laplacians.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::GeneratorMatrix;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random orthonormal `n x n` basis with first column `(1/√n)·1`.
pub fn random_kernel_basis<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let mut basis = DMatrix::zeros(n, n);
    basis.set_column(0, &DVector::from_element(n, 1.0 / (n as f64).sqrt()));
    let mut k = 1;
    while k < n {
        let mut v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        // Two Gram-Schmidt passes for orthogonality at machine precision.
        for _ in 0..2 {
            for j in 0..k {
                let q = basis.column(j).into_owned();
                let overlap = v.dot(&q);
                v.axpy(-overlap, &q, 1.0);
            }
        }
        let norm = v.norm();
        if norm < 1e-8 {
            continue;
        }
        basis.set_column(k, &(v / norm));
        k += 1;
    }
    basis
}

/// `U · diag(eigenvalues) · U^T`, symmetrized exactly.
pub fn from_spectrum(basis: &DMatrix<f64>, eigenvalues: &[f64]) -> GeneratorMatrix {
    let mut scaled = basis.clone();
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        scaled.column_mut(k).scale_mut(lambda);
    }
    let m = scaled * basis.transpose();
    let sym = (&m + m.transpose()) * 0.5;
    GeneratorMatrix::from_matrix(sym).expect("finite spectrum gives a finite matrix")
}

/// Random signed-Laplacian generator: symmetric, zero row sums, corank one
/// and negative semidefinite. The spectral gap `λ2` lies in `[-1.5, -0.5]`
/// and every other nonzero eigenvalue in `[4·λ2, λ2]`.
pub fn random_def1_generator<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GeneratorMatrix {
    let basis = random_kernel_basis(n, rng);
    let gap: f64 = rng.random_range(0.5..1.5);
    let mut eigenvalues = vec![0.0, -gap];
    for _ in 2..n {
        eigenvalues.push(-gap * rng.random_range(1.0..4.0));
    }
    from_spectrum(&basis, &eigenvalues)
}

/// Random symmetric corank-one Laplacian-shaped matrix `L` (zero row sums).
/// With `psd = true` the nonzero eigenvalues lie in `[0.5, 4]`; otherwise
/// one of them is replaced by a value in `[-3, -0.5]`.
pub fn random_corank_one_laplacian<R: Rng + ?Sized>(
    n: usize,
    psd: bool,
    rng: &mut R,
) -> GeneratorMatrix {
    let basis = random_kernel_basis(n, rng);
    let mut eigenvalues = vec![0.0];
    for _ in 1..n {
        eigenvalues.push(rng.random_range(0.5..4.0));
    }
    if !psd {
        let k = rng.random_range(1..n);
        eigenvalues[k] = -rng.random_range(0.5..3.0);
    }
    from_spectrum(&basis, &eigenvalues)
}

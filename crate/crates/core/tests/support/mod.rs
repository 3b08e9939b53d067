//! Test-only oracles, independent of the library's exponential routes.
#![allow(dead_code)]

use nalgebra::DMatrix;

/// exp(tA) by truncated Taylor series on a scaled matrix followed by
/// repeated squaring. Slow and simple; only used to cross-check.
pub fn taylor_expm(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let scaled = a * t;
    let norm = scaled.iter().map(|x| x.abs()).sum::<f64>();
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 0.25 {
        squarings += 1;
    }
    let small = scaled / 2f64.powi(squarings);
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..=30 {
        term = &term * &small / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Rotation about the all-ones axis by θ = √3·t, written out entry by entry.
pub fn rotation(t: f64) -> DMatrix<f64> {
    let th = 3f64.sqrt() * t;
    let r3 = 3f64.sqrt();
    let d = (1.0 + 2.0 * th.cos()) / 3.0;
    let p = (1.0 - th.cos() + r3 * th.sin()) / 3.0;
    let m = (1.0 - th.cos() - r3 * th.sin()) / 3.0;
    DMatrix::from_row_slice(3, 3, &[d, p, m, m, d, p, p, m, d])
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// B(t)_ii = 1/n + Σ_{k≥2} exp(-tλ_k) u_ki² from a known eigenbasis.
pub fn backward_diagonal(basis: &DMatrix<f64>, eigenvalues: &[f64], t: f64) -> Vec<f64> {
    let n = basis.nrows();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| (-t * eigenvalues[k]).exp() * basis[(i, k)].powi(2))
                .sum()
        })
        .collect()
}

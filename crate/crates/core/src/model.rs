//! Generator matrices, validation against the signed-Laplacian conditions,
//! symmetric spectral decomposition and the Second-Law check.
//!
//! A generator `Λ` drives `p(t) = exp(tΛ) p0`. It is a signed-Laplacian
//! generator when `L = -Λ` is symmetric, annihilates the all-ones vector and
//! has a one-dimensional kernel. Off-diagonal entries may carry either sign.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real `n x n` generator, `n >= 2`, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    entries: DMatrix<f64>,
}

impl GeneratorMatrix {
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows < 2 {
            return Err(Error::TooSmall(rows));
        }
        for col in 0..cols {
            for row in 0..rows {
                if !entries[(row, col)].is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        Ok(Self { entries })
    }

    /// Builds from a slice of rows; every row must have the same length as
    /// the number of rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            let len = row.as_ref().len();
            if len != n {
                return Err(Error::NotSquare { rows: n, cols: len });
            }
        }
        let entries = DMatrix::from_fn(n, n, |i, j| rows[i].as_ref()[j]);
        Self::from_matrix(entries)
    }

    pub fn from_row_major(n: usize, values: &[f64]) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        Self::from_matrix(DMatrix::from_row_slice(n, n, values))
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.entries)
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.to_rows().into_iter().flatten().collect()
    }

    /// `-M`, i.e. the Laplacian `L` for a generator `Λ` (and vice versa).
    pub fn negated(&self) -> Self {
        Self {
            entries: -&self.entries,
        }
    }

    /// (M + M^T) / 2
    pub fn symmetric_part(&self) -> DMatrix<f64> {
        (&self.entries + self.entries.transpose()) * 0.5
    }

    pub fn symmetry_residual(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.transpose()))
    }

    /// max |M·1|
    pub fn rowsum_residual(&self) -> f64 {
        self.entries
            .row_iter()
            .map(|row| row.sum().abs())
            .fold(0.0, f64::max)
    }

    /// Infinity norm, an upper bound on the spectral radius.
    pub fn spectral_radius_estimate(&self) -> f64 {
        self.entries
            .row_iter()
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Numerical tolerances. `eps_eig` is relative to the matrix scale, see
/// [`ToleranceConfig::zero_threshold`]; the others are absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub eps_sym: f64,
    pub eps_rowsum: f64,
    pub eps_eig: f64,
    pub eps_pos: f64,
    pub eps_fit: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eps_sym: 1e-10,
            eps_rowsum: 1e-10,
            eps_eig: 1e-9,
            eps_pos: 1e-12,
            eps_fit: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eps_sym", self.eps_sym),
            ("eps_rowsum", self.eps_rowsum),
            ("eps_eig", self.eps_eig),
            ("eps_pos", self.eps_pos),
            ("eps_fit", self.eps_fit),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "tolerance {name} must be a positive finite number, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Absolute threshold below which an eigenvalue or singular value counts
    /// as zero for a matrix of the given scale. Scales below 1 fall back to
    /// an absolute threshold of `eps_eig`.
    pub fn zero_threshold(&self, scale: f64) -> f64 {
        self.eps_eig * scale.max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    pub is_symmetric: bool,
    pub symmetry_residual: f64,
    pub rowsums_zero: bool,
    pub rowsum_residual: f64,
    pub corank: usize,
    pub is_nsd: bool,
    /// Eigenvalues of the symmetric part `(M + M^T)/2`, sorted descending.
    /// For symmetric input this is the spectrum of `M` itself.
    pub spectrum: Vec<f64>,
    /// Singular values of `M`, sorted descending. Only populated on the
    /// asymmetric path, where they determine the corank.
    pub singular_values: Option<Vec<f64>>,
    pub zero_threshold: f64,
    pub satisfies_def1: bool,
    pub second_law_holds: bool,
}

/// Checks a generator against the signed-Laplacian conditions
/// (symmetry, zero row sums, corank one) and negative semidefiniteness.
pub fn validate_generator(m: &GeneratorMatrix, tol: &ToleranceConfig) -> Result<ValidationReport> {
    tol.validate()?;
    let threshold = tol.zero_threshold(m.spectral_radius_estimate());
    let symmetry_residual = m.symmetry_residual();
    let rowsum_residual = m.rowsum_residual();
    let is_symmetric = symmetry_residual <= tol.eps_sym;
    let rowsums_zero = rowsum_residual <= tol.eps_rowsum;

    let spectrum = symmetric_eigenvalues_desc(m.symmetric_part())?;
    let is_nsd = spectrum.first().is_none_or(|&top| top <= threshold);

    let (corank, singular_values) = if is_symmetric {
        let corank = spectrum.iter().filter(|l| l.abs() <= threshold).count();
        (corank, None)
    } else {
        let svd = m
            .matrix()
            .clone()
            .try_svd(false, false, f64::EPSILON, 10_000)
            .ok_or(Error::EigenNoConvergence)?;
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let corank = sv.iter().filter(|&&s| s <= threshold).count();
        (corank, Some(sv))
    };

    Ok(ValidationReport {
        n: m.n(),
        is_symmetric,
        symmetry_residual,
        rowsums_zero,
        rowsum_residual,
        corank,
        is_nsd,
        spectrum,
        singular_values,
        zero_threshold: threshold,
        satisfies_def1: is_symmetric && rowsums_zero && corank == 1,
        second_law_holds: is_nsd,
    })
}

/// Whether the quadratic form of `M` is nonpositive everywhere, i.e. the
/// largest eigenvalue of `(M + M^T)/2` is at most the zero threshold.
///
/// For symmetric generators with zero row sums this is equivalent to the
/// Renyi-2 Second Law: along `p(t) = exp(tM) p0` the entropy derivative is
/// `-2 p^T M p / (ln 2 |p|^2)`, which is nonnegative for every `p` exactly
/// when the form is nonpositive. Outside that class the flag only reports
/// the sign of the quadratic form.
pub fn check_second_law(m: &GeneratorMatrix, tol: &ToleranceConfig) -> bool {
    let threshold = tol.zero_threshold(m.spectral_radius_estimate());
    match symmetric_eigenvalues_desc(m.symmetric_part()) {
        Ok(spectrum) => spectrum.first().is_none_or(|&top| top <= threshold),
        Err(_) => false,
    }
}

/// Eigenvalues and orthonormal eigenvectors (columns) of a symmetric
/// generator.
///
/// Ordering: when the corank is one, the kernel eigenvalue comes first
/// (snapped to exactly 0) and the rest follow in descending order.
/// Otherwise all eigenvalues are descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub corank: usize,
    pub zero_threshold: f64,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// U · diag(λ) · U^T
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.apply_diagonal(|l| l)
    }

    /// U · diag(f(λ)) · U^T
    pub fn apply_diagonal(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let factor = f(lambda);
            scaled.column_mut(k).scale_mut(factor);
        }
        scaled * u.transpose()
    }

    /// max |U^T U - I|
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.n();
        let gram = self.eigenvectors.transpose() * &self.eigenvectors;
        max_abs(&(gram - DMatrix::identity(n, n)))
    }

    /// Second eigenvalue in the kernel-first ordering; the spectral gap for
    /// negative semidefinite corank-one generators.
    pub fn lambda2(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }

    /// Whether this is the decomposition of a negative semidefinite
    /// generator with a one-dimensional kernel.
    pub fn is_nsd_corank_one(&self) -> bool {
        self.corank == 1
            && self.eigenvalues[0] == 0.0
            && self.eigenvalues[1..].iter().all(|&l| l < -self.zero_threshold)
    }
}

/// Spectral decomposition of a symmetric generator. The input is
/// symmetrized as `(M + M^T)/2` after the symmetry check.
pub fn spectral_decompose(m: &GeneratorMatrix, tol: &ToleranceConfig) -> Result<SpectralDecomposition> {
    let residual = m.symmetry_residual();
    if residual > tol.eps_sym {
        return Err(Error::Asymmetric { residual });
    }
    let n = m.n();
    let threshold = tol.zero_threshold(m.spectral_radius_estimate());
    let eig = m
        .symmetric_part()
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(Error::EigenNoConvergence)?;

    let mut pairs: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .map(|(k, l)| (l, k))
        .collect();
    let corank = pairs.iter().filter(|(l, _)| l.abs() <= threshold).count();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    if corank == 1 {
        let kernel_pos = pairs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .0.abs().total_cmp(&b.1 .0.abs()))
            .map(|(pos, _)| pos)
            .expect("n >= 2");
        let kernel = pairs.remove(kernel_pos);
        pairs.insert(0, (0.0, kernel.1));
    }

    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut eigenvectors = DMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, pairs[k].1)]);

    if corank == 1 {
        let mut kernel = eigenvectors.column(0).into_owned();
        if kernel.sum() < 0.0 {
            kernel.neg_mut();
        }
        let uniform = 1.0 / (n as f64).sqrt();
        if kernel.iter().all(|&x| (x - uniform).abs() <= tol.eps_eig) {
            kernel.fill(uniform);
            // Re-orthogonalize the remaining columns against the exact
            // constant vector so propagator row sums stay exact.
            for k in 1..n {
                let mut col = eigenvectors.column(k).into_owned();
                let overlap = col.dot(&kernel);
                col.axpy(-overlap, &kernel, 1.0);
                let norm = col.norm();
                if norm > 0.0 {
                    col /= norm;
                }
                eigenvectors.set_column(k, &col);
            }
        }
        eigenvectors.set_column(0, &kernel);
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        corank,
        zero_threshold: threshold,
    })
}

pub(crate) fn symmetric_eigenvalues_desc(sym: DMatrix<f64>) -> Result<Vec<f64>> {
    let eig = sym
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(Error::EigenNoConvergence)?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|row| row.iter().copied().collect()).collect()
}

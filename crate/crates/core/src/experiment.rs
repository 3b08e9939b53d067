//! Mesoscopic arrow-of-time protocol.
//!
//! An experimenter prepares `n` linearly independent signed distributions
//! (the columns of `S`), lets each evolve for a time `t`, and records the
//! outputs (the columns of `O`). Solving `F·S = O` and `B·O = S` yields the
//! unique forward and backward propagators without any access to the
//! generator. The test is conclusive when exactly one of them is strictly
//! positive and the other has a negative entry.

use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{matrix_rows, max_abs, validate_generator, GeneratorMatrix, ToleranceConfig, ValidationReport};
use crate::positivity::{estimate_tau_with, TauEstimate, TauOptions};
use crate::propagator::{classify_signs, matrix_exponential_with, SignClassification, SignKind};
use crate::random::seeded_rng;

pub const DEFAULT_DELTA: f64 = 0.1;

/// Prepared initial distributions, one per column.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparationBasis {
    pub matrix: DMatrix<f64>,
    /// Perturbation used by [`default_basis`]; `None` for custom bases.
    pub delta: Option<f64>,
}

impl PreparationBasis {
    /// Wraps a custom basis after checking full rank and unit column sums.
    pub fn from_matrix(matrix: DMatrix<f64>, tol: &ToleranceConfig) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        for (k, col) in matrix.column_iter().enumerate() {
            let sum = col.sum();
            if (sum - 1.0).abs() > tol.eps_rowsum {
                return Err(Error::InvalidDistribution(format!(
                    "column {k} sums to {sum}, expected 1"
                )));
            }
        }
        let (sigma_min, sigma_max) = singular_extremes(&matrix)?;
        if sigma_min <= tol.eps_eig * sigma_max {
            return Err(Error::RankDeficient { sigma_min });
        }
        Ok(Self { matrix, delta: None })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Signed perturbation of the point masses: column `k` is
/// `(1 + δ)·e_k - (δ/n)·1`. Every column sums to one and carries negative
/// entries `-δ/n`. The singular values are `1 + δ` (multiplicity `n - 1`)
/// and `1`, so the basis is well conditioned.
pub fn default_basis(n: usize, delta: f64, tol: &ToleranceConfig) -> Result<PreparationBasis> {
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    let off = -delta / n as f64;
    let matrix = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 + delta + off } else { off });
    let (sigma_min, sigma_max) = singular_extremes(&matrix)?;
    if sigma_min <= tol.eps_eig * sigma_max {
        return Err(Error::RankDeficient { sigma_min });
    }
    Ok(PreparationBasis {
        matrix,
        delta: Some(delta),
    })
}

/// Observed outputs `O = exp(tM)·S`, optionally perturbed by i.i.d. Gaussian
/// noise of standard deviation `noise_sigma` and then re-projected so every
/// column sums to one. Deterministic for a given seed.
pub fn simulate_experiment(
    m: &GeneratorMatrix,
    basis: &PreparationBasis,
    t: f64,
    noise_sigma: f64,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<DMatrix<f64>> {
    if basis.n() != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            got: basis.n(),
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise sigma must be nonnegative, got {noise_sigma}"
        )));
    }
    let (propagator, _) = matrix_exponential_with(m, t, tol)?;
    let mut observed = propagator * &basis.matrix;
    if noise_sigma > 0.0 {
        let normal = Normal::new(0.0, noise_sigma)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut rng = seeded_rng(seed);
        // Column-major fill order, fixed for reproducibility.
        for x in observed.iter_mut() {
            *x += normal.sample(&mut rng);
        }
        let n = observed.nrows() as f64;
        for mut col in observed.column_iter_mut() {
            let excess = (col.sum() - 1.0) / n;
            col.add_scalar_mut(-excess);
        }
    }
    Ok(observed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub forward: DMatrix<f64>,
    pub backward: DMatrix<f64>,
    /// max |F̂·S - O|
    pub residual_forward: f64,
    /// max |B̂·O - S|
    pub residual_backward: f64,
    /// max |B̂·F̂ - I|
    pub inverse_residual: f64,
    pub condition_prepared: f64,
    pub condition_observed: f64,
}

/// Solves `F·S = O` and `B·O = S` by LU factorization (no explicit
/// inverse).
pub fn fit_propagators(basis: &PreparationBasis, observed: &DMatrix<f64>, tol: &ToleranceConfig) -> Result<FitResult> {
    let s = &basis.matrix;
    let n = s.nrows();
    if observed.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: observed.nrows(),
        });
    }
    if let Some(pos) = observed.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            row: pos % n,
            col: pos / n,
        });
    }
    let (s_min, s_max) = singular_extremes(s)?;
    if s_min <= tol.eps_eig * s_max {
        return Err(Error::RankDeficient { sigma_min: s_min });
    }
    let (o_min, o_max) = singular_extremes(observed)?;
    if o_min <= tol.eps_eig * o_max {
        return Err(Error::SingularObservation { sigma_min: o_min });
    }

    // F·S = O  ⟺  S^T·F^T = O^T
    let forward = s
        .transpose()
        .lu()
        .solve(&observed.transpose())
        .ok_or(Error::RankDeficient { sigma_min: s_min })?
        .transpose();
    let backward = observed
        .transpose()
        .lu()
        .solve(&s.transpose())
        .ok_or(Error::SingularObservation { sigma_min: o_min })?
        .transpose();

    Ok(FitResult {
        residual_forward: max_abs(&(&forward * s - observed)),
        residual_backward: max_abs(&(&backward * observed - s)),
        inverse_residual: max_abs(&(&backward * &forward - DMatrix::identity(n, n))),
        condition_prepared: s_max / s_min,
        condition_observed: o_max / o_min,
        forward,
        backward,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    ForwardConclusive,
    Inconclusive,
    /// Backward propagator strictly positive while the forward one has a
    /// negative entry. Impossible for ideal signed-Laplacian dynamics; its
    /// appearance means noise or a violated assumption.
    AnomalousBackwardPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AotVerdict {
    pub kind: VerdictKind,
    pub forward_class: SignClassification,
    pub backward_class: SignClassification,
    pub test_time: f64,
}

impl AotVerdict {
    pub fn is_conclusive(&self) -> bool {
        self.kind == VerdictKind::ForwardConclusive
    }
}

pub fn aot_verdict(fit: &FitResult, tol: &ToleranceConfig, t: f64) -> Result<AotVerdict> {
    let residual = fit.residual_forward.max(fit.residual_backward);
    if !(residual <= tol.eps_fit) {
        return Err(Error::UnusableFit {
            residual,
            eps_fit: tol.eps_fit,
        });
    }
    let forward_class = classify_signs(&fit.forward, tol);
    let backward_class = classify_signs(&fit.backward, tol);
    let kind = match (forward_class.kind, backward_class.kind) {
        (SignKind::StrictlyPositive, SignKind::HasNegativeEntry) => VerdictKind::ForwardConclusive,
        (SignKind::HasNegativeEntry, SignKind::StrictlyPositive) => VerdictKind::AnomalousBackwardPositive,
        _ => VerdictKind::Inconclusive,
    };
    Ok(AotVerdict {
        kind,
        forward_class,
        backward_class,
        test_time: t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub delta: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    pub tol: ToleranceConfig,
    pub tau: TauOptions,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            noise_sigma: 0.0,
            seed: 0,
            tol: ToleranceConfig::default(),
            tau: TauOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub test_time: f64,
    pub delta: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    pub validation: ValidationReport,
    pub prepared: Vec<Vec<f64>>,
    pub observed: Vec<Vec<f64>>,
    pub forward_fit: Vec<Vec<f64>>,
    pub backward_fit: Vec<Vec<f64>>,
    pub residual_forward: f64,
    pub residual_backward: f64,
    pub inverse_residual: f64,
    pub condition_prepared: f64,
    pub condition_observed: f64,
    pub verdict: AotVerdict,
    /// Detection-time estimate, computed when the generator is a
    /// signed-Laplacian generator.
    pub tau: Option<TauEstimate>,
    /// Whether the test time is at or beyond the upper end of the τ bracket.
    pub reached_tau: Option<bool>,
    pub warnings: Vec<String>,
}

/// Default basis, simulated measurement, fit and verdict in one call.
pub fn run_aot_protocol(m: &GeneratorMatrix, t: f64, config: &ProtocolConfig) -> Result<ProtocolReport> {
    let tol = &config.tol;
    let validation = validate_generator(m, tol)?;
    let basis = default_basis(m.n(), config.delta, tol)?;
    let observed = simulate_experiment(m, &basis, t, config.noise_sigma, config.seed, tol)?;
    let fit = fit_propagators(&basis, &observed, tol)?;
    let verdict = aot_verdict(&fit, tol, t)?;

    let tau = if validation.satisfies_def1 && validation.is_nsd {
        Some(estimate_tau_with(m, &config.tau, tol)?)
    } else {
        None
    };
    let reached_tau = tau.as_ref().and_then(|e| e.tau_hi).map(|hi| t >= hi);

    let mut warnings = Vec::new();
    if verdict.kind == VerdictKind::AnomalousBackwardPositive {
        warnings.push(
            "backward propagator strictly positive with a negative forward entry: \
             the generator assumptions or the measurement model are violated"
                .to_string(),
        );
    }
    if validation.satisfies_def1 && verdict.is_conclusive() && reached_tau == Some(false) {
        warnings.push("conclusive verdict before the estimated detection time".to_string());
    }

    Ok(ProtocolReport {
        test_time: t,
        delta: config.delta,
        noise_sigma: config.noise_sigma,
        seed: config.seed,
        validation,
        prepared: matrix_rows(&basis.matrix),
        observed: matrix_rows(&observed),
        forward_fit: matrix_rows(&fit.forward),
        backward_fit: matrix_rows(&fit.backward),
        residual_forward: fit.residual_forward,
        residual_backward: fit.residual_backward,
        inverse_residual: fit.inverse_residual,
        condition_prepared: fit.condition_prepared,
        condition_observed: fit.condition_observed,
        verdict,
        tau,
        reached_tau,
        warnings,
    })
}

fn singular_extremes(m: &DMatrix<f64>) -> Result<(f64, f64)> {
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or(Error::EigenNoConvergence)?;
    let values = &svd.singular_values;
    Ok((values.min(), values.max()))
}

//! Renyi-2 entropy of signed distributions and its evolution along
//! `p(t) = exp(tΛ) p0`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GeneratorMatrix, ToleranceConfig};
use crate::propagator::matrix_exponential_with;

/// Real weight vector summing to one; entries may be negative or exceed one.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDistribution {
    weights: DVector<f64>,
}

impl SignedDistribution {
    pub fn new(weights: Vec<f64>, tol: &ToleranceConfig) -> Result<Self> {
        Self::from_vector(DVector::from_vec(weights), tol)
    }

    pub fn from_vector(weights: DVector<f64>, tol: &ToleranceConfig) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty weight vector".into()));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::InvalidDistribution(format!("non-finite weight at index {i}")));
        }
        let sum = weights.sum();
        if (sum - 1.0).abs() > tol.eps_rowsum {
            return Err(Error::InvalidDistribution(format!("weights sum to {sum}, expected 1")));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::InvalidDistribution("zero vector".into()));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: DVector::from_element(n, 1.0 / n as f64),
        }
    }

    /// Point mass on state `k`.
    pub fn point_mass(n: usize, k: usize) -> Self {
        let mut weights = DVector::zeros(n);
        weights[k] = 1.0;
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }
}

/// H2(p) = -log2(Σ p_i²), in bits.
pub fn renyi2_entropy(p: &SignedDistribution) -> f64 {
    renyi2_of(p.weights())
}

pub(crate) fn renyi2_of(p: &DVector<f64>) -> f64 {
    // Adding 0.0 turns -0.0 (point masses) into 0.0.
    -p.norm_squared().log2() + 0.0
}

/// dH2/dt = -2 p^T M p / (ln 2 · |p|²), in bits per unit time.
pub fn entropy_derivative(m: &GeneratorMatrix, p: &SignedDistribution) -> Result<f64> {
    derivative_of(m, p.weights())
}

fn derivative_of(m: &GeneratorMatrix, p: &DVector<f64>) -> Result<f64> {
    if p.len() != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            got: p.len(),
        });
    }
    // p^T M p = p^T ((M + M^T)/2) p; the symmetric part vanishes exactly for
    // antisymmetric generators.
    let form = p.dot(&(m.symmetric_part() * p));
    Ok(-2.0 * form / (std::f64::consts::LN_2 * p.norm_squared()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub times: Vec<f64>,
    /// `exp(t_k Λ) p0`. Entry sums stay one only when `Λ` has zero row sums.
    pub states: Vec<Vec<f64>>,
    pub entropies: Vec<f64>,
    pub derivatives: Vec<f64>,
    /// Smallest `H2[k+1] - H2[k]`; `None` for a single time point.
    pub min_entropy_increment: Option<f64>,
}

/// Evolves `p0` to each requested time. Every state is computed directly
/// from `p0`, not by chaining steps.
pub fn evolve_trajectory(
    m: &GeneratorMatrix,
    p0: &SignedDistribution,
    times: &[f64],
    tol: &ToleranceConfig,
) -> Result<TrajectoryReport> {
    if p0.len() != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            got: p0.len(),
        });
    }
    if times.is_empty() {
        return Err(Error::InvalidArgument("no trajectory times given".into()));
    }
    if times[0] < 0.0 || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }

    let mut states = Vec::with_capacity(times.len());
    let mut entropies = Vec::with_capacity(times.len());
    let mut derivatives = Vec::with_capacity(times.len());
    for &t in times {
        let (propagator, _) = matrix_exponential_with(m, t, tol)?;
        let state = propagator * p0.weights();
        entropies.push(renyi2_of(&state));
        derivatives.push(derivative_of(m, &state)?);
        states.push(state.iter().copied().collect());
    }
    let min_entropy_increment = entropies
        .windows(2)
        .map(|w| w[1] - w[0])
        .reduce(f64::min);

    Ok(TrajectoryReport {
        times: times.to_vec(),
        states,
        entropies,
        derivatives,
        min_entropy_increment,
    })
}

/// `steps + 1` evenly spaced times covering `[0, t_max]`.
pub fn uniform_times(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|k| t_max * k as f64 / steps.max(1) as f64)
        .collect()
}

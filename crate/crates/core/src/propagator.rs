//! Forward and backward propagators `F(t) = exp(tΛ)` and `B(t) = exp(-tΛ)`.
//!
//! Symmetric generators are exponentiated through their spectral
//! decomposition, which keeps row sums exact up to rounding. Everything else
//! goes through scaling and squaring with the degree-13 Padé approximant.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{max_abs, spectral_decompose, GeneratorMatrix, SpectralDecomposition, ToleranceConfig};

/// Largest exponent whose `exp` is still a finite double.
const MAX_EXPONENT: f64 = 709.0;

/// 1-norm threshold for the degree-13 approximant.
const THETA_13: f64 = 5.37;

const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    SpectralExp,
    ScalingSquaring,
    ClosedFormRotation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub matrix: DMatrix<f64>,
    pub time: f64,
    pub direction: Direction,
    pub method: Method,
}

impl Propagator {
    /// max |P·1 - 1|
    pub fn row_sum_residual(&self) -> f64 {
        row_sum_residual(&self.matrix)
    }
}

/// exp(tM), choosing the spectral route for symmetric `M` (default
/// tolerances).
pub fn matrix_exponential(m: &GeneratorMatrix, t: f64) -> Result<DMatrix<f64>> {
    matrix_exponential_with(m, t, &ToleranceConfig::default()).map(|(e, _)| e)
}

/// exp(tM) together with the method used. `t` may be negative.
pub fn matrix_exponential_with(
    m: &GeneratorMatrix,
    t: f64,
    tol: &ToleranceConfig,
) -> Result<(DMatrix<f64>, Method)> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite, got {t}")));
    }
    if m.symmetry_residual() <= tol.eps_sym {
        let spec = spectral_decompose(m, tol)?;
        Ok((spectral_exponential(&spec, t)?, Method::SpectralExp))
    } else {
        Ok((pade_exponential(m.matrix(), t)?, Method::ScalingSquaring))
    }
}

/// U · diag(exp(tλ_k)) · U^T
pub fn spectral_exponential(spec: &SpectralDecomposition, t: f64) -> Result<DMatrix<f64>> {
    let n = spec.n();
    if t == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let rate = spec
        .eigenvalues
        .iter()
        .map(|&l| t * l)
        .fold(f64::NEG_INFINITY, f64::max);
    if rate > MAX_EXPONENT {
        return Err(Error::Overflow { t, rate: rate / t });
    }
    Ok(spec.apply_diagonal(|l| (t * l).exp()))
}

/// exp(tA) by scaling and squaring with the [13/13] Padé approximant.
pub fn pade_exponential(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if t == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let scaled = a * t;
    let norm = one_norm(&scaled);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let reduced = scaled * 2f64.powi(-squarings);
    let mut result = pade13(&reduced).ok_or(Error::Overflow { t, rate: one_norm(a) })?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    if result.iter().any(|x| !x.is_finite()) {
        return Err(Error::Overflow { t, rate: one_norm(a) });
    }
    Ok(result)
}

fn pade13(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let b = &PADE_13;
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u_outer = &a6 * &u_inner + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1];
    let u = a * u_outer;

    let v_inner = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * &v_inner + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];

    // (V - U)^{-1} (V + U)
    (&v - &u).lu().solve(&(&v + &u))
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn row_sum_residual(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|row| (row.sum() - 1.0).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorPair {
    pub forward: Propagator,
    pub backward: Propagator,
    /// max |F·B - I|
    pub inverse_residual: f64,
    pub inverse_ok: bool,
}

/// Forward `exp(tM)` and backward `exp(-tM)` propagators at `t > 0`. The
/// backward propagator is exponentiated directly, never obtained by
/// inverting the forward one.
pub fn propagator_pair(m: &GeneratorMatrix, t: f64, tol: &ToleranceConfig) -> Result<PropagatorPair> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "propagator time must be positive and finite, got {t}"
        )));
    }
    let (forward, method) = matrix_exponential_with(m, t, tol)?;
    let (backward, _) = matrix_exponential_with(m, -t, tol)?;
    let n = m.n();
    let inverse_residual = max_abs(&(&forward * &backward - DMatrix::identity(n, n)));
    Ok(PropagatorPair {
        forward: Propagator {
            matrix: forward,
            time: t,
            direction: Direction::Forward,
            method,
        },
        backward: Propagator {
            matrix: backward,
            time: t,
            direction: Direction::Backward,
            method,
        },
        inverse_residual,
        inverse_ok: inverse_residual <= tol.eps_fit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignKind {
    StrictlyPositive,
    HasNegativeEntry,
    NonnegativeWithZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignClassification {
    pub kind: SignKind,
    pub min_entry: f64,
    pub max_entry: f64,
    /// (row, column) of the minimal entry.
    pub argmin: (usize, usize),
}

pub fn classify_signs(a: &DMatrix<f64>, tol: &ToleranceConfig) -> SignClassification {
    let mut min_entry = f64::INFINITY;
    let mut max_entry = f64::NEG_INFINITY;
    let mut argmin = (0, 0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let x = a[(i, j)];
            if x < min_entry {
                min_entry = x;
                argmin = (i, j);
            }
            max_entry = max_entry.max(x);
        }
    }
    let kind = if min_entry > tol.eps_pos {
        SignKind::StrictlyPositive
    } else if min_entry < -tol.eps_pos {
        SignKind::HasNegativeEntry
    } else {
        SignKind::NonnegativeWithZero
    };
    SignClassification {
        kind,
        min_entry,
        max_entry,
        argmin,
    }
}

/// Rotation by `θ = √3·t` about the all-ones axis: the exact propagator of
/// the antisymmetric 3-cycle generator.
pub fn rotation_closed_form(t: f64) -> DMatrix<f64> {
    let theta = 3f64.sqrt() * t;
    let (s, c) = theta.sin_cos();
    let s3 = 3f64.sqrt() * s;
    let diag = (1.0 + 2.0 * c) / 3.0;
    let plus = (1.0 - c + s3) / 3.0;
    let minus = (1.0 - c - s3) / 3.0;
    DMatrix::from_row_slice(3, 3, &[diag, plus, minus, minus, diag, plus, plus, minus, diag])
}

/// Closed-form propagator wrapped with its metadata. Negative `t` gives the
/// backward rotation.
pub fn rotation_propagator(t: f64) -> Propagator {
    Propagator {
        matrix: rotation_closed_form(t),
        time: t.abs(),
        direction: if t < 0.0 {
            Direction::Backward
        } else {
            Direction::Forward
        },
        method: Method::ClosedFormRotation,
    }
}

/// Whether every diagonal entry of the backward propagator exceeds 1 by
/// more than `eps_pos`. Together with unit row sums this forces a negative
/// entry in every row.
///
/// Requires a backward propagator at `t > 0` of a negative semidefinite
/// corank-one symmetric generator, described by `spec`.
pub fn diagonal_dominance_check(
    backward: &Propagator,
    spec: &SpectralDecomposition,
    tol: &ToleranceConfig,
) -> Result<bool> {
    if backward.direction != Direction::Backward {
        return Err(Error::Precondition("expected a backward propagator".into()));
    }
    if !(backward.time > 0.0) {
        return Err(Error::Precondition(format!(
            "propagator time must be positive, got {}",
            backward.time
        )));
    }
    if !spec.is_nsd_corank_one() {
        return Err(Error::Precondition(
            "generator must be negative semidefinite with corank one".into(),
        ));
    }
    if backward.matrix.nrows() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            got: backward.matrix.nrows(),
        });
    }
    Ok(backward
        .matrix
        .diagonal()
        .iter()
        .all(|&d| d > 1.0 + tol.eps_pos))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use std::f64::consts::PI;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn round3(x: f64) -> f64 {
        (x * 1000.0).round_ties_even() / 1000.0
    }

    #[test]
    fn zero_time_is_identity() {
        for m in [catalog::example1(), catalog::example2()] {
            let e = matrix_exponential(&m, 0.0).unwrap();
            assert_eq!(e, DMatrix::identity(m.n(), m.n()));
        }
    }

    #[test]
    fn example1_forward_extrema_at_0_05() {
        let f = matrix_exponential(&catalog::example1(), 0.05).unwrap();
        assert_eq!(round3(f.min()), -0.010);
        assert_eq!(round3(f.max()), 0.895);
    }

    #[test]
    fn example1_pair_extrema() {
        let pair = propagator_pair(&catalog::example1(), 0.20, &tol()).unwrap();
        assert_eq!(pair.forward.method, Method::SpectralExp);
        assert_eq!(round3(pair.forward.matrix.min()), 0.007);
        assert_eq!(round3(pair.forward.matrix.max()), 0.677);
        assert_eq!(round3(pair.backward.matrix.min()), -0.988);
        assert_eq!(round3(pair.backward.matrix.max()), 3.965);
        assert!(pair.inverse_ok);

        let early = propagator_pair(&catalog::example1(), 0.05, &tol()).unwrap();
        assert_eq!(round3(early.backward.matrix.min()), -0.123);
        assert_eq!(round3(early.backward.matrix.max()), 1.369);
    }

    #[test]
    fn pair_rejects_nonpositive_time() {
        assert!(propagator_pair(&catalog::example1(), 0.0, &tol()).is_err());
        assert!(propagator_pair(&catalog::example1(), f64::NAN, &tol()).is_err());
    }

    #[test]
    fn example2_matches_rotation() {
        let m = catalog::example2();
        for t in [0.1, 0.7, 1.3, 5.0, -2.0] {
            let (e, method) = matrix_exponential_with(&m, t, &tol()).unwrap();
            assert_eq!(method, Method::ScalingSquaring);
            assert!(max_abs(&(e - rotation_closed_form(t))) < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn rotation_special_angles() {
        assert!(max_abs(&(rotation_closed_form(0.0) - DMatrix::identity(3, 3))) == 0.0);

        let shift = rotation_closed_form(2.0 * PI / (3.0 * 3f64.sqrt()));
        let perm = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        assert!(max_abs(&(shift - perm)) < 1e-12);

        let half = rotation_closed_form(PI / 3f64.sqrt());
        let expected = DMatrix::from_fn(3, 3, |i, j| if i == j { -1.0 / 3.0 } else { 2.0 / 3.0 });
        assert!(max_abs(&(half - expected)) < 1e-12);
    }

    #[test]
    fn sign_classes() {
        let t = tol();
        let f_late = matrix_exponential(&catalog::example1(), 0.20).unwrap();
        let c = classify_signs(&f_late, &t);
        assert_eq!(c.kind, SignKind::StrictlyPositive);
        assert_eq!(round3(c.min_entry), 0.007);

        let f_early = matrix_exponential(&catalog::example1(), 0.05).unwrap();
        let c = classify_signs(&f_early, &t);
        assert_eq!(c.kind, SignKind::HasNegativeEntry);
        assert_eq!(f_early[c.argmin], c.min_entry);

        let c = classify_signs(&DMatrix::identity(3, 3), &t);
        assert_eq!(c.kind, SignKind::NonnegativeWithZero);
        assert_eq!(c.min_entry, 0.0);
        assert_eq!(c.max_entry, 1.0);
    }

    #[test]
    fn overflow_is_reported() {
        let m = catalog::example1();
        assert!(matches!(
            matrix_exponential(&m, -1000.0),
            Err(Error::Overflow { .. })
        ));
        let asym = GeneratorMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            matrix_exponential(&asym, 1000.0),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn pade_matches_scalar_exponential_on_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-3.0, 0.5, 2.0]));
        let e = pade_exponential(&a, 1.7).unwrap();
        for (k, l) in [-3.0f64, 0.5, 2.0].iter().enumerate() {
            let want = (1.7 * l).exp();
            assert!((e[(k, k)] - want).abs() <= 1e-13 * want.max(1.0));
        }
    }

    #[test]
    fn pade_nilpotent_jordan_block() {
        // exp(t·N) = I + tN for N^2 = 0.
        let n = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e = pade_exponential(&n, 3.5).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.0, 3.5, 0.0, 1.0]);
        assert!(max_abs(&(e - want)) < 1e-13);
    }

    #[test]
    fn diagonal_dominance_on_example1() {
        let m = catalog::example1();
        let spec = spectral_decompose(&m, &tol()).unwrap();
        for t in [0.05, 0.20] {
            let pair = propagator_pair(&m, t, &tol()).unwrap();
            assert!(diagonal_dominance_check(&pair.backward, &spec, &tol()).unwrap());
            assert!(diagonal_dominance_check(&pair.forward, &spec, &tol()).is_err());
        }
    }

    #[test]
    fn diagonal_dominance_requires_nsd_corank_one() {
        let zero = GeneratorMatrix::from_matrix(DMatrix::zeros(3, 3)).unwrap();
        let spec = spectral_decompose(&zero, &tol()).unwrap();
        let b = Propagator {
            matrix: DMatrix::identity(3, 3),
            time: 1.0,
            direction: Direction::Backward,
            method: Method::SpectralExp,
        };
        assert!(matches!(
            diagonal_dominance_check(&b, &spec, &tol()),
            Err(Error::Precondition(_))
        ));
    }
}

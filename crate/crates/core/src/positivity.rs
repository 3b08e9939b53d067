//! Detection time τ: the infimum of times after which `exp(sΛ)` stays
//! entrywise strictly positive.
//!
//! For symmetric negative semidefinite corank-one generators the expansion
//!
//! ```text
//! F(t)_ij = 1/n + Σ_{k≥2} exp(tλ_k) u_ki u_kj
//! ```
//!
//! together with Cauchy-Schwarz and `Σ_{k≥2} u_ki² = 1 - 1/n` gives
//! `F(t)_ij ≥ 1/n - exp(tλ2)(1 - 1/n)`, hence strict positivity for every
//! `t > T* = ln(n-1)/|λ2|`. The search for τ therefore only needs to scan
//! `[0, T*]`. Between the last sign change and `T*` positivity is checked on
//! samples; this is a numerical certificate, not a proof at machine
//! precision.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    spectral_decompose, symmetric_eigenvalues_desc, validate_generator, GeneratorMatrix,
    SpectralDecomposition, ToleranceConfig,
};
use crate::propagator::{matrix_exponential_with, spectral_exponential};

pub const DEFAULT_GRID_POINTS: usize = 512;
pub const DEFAULT_WIDTH: f64 = 1e-4;
pub const DEFAULT_CERTIFY_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauVerdict {
    Finite,
    NotEventuallyPositive,
    UndeterminedWithinHorizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauEstimate {
    pub verdict: TauVerdict,
    /// Bracket `[tau_lo, tau_hi]` around τ; meaningful for `Finite` only.
    pub tau_lo: Option<f64>,
    pub tau_hi: Option<f64>,
    /// Analytic time beyond which positivity is guaranteed (symmetric path).
    pub certified_bound: Option<f64>,
    /// Right end of the scanned interval.
    pub horizon: f64,
    /// Grid cells `[a, b]` on which the minimal entry crosses `eps_pos`, in
    /// either direction.
    pub crossings: Vec<(f64, f64)>,
    /// Number of sampled times in `[tau_hi, certified_bound]` at which
    /// positivity was re-checked.
    pub certificate_samples: usize,
    /// Smallest minimal entry seen over those samples.
    pub certificate_min_entry: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauOptions {
    pub grid_points: usize,
    pub width: f64,
    /// Scan cap for the general path; `None` picks it from the spectrum.
    pub horizon: Option<f64>,
    pub certify_samples: usize,
}

impl Default for TauOptions {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            width: DEFAULT_WIDTH,
            horizon: None,
            certify_samples: DEFAULT_CERTIFY_SAMPLES,
        }
    }
}

/// `T* = ln(n-1)/|λ2|`: for all `t > T*` the forward propagator is strictly
/// positive.
pub fn positivity_time_bound(spec: &SpectralDecomposition) -> Result<f64> {
    let lambda2 = spec.lambda2().ok_or(Error::TooSmall(spec.n()))?;
    if !(lambda2 < -spec.zero_threshold) {
        return Err(Error::SpectralGap { lambda2 });
    }
    if !spec.is_nsd_corank_one() {
        return Err(Error::Precondition(
            "generator must be negative semidefinite with corank one".into(),
        ));
    }
    let n = spec.n() as f64;
    Ok((n - 1.0).ln() / lambda2.abs())
}

/// Estimates τ for a generator with default scan options.
pub fn estimate_tau(
    m: &GeneratorMatrix,
    grid_points: usize,
    width: f64,
    tol: &ToleranceConfig,
) -> Result<TauEstimate> {
    estimate_tau_with(
        m,
        &TauOptions {
            grid_points,
            width,
            ..Default::default()
        },
        tol,
    )
}

pub fn estimate_tau_with(m: &GeneratorMatrix, opts: &TauOptions, tol: &ToleranceConfig) -> Result<TauEstimate> {
    if opts.grid_points < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid_points must be at least 16, got {}",
            opts.grid_points
        )));
    }
    if !(opts.width > 0.0 && opts.width.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bracket width must be positive, got {}",
            opts.width
        )));
    }
    if let Some(h) = opts.horizon {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {h}")));
        }
    }
    let report = validate_generator(m, tol)?;
    if report.satisfies_def1 && report.is_nsd {
        let spec = spectral_decompose(m, tol)?;
        if spec.is_nsd_corank_one() {
            return estimate_tau_symmetric(&spec, opts, tol);
        }
    }
    estimate_tau_general(m, opts, tol)
}

fn estimate_tau_symmetric(
    spec: &SpectralDecomposition,
    opts: &TauOptions,
    tol: &ToleranceConfig,
) -> Result<TauEstimate> {
    let t_star = positivity_time_bound(spec)?;
    let min_at = |t: f64| -> Result<f64> { Ok(spectral_exponential(spec, t)?.min()) };

    // The bound is tight only in degenerate cases; for n = 2 it is zero.
    let mut end = if t_star > 0.0 { t_star } else { opts.width };
    let mut extensions = 0;
    while min_at(end)? <= tol.eps_pos {
        extensions += 1;
        if extensions > 1000 {
            return Err(Error::Precondition(format!(
                "forward propagator not strictly positive beyond the analytic bound {t_star}"
            )));
        }
        end += opts.width;
    }

    let scan = scan_grid(&min_at, end, opts.grid_points, tol.eps_pos)?;
    let (lo, hi) = refine_last_crossing(&min_at, &scan, opts.width, tol.eps_pos)?;

    let mut certificate_min = f64::INFINITY;
    let samples = opts.certify_samples;
    for k in 0..samples {
        let t = hi + (end.max(hi) - hi) * k as f64 / (samples.max(2) - 1) as f64;
        certificate_min = certificate_min.min(min_at(t)?);
    }

    Ok(TauEstimate {
        verdict: TauVerdict::Finite,
        tau_lo: Some(lo),
        tau_hi: Some(hi),
        certified_bound: Some(t_star),
        horizon: end,
        crossings: scan.crossings,
        certificate_samples: samples,
        certificate_min_entry: (samples > 0).then_some(certificate_min),
    })
}

fn estimate_tau_general(m: &GeneratorMatrix, opts: &TauOptions, tol: &ToleranceConfig) -> Result<TauEstimate> {
    let pf = spectral_pf_test(m, tol)?;
    let horizon = match opts.horizon {
        Some(h) => h,
        None => default_horizon(m, tol)?,
    };
    let mut estimate = TauEstimate {
        verdict: TauVerdict::NotEventuallyPositive,
        tau_lo: None,
        tau_hi: None,
        certified_bound: None,
        horizon,
        crossings: Vec::new(),
        certificate_samples: 0,
        certificate_min_entry: None,
    };
    if pf.verdict == PfVerdict::CertifiedNot {
        return Ok(estimate);
    }

    let min_at = |t: f64| -> Result<f64> { Ok(matrix_exponential_with(m, t, tol)?.0.min()) };
    let scan = scan_grid(&min_at, horizon, opts.grid_points, tol.eps_pos)?;
    estimate.crossings = scan.crossings.clone();

    let mut tail_min = f64::INFINITY;
    for k in 0..=10 {
        let t = horizon * (1.0 + 0.1 * k as f64);
        tail_min = tail_min.min(min_at(t)?);
    }
    estimate.certificate_samples = 11;
    estimate.certificate_min_entry = Some(tail_min);

    if tail_min > tol.eps_pos && pf.verdict == PfVerdict::CertifiedEventuallyPositive {
        let (lo, hi) = refine_last_crossing(&min_at, &scan, opts.width, tol.eps_pos)?;
        estimate.verdict = TauVerdict::Finite;
        estimate.tau_lo = Some(lo);
        estimate.tau_hi = Some(hi);
    } else {
        estimate.verdict = TauVerdict::UndeterminedWithinHorizon;
    }
    Ok(estimate)
}

/// `50 / min |Re λ|` over eigenvalues with nonzero real part, or `100` when
/// every real part vanishes.
fn default_horizon(m: &GeneratorMatrix, tol: &ToleranceConfig) -> Result<f64> {
    let threshold = tol.zero_threshold(m.spectral_radius_estimate());
    let eigs = complex_eigenvalues(m)?;
    let smallest = eigs
        .iter()
        .map(|z| z.re.abs())
        .filter(|&re| re > threshold)
        .fold(f64::INFINITY, f64::min);
    Ok(if smallest.is_finite() { 50.0 / smallest } else { 100.0 })
}

struct Scan {
    times: Vec<f64>,
    mins: Vec<f64>,
    crossings: Vec<(f64, f64)>,
}

fn scan_grid(
    min_at: &impl Fn(f64) -> Result<f64>,
    end: f64,
    points: usize,
    eps_pos: f64,
) -> Result<Scan> {
    let times: Vec<f64> = (0..points)
        .map(|k| end * k as f64 / (points - 1) as f64)
        .collect();
    let mins = times.iter().map(|&t| min_at(t)).collect::<Result<Vec<_>>>()?;
    let crossings = times
        .windows(2)
        .zip(mins.windows(2))
        .filter(|(_, m)| (m[0] > eps_pos) != (m[1] > eps_pos))
        .map(|(t, _)| (t[0], t[1]))
        .collect();
    Ok(Scan {
        times,
        mins,
        crossings,
    })
}

/// Bisects the last grid cell where the minimal entry turns strictly
/// positive. The scan must end strictly positive.
fn refine_last_crossing(
    min_at: &impl Fn(f64) -> Result<f64>,
    scan: &Scan,
    width: f64,
    eps_pos: f64,
) -> Result<(f64, f64)> {
    let last_nonpositive = scan
        .mins
        .iter()
        .rposition(|&m| m <= eps_pos)
        .unwrap_or(0);
    if last_nonpositive + 1 >= scan.times.len() {
        return Err(Error::Precondition(
            "propagator is not strictly positive at the end of the scan".into(),
        ));
    }
    let mut lo = scan.times[last_nonpositive];
    let mut hi = scan.times[last_nonpositive + 1];
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if min_at(mid)? > eps_pos {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PfVerdict {
    CertifiedEventuallyPositive,
    CertifiedNot,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfReport {
    pub verdict: PfVerdict,
    /// Eigenvalue with maximal real part, as (re, im).
    pub dominant: (f64, f64),
    /// Distance in real part to the next eigenvalue.
    pub gap: f64,
    pub margin: f64,
    pub right_min: Option<f64>,
    pub left_min: Option<f64>,
}

/// Perron-Frobenius test for eventual exponential positivity of `exp(tM)`.
///
/// Certifies when the eigenvalue of maximal real part is real, simple and
/// strictly separated in real part from the rest, with strictly positive
/// right and left eigenvectors. Rejects when the maximal real part is
/// shared (for instance by a complex pair) or when an eigenvector has mixed
/// signs. Margins that are too thin to decide give `Inconclusive`.
pub fn spectral_pf_test(m: &GeneratorMatrix, tol: &ToleranceConfig) -> Result<PfReport> {
    let n = m.n();
    let scale = m.spectral_radius_estimate();
    let margin = tol.zero_threshold(scale);
    let mut eigs = complex_eigenvalues(m)?;
    eigs.sort_by(|a, b| b.re.total_cmp(&a.re));
    let dominant = eigs[0];
    let gap = dominant.re - eigs[1].re;

    let mut report = PfReport {
        verdict: PfVerdict::Inconclusive,
        dominant: (dominant.re, dominant.im),
        gap,
        margin,
        right_min: None,
        left_min: None,
    };

    if dominant.im.abs() > margin || gap < -margin {
        report.verdict = PfVerdict::CertifiedNot;
        return Ok(report);
    }
    if gap <= margin {
        // Maximal real part shared within tolerance. A complex partner is a
        // genuine rotation mode; a near-repeated real eigenvalue is left
        // undecided.
        let complex_tie = eigs[1..]
            .iter()
            .take_while(|z| dominant.re - z.re <= margin)
            .any(|z| z.im.abs() > margin);
        if complex_tie {
            report.verdict = PfVerdict::CertifiedNot;
        }
        return Ok(report);
    }

    let lambda = dominant.re;
    let shifted = m.matrix() - DMatrix::identity(n, n) * lambda;
    let right = null_vector(&shifted)?;
    let left = null_vector(&shifted.transpose())?;
    let right_min = right.min();
    let left_min = left.min();
    report.right_min = Some(right_min);
    report.left_min = Some(left_min);

    let scale_pos = tol.eps_pos;
    report.verdict = if right_min > scale_pos && left_min > scale_pos {
        PfVerdict::CertifiedEventuallyPositive
    } else if right_min < -scale_pos || left_min < -scale_pos {
        PfVerdict::CertifiedNot
    } else {
        PfVerdict::Inconclusive
    };
    Ok(report)
}

/// Unit vector spanning the numerical kernel, sign-normalized to a positive
/// entry sum.
fn null_vector(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    let svd = a
        .clone()
        .try_svd(false, true, f64::EPSILON, 10_000)
        .ok_or(Error::EigenNoConvergence)?;
    let v_t = svd.v_t.ok_or(Error::EigenNoConvergence)?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let mut v = v_t.row(idx).transpose();
    if v.sum() < 0.0 {
        v.neg_mut();
    }
    Ok(v.normalize())
}

pub(crate) fn complex_eigenvalues(m: &GeneratorMatrix) -> Result<Vec<Complex<f64>>> {
    if m.symmetry_residual() == 0.0 {
        let values = symmetric_eigenvalues_desc(m.matrix().clone())?;
        return Ok(values.into_iter().map(|re| Complex::new(re, 0.0)).collect());
    }
    let schur = m
        .matrix()
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or(Error::EigenNoConvergence)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Check {
    /// `L` is positive semidefinite (eigenvalue route).
    pub psd: bool,
    /// `exp(-tL)` is strictly positive on every probed time (propagator route).
    pub eventually_positive: bool,
    pub probe_times: Vec<f64>,
    pub probe_min_entries: Vec<f64>,
    pub agree: bool,
}

/// Cross-checks the equivalence "L positive semidefinite ⟺ -L eventually
/// exponentially positive" for a symmetric corank-one `L` with zero row
/// sums, computing both sides independently.
///
/// The propagator side probes `exp(-tL)` at times in `[horizon/2, horizon]`;
/// when `L` is PSD it additionally probes just beyond the analytic bound
/// `T*` of `-L`, so the probe covers the region where positivity is
/// guaranteed.
pub fn theorem2_oracle(l: &GeneratorMatrix, tol: &ToleranceConfig, horizon: f64) -> Result<Theorem2Check> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    let report = validate_generator(l, tol)?;
    if !report.satisfies_def1 {
        return Err(Error::Precondition(
            "expected a symmetric corank-one matrix with zero row sums".into(),
        ));
    }
    let psd = report.spectrum.iter().all(|&x| x >= -report.zero_threshold);

    let generator = l.negated();
    let mut probe_times: Vec<f64> = (0..=5).map(|k| horizon * (0.5 + 0.1 * k as f64)).collect();
    if psd {
        let spec = spectral_decompose(&generator, tol)?;
        let t_star = positivity_time_bound(&spec)?;
        probe_times.extend([1.01, 1.5, 2.0, 4.0].iter().map(|f| f * t_star.max(1e-3)));
    }

    let mut probe_min_entries = Vec::with_capacity(probe_times.len());
    let mut eventually_positive = true;
    for &t in &probe_times {
        match matrix_exponential_with(&generator, t, tol) {
            Ok((e, _)) => {
                let min = e.min();
                probe_min_entries.push(min);
                eventually_positive &= min > tol.eps_pos;
            }
            Err(Error::Overflow { .. }) => {
                // Unbounded growth along a mode orthogonal to 1.
                probe_min_entries.push(f64::NEG_INFINITY);
                eventually_positive = false;
            }
            Err(e) => return Err(e),
        }
    }

    Ok(Theorem2Check {
        psd,
        eventually_positive,
        probe_times,
        probe_min_entries,
        agree: psd == eventually_positive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::random::from_spectrum;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn example1_bound() {
        let spec = spectral_decompose(&catalog::example1(), &tol()).unwrap();
        let t_star = positivity_time_bound(&spec).unwrap();
        assert!((t_star - 3f64.ln() / 2.0).abs() < 1e-12);
        let f = spectral_exponential(&spec, t_star * 1.0001).unwrap();
        assert!(f.min() > 0.0);
    }

    #[test]
    fn two_state_bound_is_zero() {
        let spec = spectral_decompose(&catalog::two_state(0.7), &tol()).unwrap();
        assert_eq!(positivity_time_bound(&spec).unwrap(), 0.0);
    }

    #[test]
    fn bound_rejects_zero_gap() {
        let zero = GeneratorMatrix::from_matrix(DMatrix::zeros(3, 3)).unwrap();
        let spec = spectral_decompose(&zero, &tol()).unwrap();
        assert!(matches!(positivity_time_bound(&spec), Err(Error::SpectralGap { .. })));
    }

    #[test]
    fn example1_tau() {
        let est = estimate_tau(&catalog::example1(), 512, 1e-4, &tol()).unwrap();
        assert_eq!(est.verdict, TauVerdict::Finite);
        let (lo, hi) = (est.tau_lo.unwrap(), est.tau_hi.unwrap());
        assert!(lo >= 0.165 && hi <= 0.175, "[{lo}, {hi}]");
        assert!(hi - lo <= 1e-4);
        assert!(hi <= est.certified_bound.unwrap());
        assert!(est.certificate_min_entry.unwrap() > 0.0);
        // Every crossing lies at or before the reported bracket.
        assert!(est.crossings.iter().all(|c| c.1 <= hi + 1e-12 || c.0 < hi));
    }

    #[test]
    fn classical_tau_is_zero_plus() {
        let est = estimate_tau(&catalog::three_cycle(), 512, 1e-4, &tol()).unwrap();
        assert_eq!(est.verdict, TauVerdict::Finite);
        assert!(est.tau_hi.unwrap() <= 1e-4);
        assert_eq!(est.tau_lo, Some(0.0));
    }

    #[test]
    fn two_state_tau() {
        let est = estimate_tau(&catalog::two_state(1.0), 64, 1e-4, &tol()).unwrap();
        assert_eq!(est.verdict, TauVerdict::Finite);
        assert!(est.tau_hi.unwrap() <= 1e-4);
    }

    #[test]
    fn example2_is_never_positive() {
        let est = estimate_tau(&catalog::example2(), 512, 1e-4, &tol()).unwrap();
        assert_eq!(est.verdict, TauVerdict::NotEventuallyPositive);
        assert_eq!(est.horizon, 100.0);
    }

    #[test]
    fn argument_errors() {
        let m = catalog::example1();
        assert!(estimate_tau(&m, 8, 1e-4, &tol()).is_err());
        assert!(estimate_tau(&m, 64, 0.0, &tol()).is_err());
    }

    #[test]
    fn pf_examples() {
        let r = spectral_pf_test(&catalog::example1(), &tol()).unwrap();
        assert_eq!(r.verdict, PfVerdict::CertifiedEventuallyPositive);
        assert!(r.dominant.0.abs() < 1e-12);

        let r = spectral_pf_test(&catalog::example2(), &tol()).unwrap();
        assert_eq!(r.verdict, PfVerdict::CertifiedNot);

        let r = spectral_pf_test(&catalog::rank_one_minus_identity(5), &tol()).unwrap();
        assert_eq!(r.verdict, PfVerdict::CertifiedEventuallyPositive);
    }

    #[test]
    fn pf_rejects_mixed_sign_dominant_vector() {
        // Dominant eigenvalue 0 with eigenvector (1, -1) direction.
        let m = GeneratorMatrix::from_rows(&[[-1.0, -1.0], [-1.0, -1.0]]).unwrap();
        let r = spectral_pf_test(&m, &tol()).unwrap();
        assert_eq!(r.verdict, PfVerdict::CertifiedNot);
    }

    #[test]
    fn pf_asymmetric_positive_case() {
        // Irreducible nonsymmetric Metzler generator: classical chain.
        let m = GeneratorMatrix::from_rows(&[[-1.0, 1.0, 0.0], [0.0, -2.0, 2.0], [3.0, 0.0, -3.0]]).unwrap();
        let r = spectral_pf_test(&m, &tol()).unwrap();
        assert_eq!(r.verdict, PfVerdict::CertifiedEventuallyPositive);
        let est = estimate_tau(&m, 64, 1e-3, &tol()).unwrap();
        assert_eq!(est.verdict, TauVerdict::Finite);
    }

    #[test]
    fn psd_equivalence_examples() {
        let l = catalog::example1().negated();
        let check = theorem2_oracle(&l, &tol(), 5.0).unwrap();
        assert!(check.psd && check.eventually_positive && check.agree);

        let spec = spectral_decompose(&l, &tol()).unwrap();
        let flipped: Vec<f64> = spec
            .eigenvalues
            .iter()
            .map(|&x| if (x - 8.0).abs() < 1e-9 { -8.0 } else { x })
            .collect();
        let bad = from_spectrum(&spec.eigenvectors, &flipped);
        let check = theorem2_oracle(&bad, &tol(), 5.0).unwrap();
        assert!(!check.psd && !check.eventually_positive && check.agree);

        let a = 0.8;
        let pair = GeneratorMatrix::from_rows(&[[a, -a], [-a, a]]).unwrap();
        let check = theorem2_oracle(&pair, &tol(), 5.0).unwrap();
        assert!(check.psd && check.eventually_positive && check.agree);
    }

    #[test]
    fn psd_equivalence_rejects_non_laplacian() {
        let zero = GeneratorMatrix::from_matrix(DMatrix::zeros(3, 3)).unwrap();
        assert!(matches!(
            theorem2_oracle(&zero, &tol(), 5.0),
            Err(Error::Precondition(_))
        ));
    }
}

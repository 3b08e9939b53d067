//! Acceptance suite. Runs as a plain binary and prints one line per
//! criterion; exits nonzero when any criterion fails.

mod support;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use approx::abs_diff_eq;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use signed_aot::catalog;
use signed_aot::cli::{extrema_row, permutation_distance};
use signed_aot::entropy::{entropy_derivative, evolve_trajectory, uniform_times, SignedDistribution};
use signed_aot::experiment::{aot_verdict, default_basis, fit_propagators, simulate_experiment, VerdictKind};
use signed_aot::model::validate_generator;
use signed_aot::positivity::{estimate_tau, theorem2_oracle, TauVerdict};
use signed_aot::propagator::{classify_signs, matrix_exponential, propagator_pair, rotation_closed_form, SignKind};
use signed_aot::random::{from_spectrum, random_kernel_basis, seeded_rng};
use signed_aot::{GeneratorMatrix, ToleranceConfig};
use support::{backward_diagonal, max_abs_diff, rotation, taylor_expm};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: signed_aot::Error) -> String {
    e.to_string()
}

fn within_runtime(start: Instant, limit: Duration) -> Result<(), String> {
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn verdict(m: &GeneratorMatrix, t: f64, delta: f64) -> Result<VerdictKind, String> {
    let basis = default_basis(m.n(), delta, &tol()).map_err(err)?;
    let observed = simulate_experiment(m, &basis, t, 0.0, 0, &tol()).map_err(err)?;
    let fit = fit_propagators(&basis, &observed, &tol()).map_err(err)?;
    Ok(aot_verdict(&fit, &tol(), t).map_err(err)?.kind)
}

fn table_reproduction() -> Outcome {
    let start = Instant::now();
    let m = catalog::example1();
    let expected = [
        (0.05, [-0.010, 0.895, -0.123, 1.369], "inconclusive"),
        (0.20, [0.007, 0.677, -0.988, 3.965], "conclusive"),
    ];
    for (t, rounded, label) in expected {
        let row = extrema_row(&m, t, &tol()).map_err(err)?;
        ensure(row.rounded == rounded, || format!("t = {t}: got {:?}", row.rounded))?;
        ensure(row.verdict == label, || format!("t = {t}: verdict {}", row.verdict))?;
        let raw = [row.min_forward, row.max_forward, row.min_backward, row.max_backward];
        for (x, r) in raw.iter().zip(rounded) {
            ensure((x - r).abs() <= 5e-4, || format!("t = {t}: {x} too far from {r}"))?;
        }
        // Independent exponential agrees with the extrema.
        let f = taylor_expm(m.matrix(), t);
        ensure((f.min() - row.min_forward).abs() < 1e-12, || "taylor min F differs".into())?;
    }
    within_runtime(start, Duration::from_secs(1))?;
    Ok(format!("both rows match ({:?})", start.elapsed()))
}

fn crossover() -> Outcome {
    let start = Instant::now();
    let est = estimate_tau(&catalog::example1(), 512, 1e-4, &tol()).map_err(err)?;
    ensure(est.verdict == TauVerdict::Finite, || format!("verdict {:?}", est.verdict))?;
    let (lo, hi) = (est.tau_lo.unwrap_or(f64::NAN), est.tau_hi.unwrap_or(f64::NAN));
    ensure(lo >= 0.160 && hi <= 0.180, || format!("bracket [{lo}, {hi}]"))?;
    ensure(hi - lo <= 1e-3, || format!("width {}", hi - lo))?;
    // Sign change across the bracket with the independent exponential.
    let m = catalog::example1();
    ensure(taylor_expm(m.matrix(), lo).min() <= 1e-12 && taylor_expm(m.matrix(), hi).min() > 0.0, || {
        "bracket does not straddle the sign change".into()
    })?;
    within_runtime(start, Duration::from_secs(1))?;
    Ok(format!("tau in [{lo:.6}, {hi:.6}] ({:?})", start.elapsed()))
}

fn spectrum() -> Outcome {
    let report = validate_generator(&catalog::example1(), &tol()).map_err(err)?;
    ensure(report.satisfies_def1, || "not a signed-Laplacian generator".into())?;
    ensure(report.spectrum.len() == 4, || format!("spectrum {:?}", report.spectrum))?;
    for (got, want) in report.spectrum.iter().zip([0.0, -2.0, -4.0, -8.0]) {
        ensure(abs_diff_eq!(*got, want, epsilon = 1e-9), || format!("spectrum {:?}", report.spectrum))?;
    }
    Ok(format!("spectrum {:?}", report.spectrum))
}

fn rotation_closed_form_check() -> Outcome {
    let m = catalog::example2();
    let end = 4.0 * PI / 3f64.sqrt();
    let mut worst = 0.0f64;
    for k in 1..=50 {
        let t = end * k as f64 / 50.0;
        let e = matrix_exponential(&m, t).map_err(err)?;
        worst = worst.max(max_abs_diff(&e, &rotation_closed_form(t)));
        worst = worst.max(max_abs_diff(&e, &rotation(t)));
        ensure(verdict(&m, t, 0.1)? != VerdictKind::ForwardConclusive, || format!("conclusive at t = {t}"))?;
    }
    ensure(worst <= 1e-10, || format!("closed-form deviation {worst:e}"))?;

    let t = 2.0 * PI / (3.0 * 3f64.sqrt());
    let pair = propagator_pair(&m, t, &tol()).map_err(err)?;
    let b = &pair.backward.matrix;
    let dist = permutation_distance(b);
    ensure(dist <= 1e-9, || format!("backward propagator {dist:e} from a permutation"))?;
    ensure(b.diagonal().amax() <= 1e-9, || "backward propagator is the identity, not a cycle".into())?;

    let est = estimate_tau(&m, 512, 1e-4, &tol()).map_err(err)?;
    ensure(est.verdict == TauVerdict::NotEventuallyPositive, || format!("tau verdict {:?}", est.verdict))?;
    Ok(format!("max deviation {worst:.1e}, cyclic shift within {dist:.1e}"))
}

/// Signed-Laplacian generator with a prescribed spectrum, so the diagonal of B(t) can be
/// computed without the library's eigensolver.
fn known_def1(n: usize, seed: u64) -> (GeneratorMatrix, DMatrix<f64>, Vec<f64>) {
    let mut rng = seeded_rng(seed);
    let basis = random_kernel_basis(n, &mut rng);
    let gap: f64 = rng.random_range(0.5..1.5);
    let mut eigenvalues = vec![0.0, -gap];
    for _ in 2..n {
        eigenvalues.push(-gap * rng.random_range(1.0..4.0));
    }
    (from_spectrum(&basis, &eigenvalues), basis, eigenvalues)
}

fn property_suite() -> Outcome {
    let start = Instant::now();
    let t = tol();
    let mut violations = Vec::new();
    let mut forward_positive = 0;
    for i in 0..100u64 {
        let n = 3 + (i % 6) as usize;
        let (m, basis, eigenvalues) = known_def1(n, 1000 + i);
        let t_star = ((n - 1) as f64).ln() / eigenvalues[1].abs();
        for k in 1..=10 {
            let time = 2.0 * t_star * k as f64 / 10.0;
            let pair = propagator_pair(&m, time, &t).map_err(err)?;
            let f = classify_signs(&pair.forward.matrix, &t);
            let b = classify_signs(&pair.backward.matrix, &t);
            if f.kind == SignKind::StrictlyPositive {
                forward_positive += 1;
                if b.kind != SignKind::HasNegativeEntry {
                    violations.push(format!("(a) gen {i} t {time}"));
                }
            }
            if pair.backward.matrix.row_iter().any(|r| r.iter().all(|&x| x >= -t.eps_pos)) {
                violations.push(format!("(b) gen {i} t {time}"));
            }
            let oracle = backward_diagonal(&basis, &eigenvalues, time);
            for (j, d) in oracle.iter().enumerate() {
                let computed = pair.backward.matrix[(j, j)];
                if !(*d > 1.0 && computed > 1.0) || (computed - d).abs() > 1e-9 * d.max(1.0) {
                    violations.push(format!("(c) gen {i} t {time} entry {j}: {computed} vs {d}"));
                }
            }
            if verdict(&m, time, 0.1)? == VerdictKind::AnomalousBackwardPositive {
                violations.push(format!("(d) gen {i} t {time}"));
            }
        }
    }
    ensure(violations.is_empty(), || format!("{} violations, first: {}", violations.len(), violations[0]))?;
    within_runtime(start, Duration::from_secs(30))?;
    Ok(format!("1000 cases, {forward_positive} with F > 0, 0 violations ({:?})", start.elapsed()))
}

fn equivalence_oracle() -> Outcome {
    let mut disagreements = Vec::new();
    let mut psd_count = 0;
    for i in 0..100u64 {
        let n = 3 + (i % 6) as usize;
        let mut rng = seeded_rng(5000 + i);
        let basis = random_kernel_basis(n, &mut rng);
        let psd = i % 2 == 0;
        // Eigenvalues of L; the non-PSD half gets one negative mode.
        let mut eigenvalues = vec![0.0];
        for _ in 1..n {
            eigenvalues.push(rng.random_range(0.5..4.0));
        }
        if !psd {
            let k = rng.random_range(1..n);
            eigenvalues[k] = -rng.random_range(0.5..3.0);
        }
        let l = from_spectrum(&basis, &eigenvalues);
        let check = theorem2_oracle(&l, &tol(), 20.0).map_err(err)?;
        // Propagator side checked once more with the independent exponential
        // at the far end of the probe window.
        let far = taylor_expm(&(-l.matrix()), 20.0);
        let independent = far.iter().all(|x| x.is_finite()) && far.min() > 0.0;
        if !check.agree || check.psd != psd || check.eventually_positive != psd || independent != psd {
            disagreements.push(i);
        }
        psd_count += usize::from(psd);
    }
    ensure(disagreements.is_empty(), || format!("disagreements at {disagreements:?}"))?;
    Ok(format!("100 matrices ({psd_count} PSD), 0 disagreements"))
}

fn second_law() -> Outcome {
    let mut worst_fd = 0.0f64;
    for i in 0..60u64 {
        let n = 2 + (i % 7) as usize;
        let mut rng = seeded_rng(9000 + i);
        let m = if i % 2 == 0 {
            known_def1(n, 9000 + i).0
        } else {
            GeneratorMatrix::from_matrix(DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal)))
                .map_err(err)?
        };
        let mut w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let shift = (w.iter().sum::<f64>() - 1.0) / n as f64;
        w.iter_mut().for_each(|x| *x -= shift);
        let p = SignedDistribution::new(w, &tol()).map_err(err)?;
        let h = 1e-5;
        let h2 = |t: f64| -(taylor_expm(m.matrix(), t) * p.weights()).norm_squared().log2();
        let fd = (h2(h) - h2(-h)) / (2.0 * h);
        let analytic = entropy_derivative(&m, &p).map_err(err)?;
        worst_fd = worst_fd.max((analytic - fd).abs());
    }
    ensure(worst_fd <= 1e-6, || format!("finite-difference mismatch {worst_fd:e}"))?;

    let mut min_increment = f64::INFINITY;
    let mut trajectories = vec![(catalog::example1(), SignedDistribution::point_mass(4, 0))];
    for i in 0..20u64 {
        let n = 3 + (i % 6) as usize;
        trajectories.push((known_def1(n, 7000 + i).0, SignedDistribution::point_mass(n, (i as usize) % n)));
    }
    let signed = SignedDistribution::new(vec![1.5, -0.25, -0.25, 0.0], &tol()).map_err(err)?;
    trajectories.push((catalog::example1(), signed));
    for (m, p0) in &trajectories {
        let report = evolve_trajectory(m, p0, &uniform_times(2.0, 200), &tol()).map_err(err)?;
        min_increment = min_increment.min(report.min_entropy_increment.unwrap_or(0.0));
    }
    ensure(min_increment >= -1e-9, || format!("entropy decreased by {min_increment:e}"))?;

    let mut drift = 0.0f64;
    for p0 in [
        SignedDistribution::point_mass(3, 0),
        SignedDistribution::new(vec![0.9, 0.6, -0.5], &tol()).map_err(err)?,
    ] {
        let report = evolve_trajectory(&catalog::example2(), &p0, &uniform_times(10.0, 200), &tol()).map_err(err)?;
        let h0 = report.entropies[0];
        drift = drift.max(report.entropies.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max));
    }
    ensure(drift <= 1e-9, || format!("rotation entropy drift {drift:e}"))?;
    Ok(format!(
        "fd error {worst_fd:.1e}, min increment {min_increment:.1e}, rotation drift {drift:.1e}"
    ))
}

fn classical_baseline() -> Outcome {
    let m = catalog::three_cycle();
    for t in [1e-4, 1e-3, 1e-2, 1.0] {
        let f = taylor_expm(m.matrix(), t);
        let lib = matrix_exponential(&m, t).map_err(err)?;
        ensure(f.min() > 0.0 && lib.min() > tol().eps_pos, || format!("F not positive at t = {t}"))?;
    }
    let est = estimate_tau(&m, 512, 1e-4, &tol()).map_err(err)?;
    ensure(est.verdict == TauVerdict::Finite, || format!("verdict {:?}", est.verdict))?;
    let hi = est.tau_hi.unwrap_or(f64::INFINITY);
    ensure(hi <= 1e-3, || format!("upper end {hi}"))?;
    Ok(format!("F > 0 at all times, tau upper end {hi:.1e}"))
}

fn fit_uniqueness() -> Outcome {
    let mut worst = 0.0f64;
    for (m, times) in [
        (catalog::example1(), [0.05, 0.2, 1.0]),
        (catalog::example2(), [0.3, 1.0, 2.0 * PI / (3.0 * 3f64.sqrt())]),
    ] {
        for t in times {
            for delta in [0.05, 0.1, 0.5] {
                let basis = default_basis(m.n(), delta, &tol()).map_err(err)?;
                let observed = simulate_experiment(&m, &basis, t, 0.0, 0, &tol()).map_err(err)?;
                let fit = fit_propagators(&basis, &observed, &tol()).map_err(err)?;
                worst = worst.max(max_abs_diff(&fit.forward, &taylor_expm(m.matrix(), t)));
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("table reproduction", table_reproduction),
        ("crossover bracket", crossover),
        ("spectrum", spectrum),
        ("rotation closed form", rotation_closed_form_check),
        ("forward/backward sign properties", property_suite),
        ("PSD vs eventual positivity", equivalence_oracle),
        ("entropy monotonicity", second_law),
        ("classical baseline", classical_baseline),
        ("fit uniqueness", fit_uniqueness),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] AC{} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] AC{} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

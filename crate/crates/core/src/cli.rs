//! Command implementations behind the `signed-aot` binary. Every command
//! returns a [`RunReport`] that echoes its inputs and the tolerances used,
//! so verdicts can be audited from the report alone.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::catalog;
use crate::entropy::{evolve_trajectory, uniform_times, SignedDistribution, TrajectoryReport};
use crate::error::{Error, Result};
use crate::experiment::{run_aot_protocol, ProtocolConfig, ProtocolReport, VerdictKind};
use crate::io::{load_generator, Scale};
use crate::model::{max_abs, validate_generator, GeneratorMatrix, ToleranceConfig, ValidationReport};
use crate::positivity::{estimate_tau_with, TauEstimate, TauOptions, TauVerdict};
use crate::propagator::{
    classify_signs, matrix_exponential_with, rotation_closed_form, SignKind,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub arguments: Map<String, Value>,
    pub tolerances: ToleranceConfig,
    pub results: Payload,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Validation(ValidationReport),
    Table1(Vec<ExtremaRow>),
    Tau(TauEstimate),
    Aot(Box<ProtocolReport>),
    EntropyTrace(TrajectoryReport),
    Repro(ReproSummary),
}

/// Entrywise extrema of `F(t)` and `B(t)` with the sign-test verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremaRow {
    pub t: f64,
    pub min_forward: f64,
    pub max_forward: f64,
    pub min_backward: f64,
    pub max_backward: f64,
    /// "conclusive", "inconclusive" or "anomalous".
    pub verdict: String,
    /// Extrema rounded to three decimals, for display only.
    pub rounded: [f64; 4],
}

/// Round half to even at three decimals.
pub fn round3(x: f64) -> f64 {
    let r = (x * 1000.0).round_ties_even() / 1000.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn extrema_row(m: &GeneratorMatrix, t: f64, tol: &ToleranceConfig) -> Result<ExtremaRow> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    let (forward, _) = matrix_exponential_with(m, t, tol)?;
    let (backward, _) = matrix_exponential_with(m, -t, tol)?;
    let f = classify_signs(&forward, tol);
    let b = classify_signs(&backward, tol);
    let verdict = match (f.kind, b.kind) {
        (SignKind::StrictlyPositive, SignKind::HasNegativeEntry) => "conclusive",
        (SignKind::HasNegativeEntry, SignKind::StrictlyPositive) => "anomalous",
        _ => "inconclusive",
    };
    Ok(ExtremaRow {
        t,
        min_forward: f.min_entry,
        max_forward: f.max_entry,
        min_backward: b.min_entry,
        max_backward: b.max_entry,
        verdict: verdict.to_string(),
        rounded: [
            round3(f.min_entry),
            round3(f.max_entry),
            round3(b.min_entry),
            round3(b.max_entry),
        ],
    })
}

fn report(command: &str, arguments: Value, tol: &ToleranceConfig, results: Payload) -> RunReport {
    let arguments = match arguments {
        Value::Object(map) => map,
        _ => Map::new(),
    };
    RunReport {
        command: command.to_string(),
        arguments,
        tolerances: *tol,
        results,
        version: VERSION.to_string(),
    }
}

fn scale_echo(scale: Option<Scale>) -> Value {
    scale.map_or(Value::Null, |s| json!([s.num, s.den]))
}

pub fn cmd_validate(path: &Path, scale: Option<Scale>, tol: &ToleranceConfig) -> Result<RunReport> {
    let m = load_generator(path, scale)?;
    let validation = validate_generator(&m, tol)?;
    Ok(report(
        "validate",
        json!({ "matrix": path.display().to_string(), "scale": scale_echo(scale) }),
        tol,
        Payload::Validation(validation),
    ))
}

pub fn cmd_table1(path: &Path, scale: Option<Scale>, times: &[f64], tol: &ToleranceConfig) -> Result<RunReport> {
    let m = load_generator(path, scale)?;
    let times = if times.is_empty() { &[0.05, 0.20][..] } else { times };
    let rows = times
        .iter()
        .map(|&t| extrema_row(&m, t, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(report(
        "table1",
        json!({ "matrix": path.display().to_string(), "scale": scale_echo(scale), "t": times }),
        tol,
        Payload::Table1(rows),
    ))
}

pub fn cmd_tau(path: &Path, scale: Option<Scale>, opts: &TauOptions, tol: &ToleranceConfig) -> Result<RunReport> {
    let m = load_generator(path, scale)?;
    let estimate = estimate_tau_with(&m, opts, tol)?;
    Ok(report(
        "tau",
        json!({
            "matrix": path.display().to_string(),
            "scale": scale_echo(scale),
            "grid": opts.grid_points,
            "width": opts.width,
            "horizon": opts.horizon,
            "certify_samples": opts.certify_samples,
        }),
        tol,
        Payload::Tau(estimate),
    ))
}

pub fn cmd_aot(path: &Path, scale: Option<Scale>, t: f64, config: &ProtocolConfig) -> Result<RunReport> {
    let m = load_generator(path, scale)?;
    let protocol = run_aot_protocol(&m, t, config)?;
    Ok(report(
        "aot",
        json!({
            "matrix": path.display().to_string(),
            "scale": scale_echo(scale),
            "t": t,
            "delta": config.delta,
            "noise": config.noise_sigma,
            "seed": config.seed,
            "grid": config.tau.grid_points,
            "width": config.tau.width,
            "horizon": config.tau.horizon,
        }),
        &config.tol,
        Payload::Aot(Box::new(protocol)),
    ))
}

pub fn cmd_entropy_trace(
    path: &Path,
    scale: Option<Scale>,
    p0: &[f64],
    t_max: f64,
    steps: usize,
    tol: &ToleranceConfig,
) -> Result<RunReport> {
    let m = load_generator(path, scale)?;
    if !(t_max > 0.0 && t_max.is_finite()) || steps == 0 {
        return Err(Error::InvalidArgument("t-max must be positive and steps at least 1".into()));
    }
    let p0 = SignedDistribution::new(p0.to_vec(), tol)?;
    let trace = evolve_trajectory(&m, &p0, &uniform_times(t_max, steps), tol)?;
    Ok(report(
        "entropy-trace",
        json!({
            "matrix": path.display().to_string(),
            "scale": scale_echo(scale),
            "p0": p0.weights().as_slice(),
            "t_max": t_max,
            "steps": steps,
        }),
        tol,
        Payload::EntropyTrace(trace),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproSummary {
    pub checks: Vec<ReproCheck>,
    pub all_passed: bool,
}

/// Reproduces both worked examples and the classical baseline, one check
/// per claim.
pub fn cmd_repro(tol: &ToleranceConfig) -> Result<RunReport> {
    let mut checks = Vec::new();
    let mut check = |name: &str, passed: bool, detail: String| {
        checks.push(ReproCheck {
            name: name.to_string(),
            passed,
            detail,
        });
    };

    let ex1 = catalog::example1();
    let ex2 = catalog::example2();

    let expected = [
        (0.05, [-0.010, 0.895, -0.123, 1.369], "inconclusive"),
        (0.20, [0.007, 0.677, -0.988, 3.965], "conclusive"),
    ];
    for (t, values, verdict) in expected {
        let row = extrema_row(&ex1, t, tol)?;
        let raw = [row.min_forward, row.max_forward, row.min_backward, row.max_backward];
        let passed = row.rounded == values
            && raw.iter().zip(values).all(|(r, v)| (r - v).abs() <= 5e-4)
            && row.verdict == verdict;
        check(
            &format!("extrema table at t = {t}"),
            passed,
            format!("rounded {:?}, verdict {}", row.rounded, row.verdict),
        );
    }

    let tau = estimate_tau_with(&ex1, &TauOptions::default(), tol)?;
    let (lo, hi) = (tau.tau_lo.unwrap_or(f64::NAN), tau.tau_hi.unwrap_or(f64::NAN));
    check(
        "example 1 detection time",
        tau.verdict == TauVerdict::Finite && lo >= 0.160 && hi <= 0.180 && hi - lo <= 1e-3,
        format!("{:?} bracket [{lo:.5}, {hi:.5}]", tau.verdict),
    );

    let validation = validate_generator(&ex1, tol)?;
    let spectrum_ok = validation.spectrum.len() == 4
        && validation
            .spectrum
            .iter()
            .zip([0.0, -2.0, -4.0, -8.0])
            .all(|(a, b)| (a - b).abs() <= 1e-9);
    check(
        "example 1 spectrum",
        spectrum_ok && validation.satisfies_def1,
        format!("{:?}", validation.spectrum),
    );

    let horizon = 4.0 * PI / 3f64.sqrt();
    let mut closed_form_err: f64 = 0.0;
    for k in 1..=50 {
        let t = horizon * k as f64 / 50.0;
        let (e, _) = matrix_exponential_with(&ex2, t, tol)?;
        closed_form_err = closed_form_err.max(max_abs(&(e - rotation_closed_form(t))));
    }
    check(
        "example 2 closed form",
        closed_form_err <= 1e-10,
        format!("max deviation {closed_form_err:e}"),
    );

    let shift_time = 2.0 * PI / (3.0 * 3f64.sqrt());
    let (backward, _) = matrix_exponential_with(&ex2, -shift_time, tol)?;
    let perm_err = permutation_distance(&backward);
    check(
        "example 2 permutation backward propagator",
        perm_err <= 1e-9,
        format!("distance to nearest permutation {perm_err:e}"),
    );

    let tau2 = estimate_tau_with(&ex2, &TauOptions::default(), tol)?;
    check(
        "example 2 never eventually positive",
        tau2.verdict == TauVerdict::NotEventuallyPositive,
        format!("{:?}", tau2.verdict),
    );

    let config = ProtocolConfig {
        tol: *tol,
        ..Default::default()
    };
    let mut conclusive = 0;
    for k in 1..=50 {
        let t = horizon * k as f64 / 50.0;
        if run_aot_protocol(&ex2, t, &config)?.verdict.kind == VerdictKind::ForwardConclusive {
            conclusive += 1;
        }
    }
    check(
        "example 2 test never conclusive",
        conclusive == 0,
        format!("{conclusive} conclusive grid times"),
    );

    let cycle = catalog::three_cycle();
    let mut min_positive = f64::INFINITY;
    for t in [1e-4, 1e-3, 1e-2, 1.0] {
        let (f, _) = matrix_exponential_with(&cycle, t, tol)?;
        min_positive = min_positive.min(classify_signs(&f, tol).min_entry);
    }
    let classical = estimate_tau_with(&cycle, &TauOptions::default(), tol)?;
    let classical_hi = classical.tau_hi.unwrap_or(f64::NAN);
    check(
        "classical baseline",
        min_positive > tol.eps_pos && classical_hi <= 1e-3,
        format!("min entry {min_positive:e}, tau_hi {classical_hi:e}"),
    );

    let mut fit_err: f64 = 0.0;
    for (m, times) in [(&ex1, [0.05, 0.20, 1.0]), (&ex2, [0.5, 1.0, 2.0])] {
        for t in times {
            for delta in [0.05, 0.1, 0.5] {
                let cfg = ProtocolConfig {
                    delta,
                    tol: *tol,
                    ..Default::default()
                };
                let protocol = run_aot_protocol(m, t, &cfg)?;
                let (direct, _) = matrix_exponential_with(m, t, tol)?;
                for (i, row) in protocol.forward_fit.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        fit_err = fit_err.max((x - direct[(i, j)]).abs());
                    }
                }
            }
        }
    }
    check(
        "fit uniqueness",
        fit_err <= 1e-9,
        format!("max |F_hat - exp(tM)| = {fit_err:e}"),
    );

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(report(
        "repro",
        json!({}),
        tol,
        Payload::Repro(ReproSummary { checks, all_passed }),
    ))
}

/// Entrywise distance to the closest 0/1 permutation matrix (rounding each
/// entry), or infinity when the rounded pattern is not a permutation.
pub fn permutation_distance(a: &nalgebra::DMatrix<f64>) -> f64 {
    let rounded = a.map(|x| x.round());
    let is_perm = rounded.iter().all(|&x| x == 0.0 || x == 1.0)
        && rounded.row_iter().all(|r| r.sum() == 1.0)
        && rounded.column_iter().all(|c| c.sum() == 1.0);
    if is_perm {
        max_abs(&(a - rounded))
    } else {
        f64::INFINITY
    }
}

/// Serializes a report. CSV is available for `table1` and `entropy-trace`.
pub fn render(report: &RunReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(report)?;
            text.push('\n');
            Ok(text)
        }
        OutputFormat::Csv => render_csv(report),
    }
}

fn render_csv(report: &RunReport) -> Result<String> {
    let mut out = String::new();
    match &report.results {
        Payload::Table1(rows) => {
            out.push_str("t,min_F,max_F,min_B,max_B,verdict\n");
            for row in rows {
                let _ = writeln!(
                    out,
                    "{},{:?},{:?},{:?},{:?},{}",
                    row.t, row.min_forward, row.max_forward, row.min_backward, row.max_backward, row.verdict
                );
            }
        }
        Payload::EntropyTrace(trace) => {
            out.push_str("t,H2_bits,dH2_dt\n");
            for ((t, h), d) in trace.times.iter().zip(&trace.entropies).zip(&trace.derivatives) {
                let _ = writeln!(out, "{t:?},{h:?},{d:?}");
            }
        }
        _ => {
            return Err(Error::UnsupportedFormat {
                command: report.command.clone(),
                format: "csv".into(),
            })
        }
    }
    Ok(out)
}

/// Short human-readable summary for the terminal.
pub fn summary(report: &RunReport) -> String {
    let mut out = String::new();
    match &report.results {
        Payload::Validation(v) => {
            let _ = writeln!(
                out,
                "n = {}  symmetric = {}  rowsums_zero = {}  corank = {}  nsd = {}  signed-Laplacian = {}",
                v.n, v.is_symmetric, v.rowsums_zero, v.corank, v.is_nsd, v.satisfies_def1
            );
            let _ = writeln!(out, "spectrum = {:?}", v.spectrum);
        }
        Payload::Table1(rows) => {
            let _ = writeln!(out, "{:>8} {:>8} {:>8} {:>8} {:>8}  verdict", "t", "min F", "max F", "min B", "max B");
            for row in rows {
                let [a, b, c, d] = row.rounded;
                let _ = writeln!(
                    out,
                    "{:>8} {a:>+8.3} {b:>+8.3} {c:>+8.3} {d:>+8.3}  {}",
                    row.t, row.verdict
                );
            }
        }
        Payload::Tau(e) => {
            let _ = writeln!(out, "verdict = {:?}", e.verdict);
            if let (Some(lo), Some(hi)) = (e.tau_lo, e.tau_hi) {
                let _ = writeln!(out, "tau in [{lo:.6}, {hi:.6}]");
            }
            if let Some(b) = e.certified_bound {
                let _ = writeln!(out, "analytic positivity bound T* = {b:.6}");
            }
        }
        Payload::Aot(p) => {
            let _ = writeln!(
                out,
                "t = {}  verdict = {:?}  F {:?} (min {:+.3e})  B {:?} (min {:+.3e})",
                p.test_time,
                p.verdict.kind,
                p.verdict.forward_class.kind,
                p.verdict.forward_class.min_entry,
                p.verdict.backward_class.kind,
                p.verdict.backward_class.min_entry
            );
            if let Some(reached) = p.reached_tau {
                let _ = writeln!(out, "t >= tau_hi: {reached}");
            }
            for w in &p.warnings {
                let _ = writeln!(out, "WARNING: {w}");
            }
        }
        Payload::EntropyTrace(t) => {
            let _ = writeln!(
                out,
                "{} points, H2 from {:.6} to {:.6} bits, min increment {:?}",
                t.times.len(),
                t.entropies.first().copied().unwrap_or(f64::NAN),
                t.entropies.last().copied().unwrap_or(f64::NAN),
                t.min_entropy_increment
            );
        }
        Payload::Repro(r) => {
            for c in &r.checks {
                let _ = writeln!(out, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let passed = r.checks.iter().filter(|c| c.passed).count();
            let _ = writeln!(out, "{passed}/{} checks passed", r.checks.len());
        }
    }
    out
}

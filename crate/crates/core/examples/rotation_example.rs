//! The antisymmetric 3-state generator: its propagator is a rotation about
//! the all-ones axis and never becomes strictly positive, so the sign test
//! stays inconclusive forever.
//!
//! Run with `cargo run --example rotation_example`.

use std::f64::consts::PI;

use signed_aot::cli::permutation_distance;
use signed_aot::experiment::{run_aot_protocol, ProtocolConfig};
use signed_aot::positivity::{estimate_tau, spectral_pf_test};
use signed_aot::propagator::{matrix_exponential, rotation_closed_form};
use signed_aot::{catalog, ToleranceConfig};

fn main() -> signed_aot::Result<()> {
    let tol = ToleranceConfig::default();
    let m = catalog::example2();

    let mut worst: f64 = 0.0;
    for k in 1..=50 {
        let t = 4.0 * PI / 3f64.sqrt() * k as f64 / 50.0;
        let diff = matrix_exponential(&m, t)? - rotation_closed_form(t);
        worst = worst.max(diff.abs().max());
    }
    println!("Pade exponential vs closed-form rotation: max deviation {worst:.2e}");

    for k in 1..=3 {
        let t = 2.0 * PI * k as f64 / (3.0 * 3f64.sqrt());
        let b = matrix_exponential(&m, -t)?;
        println!("t_{k} = {t:.6}: B is a permutation to within {:.1e}", permutation_distance(&b));
    }

    println!("Perron-Frobenius test: {:?}", spectral_pf_test(&m, &tol)?.verdict);
    println!("tau verdict: {:?}", estimate_tau(&m, 512, 1e-4, &tol)?.verdict);

    let config = ProtocolConfig::default();
    for t in [0.3, 1.0, 2.0 * PI / (3.0 * 3f64.sqrt()), 2.5, 7.0] {
        let r = run_aot_protocol(&m, t, &config)?;
        println!(
            "  t = {t:.4}: {:?} (F {:?}, B {:?})",
            r.verdict.kind, r.verdict.forward_class.kind, r.verdict.backward_class.kind
        );
    }
    Ok(())
}

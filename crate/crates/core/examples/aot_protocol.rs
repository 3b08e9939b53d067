//! The preparation / measurement / fit protocol. The experimenter never
//! sees the generator, only the prepared and observed distributions.
//!
//! Run with `cargo run --example aot_protocol`.

use signed_aot::experiment::{run_aot_protocol, ProtocolConfig};
use signed_aot::{catalog, ToleranceConfig};

fn main() -> signed_aot::Result<()> {
    let m = catalog::example1();
    let noiseless = ProtocolConfig::default();
    println!("noiseless, delta = {}", noiseless.delta);
    for t in [0.05, 0.10, 0.165, 0.175, 0.20, 0.50] {
        let r = run_aot_protocol(&m, t, &noiseless)?;
        println!(
            "  t = {t:<6} {:?}  min F_hat {:+.4}  min B_hat {:+.4}  t >= tau: {:?}",
            r.verdict.kind,
            r.verdict.forward_class.min_entry,
            r.verdict.backward_class.min_entry,
            r.reached_tau.unwrap_or(false)
        );
    }

    let noisy = ProtocolConfig {
        noise_sigma: 1e-6,
        seed: 7,
        tol: ToleranceConfig {
            eps_fit: 1e-4,
            ..Default::default()
        },
        ..Default::default()
    };
    println!("\nGaussian measurement noise sigma = {}", noisy.noise_sigma);
    for t in [0.05, 0.20] {
        let r = run_aot_protocol(&m, t, &noisy)?;
        println!(
            "  t = {t:<6} {:?}  fit residual {:.2e}  cond(O) {:.2}",
            r.verdict.kind, r.residual_forward, r.condition_observed
        );
        for w in &r.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}

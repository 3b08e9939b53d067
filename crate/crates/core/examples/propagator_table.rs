//! Extremal entries of the forward and backward propagators of the 4-state
//! generator, plus the diagonal-dominance witness that keeps the backward
//! propagator signed.
//!
//! Run with `cargo run --example propagator_table`.

use signed_aot::cli::extrema_row;
use signed_aot::model::spectral_decompose;
use signed_aot::propagator::{diagonal_dominance_check, propagator_pair};
use signed_aot::{catalog, ToleranceConfig};

fn main() -> signed_aot::Result<()> {
    let tol = ToleranceConfig::default();
    let m = catalog::example1();
    let spec = spectral_decompose(&m, &tol)?;

    println!("{:>6} {:>8} {:>8} {:>8} {:>8}  verdict", "t", "min F", "max F", "min B", "max B");
    for t in [0.05, 0.10, 0.15, 0.17, 0.20, 0.50, 1.00] {
        let row = extrema_row(&m, t, &tol)?;
        let [a, b, c, d] = row.rounded;
        println!("{t:>6.2} {a:>+8.3} {b:>+8.3} {c:>+8.3} {d:>+8.3}  {}", row.verdict);
    }

    println!();
    for t in [0.05, 0.20] {
        let pair = propagator_pair(&m, t, &tol)?;
        let dominant = diagonal_dominance_check(&pair.backward, &spec, &tol)?;
        println!(
            "t = {t}: diag B = {:.4?}, every diagonal > 1: {dominant}, |F·B - I| = {:.1e}",
            pair.backward.matrix.diagonal().as_slice(),
            pair.inverse_residual
        );
    }
    Ok(())
}

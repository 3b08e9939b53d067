//! Renyi-2 entropy along trajectories: nondecreasing for the 4-state
//! generator, constant under the rotation. Prints CSV to stdout.
//!
//! Run with `cargo run --example entropy_trace > trace.csv`.

use signed_aot::entropy::{evolve_trajectory, renyi2_entropy, uniform_times, SignedDistribution};
use signed_aot::{catalog, ToleranceConfig};

fn main() -> signed_aot::Result<()> {
    let tol = ToleranceConfig::default();
    let times = uniform_times(2.0, 200);

    let signed = SignedDistribution::new(vec![1.2, -0.1, 0.0, -0.1], &tol)?;
    eprintln!("H2 of (1.2, -0.1, 0, -0.1) = {:.6} bits", renyi2_entropy(&signed));

    let dissipative = evolve_trajectory(&catalog::example1(), &signed, &times, &tol)?;
    let rotation = evolve_trajectory(&catalog::example2(), &SignedDistribution::point_mass(3, 0), &times, &tol)?;
    eprintln!(
        "4-state: min increment {:.3e}, final H2 {:.6} (log2 4 = 2)",
        dissipative.min_entropy_increment.unwrap_or(0.0),
        dissipative.entropies.last().unwrap()
    );
    eprintln!(
        "rotation: entropy range [{:.3e}, {:.3e}]",
        rotation.entropies.iter().copied().fold(f64::INFINITY, f64::min),
        rotation.entropies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    );

    println!("t,H2_dissipative,dH2_dissipative,H2_rotation");
    for (k, t) in times.iter().enumerate() {
        println!(
            "{t},{},{},{}",
            dissipative.entropies[k], dissipative.derivatives[k], rotation.entropies[k]
        );
    }
    Ok(())
}

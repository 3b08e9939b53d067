//! Checks the reference generators against the signed-Laplacian conditions.
//!
//! Run with `cargo run --example validate_generator`.

use nalgebra::DMatrix;
use signed_aot::model::{check_second_law, spectral_decompose, validate_generator};
use signed_aot::{catalog, GeneratorMatrix, ToleranceConfig};

fn main() -> signed_aot::Result<()> {
    let tol = ToleranceConfig::default();
    let zero = GeneratorMatrix::from_matrix(DMatrix::zeros(3, 3))?;
    let cases = [
        ("delayed-detection 4-state", catalog::example1()),
        ("antisymmetric rotation", catalog::example2()),
        ("3-cycle (classical)", catalog::three_cycle()),
        ("zero 3x3", zero),
    ];
    for (name, m) in &cases {
        let r = validate_generator(m, &tol)?;
        println!("{name}");
        println!(
            "  symmetric {}  rowsums zero {}  corank {}  NSD {}  signed Laplacian {}",
            r.is_symmetric, r.rowsums_zero, r.corank, r.is_nsd, r.satisfies_def1
        );
        println!("  spectrum of symmetric part {:?}", r.spectrum);
        println!("  Second Law (quadratic form <= 0): {}", check_second_law(m, &tol));
    }

    let spec = spectral_decompose(&catalog::example1(), &tol)?;
    println!("\neigenbasis of the 4-state generator (columns pair with {:?}):", spec.eigenvalues);
    println!("{:.6}", spec.eigenvectors);
    Ok(())
}

//! Cross-checks "L positive semidefinite ⟺ exp(-tL) eventually positive"
//! on random symmetric corank-one Laplacians, computing each side
//! independently.
//!
//! Run with `cargo run --example theorem2_oracle`.

use signed_aot::positivity::theorem2_oracle;
use signed_aot::random::{random_corank_one_laplacian, seeded_rng};
use signed_aot::ToleranceConfig;

fn main() -> signed_aot::Result<()> {
    let tol = ToleranceConfig::default();
    let mut rng = seeded_rng(2021);
    let mut disagreements = 0;
    for k in 0..20 {
        let n = 3 + k % 6;
        let psd = k % 2 == 0;
        let l = random_corank_one_laplacian(n, psd, &mut rng);
        let check = theorem2_oracle(&l, &tol, 20.0)?;
        let last = check.probe_min_entries.last().copied().unwrap_or(f64::NAN);
        println!(
            "n = {n}  PSD {:<5}  eventually positive {:<5}  agree {:<5}  last probe min {last:+.3e}",
            check.psd, check.eventually_positive, check.agree
        );
        disagreements += usize::from(!check.agree);
    }
    println!("{disagreements} disagreements");
    Ok(())
}

//! Likelihood of a fixed label as the mean urn size varies at fixed total.
//!
//! `cargo run --example likelihood_scan`

use doomsday::urn::{self, RankObservation};
use num_traits::ToPrimitive;

fn main() -> doomsday::Result<()> {
    let total = 1_000_000;
    let r = RankObservation::new(20)?;
    let means = [5, 10, 16, 20, 25, 40, 50, 100, 200, 500, 1000, 10_000, 100_000];
    println!("{:>8} {:>8} {:>12} {:>10}", "mean", "urns", "likelihood", "relative");
    for p in urn::uniform_ensemble_scan(total, r, &means)? {
        println!(
            "{:>8} {:>8} {:>12} {:>10.4}",
            p.mean_size,
            p.urns,
            p.likelihood.to_string(),
            p.relative.to_f64().unwrap_or(f64::NAN)
        );
    }

    // the posterior over N / r barely moves when the total grows
    let spread = urn::nu_insensitivity_check(&[10_000, 100_000, 1_000_000], r, &[1, 2, 5, 10, 50])?;
    println!("largest posterior shift across totals: {spread:.3e}");
    Ok(())
}

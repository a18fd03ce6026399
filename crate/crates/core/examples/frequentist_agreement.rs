//! The estimator 2r - 1: unbiased, equal to the posterior median, and its
//! credible bounds cover the truth at the stated rate.
//!
//! `cargo run --example frequentist_agreement`

use doomsday::posterior::{coverage_check, frequentist_estimate, unbiasedness_check, ParetoRankPosterior};

fn main() -> doomsday::Result<()> {
    for r in [1u64, 3, 20, 100_000_000_000] {
        let est = frequentist_estimate(r)?;
        let median = ParetoRankPosterior::new(r as f64)?.median();
        println!("r = {r:<13} 2r-1 = {est:<13} posterior median = {median}");
    }
    for n in [1u64, 4, 10_000, 1_000_000] {
        println!("N = {n:<8} E[2r-1] = {}", unbiasedness_check(n)?);
    }
    for q in [0.9, 0.95, 0.98] {
        println!("q = {q}: bound covers N = 10^4 for {:.4} of ranks", coverage_check(10_000, q)?);
    }
    Ok(())
}

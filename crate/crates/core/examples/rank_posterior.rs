//! Posterior on group size from one rank, closed form against full
//! marginalization over the Pareto parameters.
//!
//! `cargo run --release --example rank_posterior [rank]`

use doomsday::posterior::{
    general_posterior, pareto_closed_form, AlphaPrior, GeneralOptions, GridSpec, ParameterPrior, ParetoRankPosterior,
};

fn main() -> doomsday::Result<()> {
    let r: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10.0);
    let analytic = ParetoRankPosterior::new(r)?;
    println!("rank {r}: support N >= {}, median {}", analytic.r_half(), analytic.median());
    for q in [0.5, 0.9, 0.95, 0.99] {
        println!("  {:.0}% upper bound: {:.6e}", 100.0 * q, analytic.quantile(q)?);
    }

    let grid = GridSpec::default();
    let exact = pareto_closed_form(r, &grid)?;
    let priors = [
        ("uniform [1, 3]", AlphaPrior::Uniform { lo: 1.0, hi: 3.0 }),
        ("exponential(1)", AlphaPrior::Exponential { rate: 1.0 }),
        ("point mass 2.5", AlphaPrior::PointMass(2.5)),
    ];
    for (label, alpha) in priors {
        let post = general_posterior(&ParameterPrior::jeffreys(alpha)?, r, &GeneralOptions::default())?;
        let s = post.summary();
        println!(
            "{label:<16} median {:>12.4} q95 {:>12.4e} sup|Δp|·r {:.2e}",
            s.median,
            s.q95,
            post.sup_distance(&exact, r)?
        );
    }
    Ok(())
}

//! What individuals see: a distribution of group sizes and its
//! observer-weighted view, checked against random draws.
//!
//! `cargo run --example size_biased_views`

use doomsday::distributions::{ks_critical_value, ks_statistic, DistributionSpec, Lognormal};

fn main() -> doomsday::Result<()> {
    let specs = [
        DistributionSpec::pareto(2.0, 1.0)?,
        DistributionSpec::lognormal(3.0, 1.5)?,
        DistributionSpec::bimodal(0.8, Lognormal::new(2.0, 0.5)?, Lognormal::new(8.0, 1.0)?)?,
    ];
    let draws = 100_000;
    let critical = ks_critical_value(draws, 1e-3);
    for spec in specs {
        let view = spec.size_biased()?;
        let mut xs = spec.sample(7, draws);
        let d = ks_statistic(&mut xs, |x| spec.cdf(x));
        println!("{:?}", spec);
        println!(
            "  M_G {:.4}  M_I {:.4}  mean {:.4}  individual-view mean {}",
            spec.median_group(),
            spec.median_individual()?,
            spec.mean()?,
            view.mean().map_or("infinite".into(), |m| format!("{m:.4}"))
        );
        println!("  KS {d:.5} (critical {critical:.5} at 1e-3)");
    }
    Ok(())
}

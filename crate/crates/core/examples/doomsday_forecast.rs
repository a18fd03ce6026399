//! Extinction probability by calendar year for a rank near 10¹¹.
//!
//! `cargo run --example doomsday_forecast`

use doomsday::forecast::{self, BirthRateModel, MedianYear, YearRange};
use doomsday::posterior::{GridSpec, RankPrior};

fn main() -> doomsday::Result<()> {
    let model = BirthRateModel::default();
    let grid = GridSpec::default();
    let range = YearRange::new(model.epoch, 3016.0, 1.0)?;

    for (label, prior) in [
        ("log-uniform r in [r0/3, 3 r0]", RankPrior::around(1e11, 3.0)?),
        ("exact r = 1e11", RankPrior::exact(1e11)?),
    ] {
        let curve = forecast::doomsday_curve(&prior, &model, &range, &grid)?;
        let p = curve.p_at(2100.0).expect("2100 is in range");
        let h = forecast::hazard_fit_window(&curve, model.epoch, 2100.0)?;
        let median = match forecast::milestones(&curve).median_year {
            MedianYear::Year(y) => format!("{y:.1}"),
            MedianYear::Unbounded => "beyond 3016".into(),
        };
        println!("{label}");
        println!("  P(extinct by 2100) = {p:.4}  (odds {:.2}:1 against)", (1.0 - p) / p);
        println!("  best constant hazard 2016-2100 = {:.3}% per year", 100.0 * h);
        println!("  median year = {median}");
    }

    for h in forecast::BASELINE_HAZARDS {
        let c = forecast::constant_hazard_curve(h, &model, &range)?;
        println!("constant {:.2}%/yr: P(2100) = {:.4}", 100.0 * h, c.p_at(2100.0).unwrap());
    }
    Ok(())
}

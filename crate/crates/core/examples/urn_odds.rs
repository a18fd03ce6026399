//! Three candidate ensembles, one drawn label: exact odds and a simulation.
//!
//! `cargo run --example urn_odds`

use doomsday::urn::{self, EnsembleCandidate, RankObservation, UrnEnsemble};

fn main() -> doomsday::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/urns");
    let names = ["fig2_left.txt", "fig2_centre.txt", "fig2_right.txt"];
    let candidates = names
        .iter()
        .map(|n| UrnEnsemble::load(format!("{dir}/{n}")).map(EnsembleCandidate::equal_weight))
        .collect::<doomsday::Result<Vec<_>>>()?;

    let r = RankObservation::new(3)?;
    let exact = urn::candidate_posterior(&candidates, r)?;
    let mc = urn::monte_carlo_oracle(&candidates, r, 20161, 1_000_000)?;

    println!("{:<18} {:>8} {:>10} {:>12}", "ensemble", "exact", "simulated", "likelihood");
    for (i, name) in names.iter().enumerate() {
        println!(
            "{name:<18} {:>8} {:>10.4} {:>12}",
            exact[i].to_string(),
            mc.frequencies()[i],
            candidates[i].ensemble.rank_likelihood(r).to_string()
        );
    }
    println!("odds centre:right = {}", &exact[1] / &exact[2]);

    // which urn did the ball come from?
    for (size, p) in urn::source_urn_posterior(&candidates, r)? {
        println!("P(source urn holds {size} balls) = {p}");
    }
    Ok(())
}

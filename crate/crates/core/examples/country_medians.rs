//! Median country versus the country of the median person, 2016.
//!
//! `cargo run --example country_medians [table.csv]`

use doomsday::population::{ratio_to_f64, PopulationTable};

fn main() -> doomsday::Result<()> {
    let table = match std::env::args().nth(1) {
        Some(path) => PopulationTable::load(path.as_ref())?,
        None => PopulationTable::bundled(),
    };
    let m = table.empirical_medians();
    let name_of = |p: u64| {
        table
            .entries()
            .iter()
            .find(|e| e.population == p)
            .map_or("?", |e| e.name.as_str())
    };
    println!("{} groups, {} people", table.entries().len(), table.total());
    println!("median group:      {} ({})", m.m_group, name_of(m.m_group));
    println!("median individual: {} ({})", m.m_individual, name_of(m.m_individual));

    let between = table.fraction_between(m.m_group as f64, m.m_individual as f64)?;
    println!("living between the two: {:.2}%", 100.0 * ratio_to_f64(between));
    let report = table.neutrality_report();
    for (label, p) in ["<= M_G", "M_G..M_I", "> M_I"].iter().zip(report.bins) {
        println!("  {label:<9} {p:.4}");
    }
    Ok(())
}

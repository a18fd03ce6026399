//! Three population-size models whose median individual lives among
//! 7 billion, and how small their median group is.
//!
//! `cargo run --example fermi_models`

use doomsday::fermi;

fn main() -> doomsday::Result<()> {
    let names = ["pareto", "lognormal", "bimodal"];
    println!("{:<10} {:>12} {:>12} {:>12} {:>10}", "model", "M_G", "M_I", "frac > M_I", "M_I/M_G");
    for (name, spec) in names.iter().zip(fermi::default_models()?) {
        let r = fermi::report(&spec)?;
        println!(
            "{name:<10} {:>12.4e} {:>12.4e} {:>12.3e} {:>10.3e}",
            r.m_group,
            r.m_individual,
            r.frac_exceeding,
            r.ratio()
        );
    }

    let pareto = fermi::calibrate_pareto(fermi::PARETO_N_MIN, fermi::TARGET_MI)?;
    let curves = fermi::curves(&pareto, 4096)?;
    println!(
        "pareto curves: {} points, masses {:.6} / {:.6}",
        curves.n.len(),
        curves.mass_true,
        curves.mass_size_biased
    );
    Ok(())
}

//! Weighting a 1/N prior by observer count flattens it, so almost all mass
//! lands in the top two decades of whatever cutoff is chosen.
//!
//! `cargo run --example sia_pathology`

use doomsday::posterior::sia_truncation_demo;

fn main() -> doomsday::Result<()> {
    for exp in [2, 4, 10, 20, 50, 100] {
        let n_max = 10f64.powi(exp);
        println!("N_max = 1e{exp:<3}  mass in [N_max/100, N_max] = {:.8}", sia_truncation_demo(n_max)?);
    }
    Ok(())
}

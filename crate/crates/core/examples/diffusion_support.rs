//! Measured diffusion support of the numerical spectrum against the modelled
//! intervals, across user distances.

use xlwave::experiments::jaccard_cell;
use xlwave::geometry::{ArrayConfig, UserState};
use xlwave::support::SupportConfig;

fn main() -> xlwave::Result<()> {
    let cfg = ArrayConfig::reference();
    let scfg = SupportConfig::default();
    println!(
        "{:>8} {:>22} {:>22} {:>8} {:>8}",
        "r0 [m]", "measured", "X_k", "J", "J_s"
    );
    for r0 in [2.0, 5.0, 10.0, 20.0, 50.0, 100.0] {
        let c = jaccard_cell(&cfg, &UserState::new(r0, 0.5)?, &scfg, 4.0)?;
        println!(
            "{r0:>8} [{:>9.2}, {:>9.2}] [{:>9.2}, {:>9.2}] {:>8.3} {:>8.3}",
            c.measured.lower(),
            c.measured.upper(),
            c.exact.lower(),
            c.exact.upper(),
            c.jaccard_exact,
            c.jaccard_simplified
        );
    }
    Ok(())
}

//! Stationary-phase approximation of the wave-number spectrum and the
//! diffusion interval it predicts.

use xlwave::geometry::{ArrayConfig, UserState};
use xlwave::posp::{approx_spectrum, diffusion_interval, simplified_interval, stationary_point};
use xlwave::spectral::{wavenumber_quadrature, WaveGrid};

fn main() -> xlwave::Result<()> {
    let cfg = ArrayConfig::reference();
    let user = UserState::new(10.0, 0.05)?;
    let exact = diffusion_interval(&cfg, &user);
    let simple = simplified_interval(&cfg, &user);
    println!("X_k   = [{:.3}, {:.3}] rad/m", exact.lower(), exact.upper());
    println!("X_k,s = [{:.3}, {:.3}] rad/m", simple.lower(), simple.upper());

    let grid = WaveGrid::window(&cfg, 1, exact.lower() - 10.0, exact.upper() + 10.0);
    let approx = approx_spectrum(&cfg, &user, &grid)?;
    let numeric = wavenumber_quadrature(&cfg, &user, &grid)?;
    println!("{:>9} {:>9} {:>10} {:>10}", "k_x", "x_s", "|H_posp|", "|H|");
    for ((k, a), q) in grid
        .points()
        .iter()
        .zip(approx.values())
        .zip(numeric.values())
        .step_by(4)
    {
        let x_s = stationary_point(&cfg, &user, *k)?;
        println!("{k:>9.2} {x_s:>9.4} {:>10.4} {:>10.4}", a.norm(), q.norm());
    }
    Ok(())
}

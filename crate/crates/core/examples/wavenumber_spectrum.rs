//! Numerical wave-number spectrum of a near-field user against its
//! reconstruction from the N angular-domain samples.

use xlwave::geometry::{spatial_channel, ArrayConfig, UserState};
use xlwave::spectral::{angular_transform, sinc_interpolate, wavenumber_quadrature, WaveGrid};

fn main() -> xlwave::Result<()> {
    let cfg = ArrayConfig::reference();
    let user = UserState::new(10.0, 0.05)?;
    let grid = WaveGrid::window(&cfg, 2, -40.0, 100.0);

    let exact = wavenumber_quadrature(&cfg, &user, &grid)?;
    let angular = angular_transform(&cfg, &spatial_channel(&cfg, &user)?)?;
    let rebuilt = sinc_interpolate(&cfg, &angular, &grid)?;

    let peak = exact.peak_magnitude();
    println!("{:>9} {:>10} {:>10}", "k_x", "|H|", "|H_sinc|");
    for ((k, q), s) in grid
        .points()
        .iter()
        .zip(exact.values())
        .zip(rebuilt.values())
        .step_by(8)
    {
        println!("{k:>9.2} {:>10.4} {:>10.4}", q.norm() / peak, s.norm() / peak);
    }
    let worst = exact
        .values()
        .iter()
        .zip(rebuilt.values())
        .map(|(q, s)| (q.norm() - s.norm()).abs() / peak)
        .fold(0.0, f64::max);
    println!("max reconstruction error: {:.3}% of the peak", 100.0 * worst);
    Ok(())
}

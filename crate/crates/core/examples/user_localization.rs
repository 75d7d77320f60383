//! Direction and distance recovered from the support of the reconstructed
//! spectrum of a noiseless angular sweep.

use xlwave::geometry::{spatial_channel, ArrayConfig, UserState};
use xlwave::posp::estimate_user;
use xlwave::spectral::angular_transform;
use xlwave::support::{support_from_angular, SupportConfig};

fn main() -> xlwave::Result<()> {
    let cfg = ArrayConfig::reference();
    let scfg = SupportConfig::default();
    println!("{:>7} {:>7} {:>9} {:>9}", "r0", "omega", "r0_hat", "omega_hat");
    for (r0, omega) in [
        (5.0, 0.0),
        (10.0, 0.3),
        (20.0, -0.5),
        (40.0, 0.7),
        (150.0, 0.1),
        (400.0, 0.2),
    ] {
        let h = spatial_channel(&cfg, &UserState::new(r0, omega)?)?;
        let support = support_from_angular(&cfg, &angular_transform(&cfg, &h)?, &scfg)?;
        let est = estimate_user(&support.interval, &cfg);
        let range = est.range.finite().map_or("far".to_string(), |r| format!("{r:.2}"));
        println!("{r0:>7} {omega:>7} {range:>9} {:>9.4}", est.omega);
    }
    Ok(())
}

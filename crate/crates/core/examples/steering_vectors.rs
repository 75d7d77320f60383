//! Near-field and far-field steering vectors of the default array, and how
//! quickly their correlation decays as the user approaches.

use xlwave::geometry::{
    effective_rayleigh_distance, far_steering_vector, near_steering_vector, rayleigh_distance, ArrayConfig, UserState,
};

fn main() -> xlwave::Result<()> {
    let cfg = ArrayConfig::reference();
    let omega = 0.3;
    println!(
        "N = {}, lambda = {:.4} m, D = {:.4} m, r_ray = {:.2} m, r_eff(0.3) = {:.2} m",
        cfg.n_antennas(),
        cfg.wavelength(),
        cfg.aperture(),
        rayleigh_distance(&cfg),
        effective_rayleigh_distance(&cfg, omega)
    );
    let far = far_steering_vector(&cfg, omega);
    println!("{:>10} {:>12}", "r0 [m]", "|a^H b|");
    for r0 in [2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 300.0, 1000.0] {
        let near = near_steering_vector(&cfg, &UserState::new(r0, omega)?)?;
        println!("{r0:>10} {:>12.4}", far.inner(&near).norm());
    }
    Ok(())
}

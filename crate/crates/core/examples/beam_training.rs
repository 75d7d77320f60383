//! One training round of every scheme for a single user, then a short
//! Monte-Carlo comparison across SNR.

use xlwave::experiments::{beamtrain_rows, ExperimentConfig};
use xlwave::geometry::{ArrayConfig, UserState};
use xlwave::support::SupportConfig;
use xlwave::training::{run_trial, Codebook, Link, Scheme, TrainingConfig};

fn main() -> xlwave::Result<()> {
    let cfg = ArrayConfig::reference();
    let link = Link::new(&cfg, &UserState::new(20.0, 0.3)?, 20.0)?;
    let codebook = Codebook::polar(&cfg, 8)?;
    let results = run_trial(
        &link,
        &Scheme::ALL,
        &SupportConfig::default(),
        &TrainingConfig::default(),
        Some(&codebook),
        42,
        0,
    )?;
    println!("user at r0 = 20 m, omega = 0.3, reference SNR 20 dB");
    for r in &results {
        println!(
            "{:>12}: omega {:>8.4} r {:>8.2} T {:>5} rate {:.3} eff {:.3}",
            r.scheme.label(),
            r.omega_hat,
            r.r_hat.to_f64(),
            r.t_train,
            r.rate,
            r.eff_rate
        );
    }

    let exp = ExperimentConfig::from_toml_str(
        "[training]\nsnr_db = [0.0, 10.0, 20.0, 30.0]\ntrials = 50\nschemes = [\"asw_je\", \"wdsw_je\", \"perfect_csi\"]\n",
    )?;
    println!(
        "\n{:>12} {:>5} {:>11} {:>9} {:>9}",
        "scheme", "snr", "nmse_angle", "rate", "eff_rate"
    );
    for r in beamtrain_rows(&exp)? {
        println!(
            "{:>12} {:>5} {:>11.3e} {:>9.3} {:>9.3}",
            r.scheme.label(),
            r.snr_db,
            r.nmse_angle,
            r.mean_rate,
            r.mean_eff_rate
        );
    }
    Ok(())
}

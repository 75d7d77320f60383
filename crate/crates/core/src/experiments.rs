//! Experiment drivers behind the command-line tool.
//!
//! Each command turns an [`ExperimentConfig`] into a CSV file. Files start with
//! `#` comment lines echoing the effective configuration and seed, followed by
//! one header row. Numbers use the shortest representation that parses back to
//! the same `f64`. Files are written to a temporary sibling and renamed into
//! place, so a failed run never leaves a partial file behind.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    effective_rayleigh_distance, spatial_channel, ApertureConvention, ArrayConfig, UserState, SPEED_OF_LIGHT,
};
use crate::metrics::{jaccard, mean_and_std_err, nmse_angle, nmse_distance, RateConvention, TrialRecord};
use crate::posp::{approx_spectrum, diffusion_interval, simplified_interval, WaveInterval};
use crate::spectral::{angular_transform, wavenumber_quadrature, wavenumber_samples, WaveGrid};
use crate::support::{extract_support, SupportConfig};
use crate::training::{draw_user, run_trial, Codebook, Link, Scheme, TrainingConfig};

pub const SPECTRUM_COLUMNS: &[&str] = &["k_x", "abs_H_quadrature", "abs_H_posp", "abs_H_angular"];
pub const JACCARD_MAP_COLUMNS: &[&str] = &[
    "r0_m",
    "omega",
    "jaccard_exact",
    "jaccard_simplified",
    "inside_effective_rayleigh",
];
pub const BEAMTRAIN_COLUMNS: &[&str] = &[
    "scheme",
    "snr_db",
    "nmse_angle",
    "nmse_distance",
    "mean_rate",
    "mean_eff_rate",
    "rate_std_err",
    "far_field_count",
    "fallback_count",
    "t_tra",
    "trials",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraySection {
    pub n_antennas: usize,
    pub carrier_freq_hz: f64,
    pub propagation_speed_m_s: f64,
    /// Element spacing; half a wavelength when absent.
    pub spacing_m: Option<f64>,
    pub aperture_convention: ApertureConvention,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self {
            n_antennas: 256,
            carrier_freq_hz: 30e9,
            propagation_speed_m_s: SPEED_OF_LIGHT,
            spacing_m: None,
            aperture_convention: ApertureConvention::NMinus1,
        }
    }
}

/// The single user of the `spectrum` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UserSection {
    pub distance_m: f64,
    pub omega: f64,
}

impl Default for UserSection {
    fn default() -> Self {
        Self {
            distance_m: 10.0,
            omega: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JaccardMapSection {
    pub r_min_m: f64,
    pub r_max_m: f64,
    /// Distances are log-spaced, endpoints included.
    pub r_points: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    /// Extra wave-number span on each side of the diffusion interval, in units
    /// of the far-field lobe width `2 pi / D`.
    pub margin_lobes: f64,
}

impl Default for JaccardMapSection {
    fn default() -> Self {
        Self {
            r_min_m: 2.0,
            r_max_m: 400.0,
            r_points: 30,
            omega_min: -0.95,
            omega_max: 0.95,
            omega_points: 39,
            margin_lobes: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub distance_m: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub schemes: Vec<Scheme>,
    pub k_candidates: usize,
    pub rings: usize,
    pub t_tot: usize,
    pub rate_convention: RateConvention,
    pub far_guard: f64,
    pub master_seed: u64,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let t = TrainingConfig::default();
        Self {
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            trials: 1000,
            distance_m: 20.0,
            omega_min: -1.0,
            omega_max: 1.0,
            schemes: Scheme::ALL.to_vec(),
            k_candidates: t.k_candidates,
            rings: t.rings,
            t_tot: t.t_tot,
            rate_convention: t.rate_convention,
            far_guard: t.far_guard,
            master_seed: 42,
        }
    }
}

impl TrainingSection {
    pub fn training_config(&self) -> TrainingConfig {
        TrainingConfig {
            k_candidates: self.k_candidates,
            rings: self.rings,
            t_tot: self.t_tot,
            rate_convention: self.rate_convention,
            far_guard: self.far_guard,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub spectrum: PathBuf,
    pub jaccard_map: PathBuf,
    pub beamtrain: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            spectrum: "spectrum.csv".into(),
            jaccard_map: "jaccard_map.csv".into(),
            beamtrain: "beamtrain.csv".into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub array: ArraySection,
    pub user: UserSection,
    pub support: SupportConfig,
    pub jaccard_map: JaccardMapSection,
    pub training: TrainingSection,
    /// Not echoed into CSV headers: where a file is written does not change it.
    #[serde(skip_serializing)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn array_config(&self) -> Result<ArrayConfig> {
        let a = &self.array;
        let mut cfg = ArrayConfig::with_propagation_speed(a.n_antennas, a.carrier_freq_hz, a.propagation_speed_m_s)?;
        if let Some(d) = a.spacing_m {
            cfg = cfg.with_spacing(d)?;
        }
        Ok(cfg.with_aperture_convention(a.aperture_convention))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.array_config()?;
        self.support.validate()?;
        self.training.training_config().validate()?;
        UserState::new(self.user.distance_m, self.user.omega)?;
        let m = &self.jaccard_map;
        if !(m.r_min_m > 0.0 && m.r_min_m <= m.r_max_m) || m.r_points == 0 {
            return bad(format!(
                "jaccard_map distance grid [{}, {}] x {} is invalid",
                m.r_min_m, m.r_max_m, m.r_points
            ));
        }
        if !(-1.0 <= m.omega_min && m.omega_min <= m.omega_max && m.omega_max <= 1.0) || m.omega_points == 0 {
            return bad(format!(
                "jaccard_map direction grid [{}, {}] x {} is invalid",
                m.omega_min, m.omega_max, m.omega_points
            ));
        }
        if !(m.margin_lobes >= 0.0) {
            return bad("jaccard_map.margin_lobes must be non-negative".into());
        }
        let t = &self.training;
        if t.trials == 0 {
            return bad("training.trials must be at least 1".into());
        }
        if t.snr_db.is_empty() || t.snr_db.iter().any(|s| s.is_nan()) {
            return bad("training.snr_db must be a non-empty list of numbers".into());
        }
        if t.schemes.is_empty() {
            return bad("training.schemes must not be empty".into());
        }
        if !(-1.0 <= t.omega_min && t.omega_min <= t.omega_max && t.omega_max <= 1.0) {
            return bad(format!(
                "training direction range [{}, {}] is invalid",
                t.omega_min, t.omega_max
            ));
        }
        UserState::new(t.distance_m, t.omega_min)?;
        Ok(())
    }

    fn echo(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Formats an `f64` with the fewest digits that parse back to the same value.
pub fn format_f64(x: f64) -> String {
    if x != 0.0 && x.is_finite() && !(1e-5..1e16).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

/// Writes `rows` under a `#` comment header, via a temporary file and a rename.
pub fn write_csv_atomic(path: &Path, comments: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::new();
    for line in comments.lines() {
        let _ = writeln!(text, "# {line}");
    }
    let _ = writeln!(text, "{}", columns.join(","));
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::LengthMismatch {
                expected: columns.len(),
                actual: row.len(),
            });
        }
        let _ = writeln!(text, "{}", row.join(","));
    }

    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(text.as_bytes())?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io(e));
    }
    Ok(())
}

fn header(command: &str, cfg: &ExperimentConfig) -> Result<String> {
    Ok(format!(
        "xlwave {command}\nseed = {}\n{}",
        cfg.training.master_seed,
        cfg.echo()?
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub k_x: f64,
    pub quadrature: f64,
    pub posp: f64,
    /// Present only at the `N` DFT sample points.
    pub angular: Option<f64>,
}

/// Normalized magnitudes of the numerical, stationary-phase and angular spectra.
pub fn spectrum_rows(exp: &ExperimentConfig) -> Result<Vec<SpectrumRow>> {
    let cfg = exp.array_config()?;
    let user = UserState::new(exp.user.distance_m, exp.user.omega)?;
    let grid = WaveGrid::band_fraction(&cfg, exp.support.oversample, exp.support.band_fraction);
    let quad = wavenumber_quadrature(&cfg, &user, &grid)?;
    let posp = approx_spectrum(&cfg, &user, &grid)?;
    let samples = wavenumber_samples(&cfg, &angular_transform(&cfg, &spatial_channel(&cfg, &user)?)?)?;
    let peak = quad.peak_magnitude();
    if peak == 0.0 {
        return Err(Error::ZeroSpectrum);
    }

    let mut angular = vec![None; grid.len()];
    if !grid.is_empty() {
        let step = grid.sample_step() / exp.support.oversample as f64;
        let first = grid.points()[0];
        for (k, s) in WaveGrid::angular(&cfg).points().iter().zip(&samples) {
            let i = ((k - first) / step).round();
            if i >= 0.0 && (i as usize) < grid.len() && (grid.points()[i as usize] - k).abs() < 1e-9 * step.max(1.0) {
                angular[i as usize] = Some(s.norm() / peak);
            }
        }
    }
    Ok(grid
        .points()
        .iter()
        .zip(quad.values().iter().zip(posp.values()))
        .zip(angular)
        .map(|((&k_x, (q, p)), a)| SpectrumRow {
            k_x,
            quadrature: q.norm() / peak,
            posp: p.norm() / peak,
            angular: a,
        })
        .collect())
}

pub fn cmd_spectrum(exp: &ExperimentConfig, out: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = spectrum_rows(exp)?
        .into_iter()
        .map(|r| {
            vec![
                format_f64(r.k_x),
                format_f64(r.quadrature),
                format_f64(r.posp),
                format_opt(r.angular),
            ]
        })
        .collect();
    write_csv_atomic(out, &header("spectrum", exp)?, SPECTRUM_COLUMNS, &rows)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JaccardCell {
    pub r0: f64,
    pub omega: f64,
    pub exact: WaveInterval,
    pub simplified: WaveInterval,
    pub measured: WaveInterval,
    pub jaccard_exact: f64,
    pub jaccard_simplified: f64,
    pub inside_effective_rayleigh: bool,
}

/// Compares the modelled intervals with the support of the numerical spectrum.
///
/// The spectrum is evaluated on a window around the diffusion interval, widened
/// until the measured support no longer touches the window edge.
pub fn jaccard_cell(
    cfg: &ArrayConfig,
    user: &UserState,
    scfg: &SupportConfig,
    margin_lobes: f64,
) -> Result<JaccardCell> {
    let exact = diffusion_interval(cfg, user);
    let simplified = simplified_interval(cfg, user);
    let k0 = cfg.wavenumber();
    let lobe = 2.0 * std::f64::consts::PI / cfg.aperture();
    let mut margin = 0.5 * exact.width() + margin_lobes * lobe;
    let measured = loop {
        let (lo, hi) = (exact.lower() - margin, exact.upper() + margin);
        let grid = WaveGrid::window(cfg, scfg.oversample, lo, hi);
        let support = extract_support(&wavenumber_quadrature(cfg, user, &grid)?, scfg)?;
        let whole_band = lo <= -k0 && hi >= k0;
        if !support.truncated || whole_band {
            break support.interval;
        }
        margin *= 2.0;
    };
    Ok(JaccardCell {
        r0: user.distance(),
        omega: user.direction_cosine(),
        exact,
        simplified,
        measured,
        jaccard_exact: jaccard(&exact, &measured),
        jaccard_simplified: jaccard(&simplified, &measured),
        inside_effective_rayleigh: user.distance() <= effective_rayleigh_distance(cfg, user.direction_cosine()),
    })
}

/// `n` log-spaced values from `lo` to `hi`, endpoints exact.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i + 1 == n => hi,
            i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// `n` evenly spaced values from `lo` to `hi`, rounded to 12 decimals so that
/// grids like `-0.9, -0.8, ...` hold the decimal values and stay symmetric.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            (x * 1e12).round() / 1e12 + 0.0
        })
        .collect()
}

/// Map cells sorted by distance, then direction.
pub fn jaccard_map_cells(exp: &ExperimentConfig) -> Result<Vec<JaccardCell>> {
    let cfg = exp.array_config()?;
    let m = &exp.jaccard_map;
    let omegas = lin_space(m.omega_min, m.omega_max, m.omega_points);
    let users: Vec<(f64, f64)> = log_space(m.r_min_m, m.r_max_m, m.r_points)
        .into_iter()
        .flat_map(|r| omegas.iter().map(move |&o| (r, o)))
        .collect();
    users
        .par_iter()
        .map(|&(r, o)| jaccard_cell(&cfg, &UserState::new(r, o)?, &exp.support, m.margin_lobes))
        .collect()
}

pub fn cmd_jaccard_map(exp: &ExperimentConfig, out: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = jaccard_map_cells(exp)?
        .into_iter()
        .map(|c| {
            vec![
                format_f64(c.r0),
                format_f64(c.omega),
                format_f64(c.jaccard_exact),
                format_f64(c.jaccard_simplified),
                c.inside_effective_rayleigh.to_string(),
            ]
        })
        .collect();
    write_csv_atomic(out, &header("jaccard-map", exp)?, JACCARD_MAP_COLUMNS, &rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeamtrainRow {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub nmse_angle: f64,
    /// `None` when every estimate was a far-field verdict.
    pub nmse_distance: Option<f64>,
    pub mean_rate: f64,
    pub mean_eff_rate: f64,
    pub rate_std_err: f64,
    pub far_field_count: usize,
    pub fallback_count: usize,
    pub t_tra: usize,
    pub trials: usize,
}

/// Monte-Carlo comparison of the training schemes, one row per scheme and SNR,
/// sorted by scheme label and then SNR.
pub fn beamtrain_rows(exp: &ExperimentConfig) -> Result<Vec<BeamtrainRow>> {
    let cfg = exp.array_config()?;
    let t = &exp.training;
    let tcfg = t.training_config();
    let mut schemes = t.schemes.clone();
    schemes.sort_by_key(|s| s.label());
    schemes.dedup();
    let codebook = if schemes.contains(&Scheme::Exhaustive) {
        Some(Codebook::polar(&cfg, tcfg.rings)?)
    } else {
        None
    };
    let mut snrs = t.snr_db.clone();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();

    let users = (0..t.trials as u64)
        .map(|trial| draw_user(t.master_seed, trial, t.distance_m, (t.omega_min, t.omega_max)))
        .collect::<Result<Vec<_>>>()?;

    let mut per_snr = Vec::with_capacity(snrs.len());
    for &snr in &snrs {
        let trials = users
            .par_iter()
            .enumerate()
            .map(|(trial, user)| {
                let link = Link::new(&cfg, user, snr)?;
                let results = run_trial(
                    &link,
                    &schemes,
                    &exp.support,
                    &tcfg,
                    codebook.as_ref(),
                    t.master_seed,
                    trial as u64,
                )?;
                Ok((*user, results))
            })
            .collect::<Result<Vec<_>>>()?;
        per_snr.push((snr, trials));
    }

    let mut rows = Vec::new();
    for (si, &scheme) in schemes.iter().enumerate() {
        for (snr, trials) in &per_snr {
            let records: Vec<TrialRecord> = trials
                .iter()
                .map(|(user, results)| {
                    let r = &results[si];
                    TrialRecord {
                        scheme: scheme.label().to_string(),
                        snr_db: *snr,
                        true_omega: user.direction_cosine(),
                        est_omega: r.omega_hat,
                        true_r: user.distance(),
                        est_r: r.r_hat,
                        rate: r.rate,
                        eff_rate: r.eff_rate,
                    }
                })
                .collect();
            let rates: Vec<f64> = records.iter().map(|r| r.rate).collect();
            let eff: Vec<f64> = records.iter().map(|r| r.eff_rate).collect();
            let (mean_rate, rate_std_err) = mean_and_std_err(&rates)?;
            let distance = nmse_distance(&records)?;
            rows.push(BeamtrainRow {
                scheme,
                snr_db: *snr,
                nmse_angle: nmse_angle(&records)?,
                nmse_distance: distance.nmse,
                mean_rate,
                mean_eff_rate: mean_and_std_err(&eff)?.0,
                rate_std_err,
                far_field_count: distance.far_field_count,
                fallback_count: trials.iter().filter(|(_, r)| r[si].fallback).count(),
                t_tra: trials[0].1[si].t_train,
                trials: trials.len(),
            });
        }
    }
    Ok(rows)
}

pub fn cmd_beamtrain(exp: &ExperimentConfig, out: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = beamtrain_rows(exp)?
        .into_iter()
        .map(|r| {
            vec![
                r.scheme.label().to_string(),
                format_f64(r.snr_db),
                format_f64(r.nmse_angle),
                format_opt(r.nmse_distance),
                format_f64(r.mean_rate),
                format_f64(r.mean_eff_rate),
                format_f64(r.rate_std_err),
                r.far_field_count.to_string(),
                r.fallback_count.to_string(),
                r.t_tra.to_string(),
                r.trials.to_string(),
            ]
        })
        .collect();
    write_csv_atomic(out, &header("beamtrain", exp)?, BEAMTRAIN_COLUMNS, &rows)
}

//! Beam training over a noisy single-user link.
//!
//! Four schemes are compared: exhaustive search over a polar codebook, angular
//! support width joint estimation (ASW-JE), wave-number support width joint
//! estimation (WDSW-JE) and perfect channel knowledge.
//!
//! The reference SNR is the post-beamforming SNR of a perfectly matched beam,
//! `N |h0|^2 / sigma^2`, and every pilot measurement carries independent
//! circular Gaussian noise of variance `sigma^2`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    effective_rayleigh_distance, far_steering_vector, near_steering_vector, spatial_channel, ArrayConfig,
    ComplexVector, UserState,
};
use crate::metrics::{rates, RateConvention};
use crate::posp::{estimate_user, RangeEstimate, WaveInterval, FARFIELD_WIDTH_FACTOR};
use crate::spectral::{angular_transform, WaveGrid};
use crate::support::{support_from_angular, support_from_magnitudes, SupportConfig};

/// Seed-stream tags within one trial.
pub const TAG_CHANNEL: u64 = 0;
pub const TAG_SWEEP: u64 = 1;
pub const TAG_ASW: u64 = 2;
pub const TAG_EXHAUSTIVE: u64 = 3;

/// Seed for one random stream of one trial.
///
/// The master seed keys a ChaCha8 generator; the trial's stream
/// `16 * trial + tag` is selected and its first word is the seed. Trials and
/// tags therefore never share a stream, whatever order they are run in.
pub fn derive_seed(master: u64, trial: u64, tag: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial.wrapping_mul(16).wrapping_add(tag));
    rng.next_u64()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Exhaustive,
    AswJe,
    WdswJe,
    PerfectCsi,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Exhaustive, Scheme::AswJe, Scheme::WdswJe, Scheme::PerfectCsi];

    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Exhaustive => "exhaustive",
            Scheme::AswJe => "asw_je",
            Scheme::WdswJe => "wdsw_je",
            Scheme::PerfectCsi => "perfect_csi",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    /// Candidate angles tested by ASW-JE (odd).
    pub k_candidates: usize,
    /// Distance rings per angle in the polar codebook.
    pub rings: usize,
    /// Frame length in symbols.
    pub t_tot: usize,
    pub rate_convention: RateConvention,
    /// WDSW-JE declares far field when the support is narrower than this multiple
    /// of the plane-wave main-lobe width at the same threshold.
    pub far_guard: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            k_candidates: 3,
            rings: 8,
            t_tot: 2000,
            rate_convention: RateConvention::Squared,
            far_guard: 1.02,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_candidates == 0 || self.k_candidates.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "k_candidates must be odd, got {}",
                self.k_candidates
            )));
        }
        if self.rings == 0 {
            return Err(Error::invalid("rings must be at least 1"));
        }
        if self.t_tot == 0 {
            return Err(Error::invalid("t_tot must be positive"));
        }
        if !(self.far_guard >= 0.0) {
            return Err(Error::invalid("far_guard must be non-negative"));
        }
        Ok(())
    }
}

/// Physical link: array, user, channel and per-measurement noise variance.
#[derive(Clone, Debug)]
pub struct Link {
    cfg: ArrayConfig,
    user: UserState,
    channel: ComplexVector,
    noise_var: f64,
    snr_db: f64,
}

impl Link {
    /// `snr_db = +inf` gives a noiseless link.
    pub fn new(cfg: &ArrayConfig, user: &UserState, snr_db: f64) -> Result<Self> {
        if snr_db.is_nan() {
            return Err(Error::invalid("reference SNR is NaN"));
        }
        let channel = spatial_channel(cfg, user)?;
        let noise_var = cfg.n_antennas() as f64 * user.path_gain().norm_sqr() / 10f64.powf(snr_db / 10.0);
        Ok(Self {
            cfg: cfg.clone(),
            user: *user,
            channel,
            noise_var,
            snr_db,
        })
    }

    pub fn config(&self) -> &ArrayConfig {
        &self.cfg
    }

    pub fn user(&self) -> &UserState {
        &self.user
    }

    pub fn channel(&self) -> &ComplexVector {
        &self.channel
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    fn noise<R: Rng>(&self, rng: &mut R) -> Complex64 {
        if self.noise_var == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let s = (self.noise_var / 2.0).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    }

    /// One pilot received through beamformer `v`: `v^H h + w`.
    pub fn measure<R: Rng>(&self, v: &ComplexVector, rng: &mut R) -> Complex64 {
        v.inner(&self.channel) + self.noise(rng)
    }

    /// Rate of beamformer `v` and its value after `t_tra` training symbols.
    ///
    /// Overhead beyond the frame length leaves no data symbols, so the
    /// effective rate is floored at zero. A noiseless link has unbounded rate.
    pub fn rates(&self, v: &ComplexVector, t_tra: usize, tcfg: &TrainingConfig) -> Result<(f64, f64)> {
        if self.noise_var == 0.0 {
            let rate = if v.inner(&self.channel).norm() > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            let eff = if t_tra >= tcfg.t_tot { 0.0 } else { rate };
            return Ok((rate, eff));
        }
        let r = rates(
            &self.channel,
            v,
            self.noise_var,
            t_tra.min(tcfg.t_tot),
            tcfg.t_tot,
            tcfg.rate_convention,
        )?;
        Ok((r.rate, r.eff_rate))
    }
}

/// Received far-field DFT sweep `a(Omega_n)^H h + w_n`.
#[derive(Clone, Debug)]
pub struct SweepMeasurement {
    pub values: ComplexVector,
    pub noise_var: f64,
    pub snr_ref_db: f64,
}

pub fn simulate_sweep(link: &Link, seed: u64) -> Result<SweepMeasurement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clean = angular_transform(&link.cfg, &link.channel)?;
    let noisy: Vec<Complex64> = clean.values().iter().map(|v| v + link.noise(&mut rng)).collect();
    Ok(SweepMeasurement {
        values: ComplexVector::new(noisy, clean.grid().to_vec(), clean.domain())?,
        noise_var: link.noise_var,
        snr_ref_db: link.snr_db,
    })
}

#[derive(Clone, Debug)]
pub struct TrainingResult {
    pub scheme: Scheme,
    pub omega_hat: f64,
    pub r_hat: RangeEstimate,
    pub beamformer: ComplexVector,
    pub t_train: usize,
    pub rate: f64,
    pub eff_rate: f64,
    /// Support extraction failed and the strongest DFT beam was used instead.
    pub fallback: bool,
}

/// Unit-norm codeword: near-field `b(Omega, r)` or plane-wave `a(Omega)`.
pub fn beamformer(cfg: &ArrayConfig, omega: f64, range: RangeEstimate) -> Result<ComplexVector> {
    match range {
        RangeEstimate::Finite(r) => Ok(near_steering_vector(cfg, &UserState::new(r, omega)?)?.normalized()),
        RangeEstimate::FarField => Ok(far_steering_vector(cfg, omega)),
    }
}

fn finish(
    link: &Link,
    tcfg: &TrainingConfig,
    scheme: Scheme,
    omega_hat: f64,
    r_hat: RangeEstimate,
    t_train: usize,
    fallback: bool,
) -> Result<TrainingResult> {
    let beamformer = beamformer(&link.cfg, omega_hat, r_hat)?;
    let (rate, eff_rate) = link.rates(&beamformer, t_train, tcfg)?;
    Ok(TrainingResult {
        scheme,
        omega_hat,
        r_hat,
        beamformer,
        t_train,
        rate,
        eff_rate,
        fallback,
    })
}

fn strongest_beam(cfg: &ArrayConfig, sweep: &SweepMeasurement) -> f64 {
    let best =
        sweep.values.values().iter().enumerate().fold(
            (0, -1.0),
            |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc },
        );
    cfg.dft_directions()[best.0]
}

/// Width of the plane-wave main lobe above `beta` times its peak, rad/m.
pub fn farfield_support_width(cfg: &ArrayConfig, beta: f64) -> f64 {
    // sin(u)/u falls monotonically from 1 to 0 on (0, pi).
    let (mut lo, mut hi) = (0.0f64, PI);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid.sin() / mid > beta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    4.0 * 0.5 * (lo + hi) / cfg.aperture()
}

/// WDSW-JE: support of the sinc-reconstructed wave-number spectrum, inverted to
/// angle and distance. Costs one sweep, `T = N`.
pub fn wdsw_je(
    link: &Link,
    sweep: &SweepMeasurement,
    scfg: &SupportConfig,
    tcfg: &TrainingConfig,
) -> Result<TrainingResult> {
    let cfg = &link.cfg;
    let t = cfg.n_antennas();
    match support_from_angular(cfg, &sweep.values, scfg) {
        Ok(support) => {
            let mut est = estimate_user(&support.interval, cfg);
            // A plane wave already spreads over the main lobe; such a support
            // carries no distance information.
            if support.interval.width() <= tcfg.far_guard * farfield_support_width(cfg, scfg.beta) {
                est.range = RangeEstimate::FarField;
            }
            finish(link, tcfg, Scheme::WdswJe, est.omega, est.range, t, false)
        }
        Err(Error::ZeroSpectrum) => {
            let omega = strongest_beam(cfg, sweep);
            finish(link, tcfg, Scheme::WdswJe, omega, RangeEstimate::FarField, t, true)
        }
        Err(e) => Err(e),
    }
}

/// ASW-JE: support width on the DFT grid itself, then `K` neighbouring candidate
/// angles tested with near-field codewords. Costs `T = N + K`.
pub fn asw_je(
    link: &Link,
    sweep: &SweepMeasurement,
    scfg: &SupportConfig,
    tcfg: &TrainingConfig,
    seed: u64,
) -> Result<TrainingResult> {
    let cfg = &link.cfg;
    let n = cfg.n_antennas();
    let k = tcfg.k_candidates;
    let t = n + k;
    let grid = WaveGrid::angular(cfg);
    let mags: Vec<f64> = sweep.values.values().iter().map(|v| v.norm()).collect();
    let support = match support_from_magnitudes(grid.points(), &mags, scfg.beta) {
        Ok(s) => s,
        Err(Error::ZeroSpectrum) => {
            let omega = strongest_beam(cfg, sweep);
            return finish(link, tcfg, Scheme::AswJe, omega, RangeEstimate::FarField, t, true);
        }
        Err(e) => return Err(e),
    };
    // Grid-quantized edges: the outermost bins above threshold, widened by half a bin.
    let points = grid.points();
    let step = cfg.angular_step();
    let first = points.iter().position(|&p| p >= support.interval.lower()).unwrap_or(0);
    let last = points
        .iter()
        .rposition(|&p| p <= support.interval.upper())
        .unwrap_or(n - 1);
    let quantized = WaveInterval::new(points[first] - step / 2.0, points[last] + step / 2.0)?;
    let mut est = estimate_user(&quantized, cfg);
    if first == last || quantized.width() < FARFIELD_WIDTH_FACTOR * 2.0 * PI / cfg.aperture() {
        est.range = RangeEstimate::FarField;
    }

    let directions = cfg.dft_directions();
    let centre = (((est.omega * n as f64 + n as f64 + 1.0) / 2.0).round() as i64 - 1).clamp(0, n as i64 - 1);
    let half = (k as i64 - 1) / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (f64::NEG_INFINITY, directions[centre as usize]);
    for offset in -half..=half {
        let omega = directions[(centre + offset).rem_euclid(n as i64) as usize];
        let power = link.measure(&beamformer(cfg, omega, est.range)?, &mut rng).norm();
        if power > best.0 {
            best = (power, omega);
        }
    }
    finish(link, tcfg, Scheme::AswJe, best.1, est.range, t, false)
}

#[derive(Clone, Debug)]
pub struct CodeEntry {
    pub beamformer: ComplexVector,
    pub omega: f64,
    pub range: RangeEstimate,
}

#[derive(Clone, Debug)]
pub struct Codebook {
    entries: Vec<CodeEntry>,
}

impl Codebook {
    pub fn new(entries: Vec<CodeEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("codebook is empty"));
        }
        if let Some(e) = entries.iter().find(|e| (e.beamformer.norm() - 1.0).abs() > 1e-9) {
            return Err(Error::invalid(format!(
                "codeword norm {} is not 1",
                e.beamformer.norm()
            )));
        }
        Ok(Self { entries })
    }

    /// Polar codebook: the `N` DFT angles, each with `rings` distances uniform in
    /// `1/r` from a quarter of the effective Rayleigh distance out to it, plus one
    /// plane-wave codeword.
    pub fn polar(cfg: &ArrayConfig, rings: usize) -> Result<Self> {
        if rings == 0 {
            return Err(Error::invalid("rings must be at least 1"));
        }
        let mut entries = Vec::with_capacity(cfg.n_antennas() * (rings + 1));
        for omega in cfg.dft_directions() {
            let r_max = effective_rayleigh_distance(cfg, omega);
            let (inv_far, inv_near) = (1.0 / r_max, 4.0 / r_max);
            for s in 0..rings {
                let t = if rings == 1 { 0.0 } else { s as f64 / (rings - 1) as f64 };
                let range = RangeEstimate::Finite(1.0 / (inv_far + t * (inv_near - inv_far)));
                entries.push(CodeEntry {
                    beamformer: beamformer(cfg, omega, range)?,
                    omega,
                    range,
                });
            }
            entries.push(CodeEntry {
                beamformer: far_steering_vector(cfg, omega),
                omega,
                range: RangeEstimate::FarField,
            });
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[CodeEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Measures every codeword once and keeps the strongest. Costs `T = |codebook|`.
pub fn exhaustive_search(link: &Link, codebook: &Codebook, tcfg: &TrainingConfig, seed: u64) -> Result<TrainingResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, e) in codebook.entries().iter().enumerate() {
        let power = link.measure(&e.beamformer, &mut rng).norm();
        if power > best.0 {
            best = (power, i);
        }
    }
    let e = &codebook.entries()[best.1];
    let (rate, eff_rate) = link.rates(&e.beamformer, codebook.len(), tcfg)?;
    Ok(TrainingResult {
        scheme: Scheme::Exhaustive,
        omega_hat: e.omega,
        r_hat: e.range,
        beamformer: e.beamformer.clone(),
        t_train: codebook.len(),
        rate,
        eff_rate,
        fallback: false,
    })
}

/// Matched near-field beam from the true position; no training.
pub fn perfect_csi(link: &Link, tcfg: &TrainingConfig) -> Result<TrainingResult> {
    let user = link.user;
    finish(
        link,
        tcfg,
        Scheme::PerfectCsi,
        user.direction_cosine(),
        RangeEstimate::Finite(user.distance()),
        0,
        false,
    )
}

/// Runs the requested schemes on one channel realization.
///
/// WDSW-JE and ASW-JE share one sweep; ASW-JE's candidate pilots and the
/// exhaustive search draw from their own noise streams.
pub fn run_trial(
    link: &Link,
    schemes: &[Scheme],
    scfg: &SupportConfig,
    tcfg: &TrainingConfig,
    codebook: Option<&Codebook>,
    master_seed: u64,
    trial: u64,
) -> Result<Vec<TrainingResult>> {
    let needs_sweep = schemes.iter().any(|s| matches!(s, Scheme::WdswJe | Scheme::AswJe));
    let sweep = if needs_sweep {
        Some(simulate_sweep(link, derive_seed(master_seed, trial, TAG_SWEEP))?)
    } else {
        None
    };
    schemes
        .iter()
        .map(|scheme| match scheme {
            Scheme::WdswJe => wdsw_je(link, sweep.as_ref().unwrap(), scfg, tcfg),
            Scheme::AswJe => asw_je(
                link,
                sweep.as_ref().unwrap(),
                scfg,
                tcfg,
                derive_seed(master_seed, trial, TAG_ASW),
            ),
            Scheme::Exhaustive => {
                let codebook = codebook.ok_or_else(|| Error::invalid("exhaustive search needs a codebook"))?;
                exhaustive_search(link, codebook, tcfg, derive_seed(master_seed, trial, TAG_EXHAUSTIVE))
            }
            Scheme::PerfectCsi => perfect_csi(link, tcfg),
        })
        .collect()
}

/// User of one trial: fixed distance, direction cosine uniform on `[lo, hi]`.
pub fn draw_user(master_seed: u64, trial: u64, distance: f64, omega_range: (f64, f64)) -> Result<UserState> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, trial, TAG_CHANNEL));
    let (lo, hi) = omega_range;
    if !(lo <= hi) {
        return Err(Error::invalid(format!("empty direction range [{lo}, {hi}]")));
    }
    let omega = if lo == hi { lo } else { rng.random_range(lo..=hi) };
    UserState::new(distance, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rayleigh_distance;
    use approx::assert_relative_eq;

    fn cfg() -> ArrayConfig {
        ArrayConfig::reference()
    }

    fn link(r0: f64, omega: f64, snr_db: f64) -> Link {
        Link::new(&cfg(), &UserState::new(r0, omega).unwrap(), snr_db).unwrap()
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let mut seen = std::collections::HashSet::new();
        for trial in 0..50 {
            for tag in 0..4 {
                assert!(seen.insert(derive_seed(42, trial, tag)));
            }
        }
        assert_eq!(derive_seed(42, 7, 1), derive_seed(42, 7, 1));
        assert_ne!(derive_seed(42, 7, 1), derive_seed(43, 7, 1));
    }

    #[test]
    fn noiseless_sweep_is_the_angular_transform() {
        let l = link(20.0, 0.3, f64::INFINITY);
        assert_eq!(l.noise_var(), 0.0);
        let s = simulate_sweep(&l, 5).unwrap();
        let a = angular_transform(l.config(), l.channel()).unwrap();
        assert_eq!(s.values.values(), a.values());
    }

    #[test]
    fn sweep_is_deterministic() {
        let l = link(20.0, 0.3, 10.0);
        let a = simulate_sweep(&l, 9).unwrap();
        let b = simulate_sweep(&l, 9).unwrap();
        assert_eq!(a.values.values(), b.values.values());
        let c = simulate_sweep(&l, 10).unwrap();
        assert_ne!(a.values.values(), c.values.values());
    }

    #[test]
    fn noise_power_matches_reference_snr() {
        let l = link(20.0, 0.3, 20.0);
        assert_relative_eq!(l.noise_var(), 256.0 / 100.0, max_relative = 1e-12);
        let clean = angular_transform(l.config(), l.channel()).unwrap();
        let mut total = 0.0;
        let trials = 1000;
        for seed in 0..trials {
            let s = simulate_sweep(&l, seed).unwrap();
            total += s
                .values
                .values()
                .iter()
                .zip(clean.values())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>();
        }
        let empirical = total / (trials as f64 * 256.0);
        assert!((empirical / l.noise_var() - 1.0).abs() < 0.05, "{empirical}");
    }

    #[test]
    fn wdsw_noiseless_near_user() {
        let l = link(20.0, 0.3, f64::INFINITY);
        let s = simulate_sweep(&l, 0).unwrap();
        let r = wdsw_je(&l, &s, &SupportConfig::default(), &TrainingConfig::default()).unwrap();
        assert!((r.omega_hat - 0.3).abs() <= 0.01);
        let rh = r.r_hat.finite().unwrap();
        assert!((rh - 20.0).abs() / 20.0 <= 0.1, "{rh}");
        assert_eq!(r.t_train, 256);
        assert!(!r.fallback);
    }

    #[test]
    fn wdsw_far_user_gets_plane_wave() {
        let cfg = cfg();
        let omega = cfg.dft_directions()[150];
        let l = link(5.0 * rayleigh_distance(&cfg), omega, f64::INFINITY);
        let s = simulate_sweep(&l, 0).unwrap();
        let r = wdsw_je(&l, &s, &SupportConfig::default(), &TrainingConfig::default()).unwrap();
        assert!(r.r_hat.is_far_field());
        assert_relative_eq!(r.omega_hat, omega, epsilon = 1e-6);
        let a = far_steering_vector(&cfg, r.omega_hat);
        let diff: f64 = r
            .beamformer
            .values()
            .iter()
            .zip(a.values())
            .map(|(x, y)| (x - y).norm())
            .sum();
        assert!(diff < 1e-9);
    }

    #[test]
    fn zero_gain_falls_back() {
        let cfg = cfg();
        let user = UserState::with_gain(20.0, 0.3, Complex64::new(0.0, 0.0)).unwrap();
        let l = Link::new(&cfg, &user, f64::INFINITY).unwrap();
        let s = simulate_sweep(&l, 0).unwrap();
        let r = wdsw_je(&l, &s, &SupportConfig::default(), &TrainingConfig::default()).unwrap();
        assert!(r.fallback && r.r_hat.is_far_field());
        let r = asw_je(&l, &s, &SupportConfig::default(), &TrainingConfig::default(), 1).unwrap();
        assert!(r.fallback);
    }

    #[test]
    fn asw_noiseless_on_grid_user() {
        let cfg = cfg();
        let omega = cfg.dft_directions()[170];
        let l = link(20.0, omega, f64::INFINITY);
        let s = simulate_sweep(&l, 0).unwrap();
        let r = asw_je(&l, &s, &SupportConfig::default(), &TrainingConfig::default(), 3).unwrap();
        assert!((r.omega_hat - omega).abs() <= 1.0 / 256.0);
        assert!(cfg.dft_directions().contains(&r.omega_hat));
        assert_eq!(r.t_train, 259);
    }

    #[test]
    fn asw_candidates_wrap_around_the_grid() {
        let cfg = cfg();
        let l = link(5.0 * rayleigh_distance(&cfg), cfg.dft_directions()[0], f64::INFINITY);
        let s = simulate_sweep(&l, 0).unwrap();
        let r = asw_je(&l, &s, &SupportConfig::default(), &TrainingConfig::default(), 3).unwrap();
        assert_eq!(r.omega_hat, cfg.dft_directions()[0]);
        assert!(r.r_hat.is_far_field());
    }

    #[test]
    fn polar_codebook_shape() {
        let cfg = cfg();
        let cb = Codebook::polar(&cfg, 8).unwrap();
        assert_eq!(cb.len(), 256 * 9);
        for e in cb.entries() {
            assert_relative_eq!(e.beamformer.norm(), 1.0, epsilon = 1e-12);
        }
        let first: Vec<f64> = cb.entries()[..8]
            .iter()
            .map(|e| 1.0 / e.range.finite().unwrap())
            .collect();
        let steps: Vec<f64> = first.windows(2).map(|w| w[1] - w[0]).collect();
        for s in &steps {
            assert_relative_eq!(*s, steps[0], max_relative = 1e-9);
        }
        let r_eff = effective_rayleigh_distance(&cfg, cb.entries()[0].omega);
        assert_relative_eq!(cb.entries()[0].range.finite().unwrap(), r_eff, max_relative = 1e-12);
        assert_relative_eq!(
            cb.entries()[7].range.finite().unwrap(),
            r_eff / 4.0,
            max_relative = 1e-12
        );
        assert!(cb.entries()[8].range.is_far_field());
        assert!(Codebook::new(Vec::new()).is_err());
    }

    #[test]
    fn exhaustive_picks_matching_codeword() {
        let cfg = cfg();
        let cb = Codebook::polar(&cfg, 8).unwrap();
        let target = &cb.entries()[9 * 100 + 3];
        let l = link(target.range.finite().unwrap(), target.omega, f64::INFINITY);
        let r = exhaustive_search(&l, &cb, &TrainingConfig::default(), 0).unwrap();
        assert_eq!(r.omega_hat, target.omega);
        assert_eq!(r.r_hat, target.range);
        assert_eq!(r.t_train, 2304);
    }

    #[test]
    fn exhaustive_overhead_exceeding_frame_has_zero_effective_rate() {
        let cfg = cfg();
        let cb = Codebook::polar(&cfg, 8).unwrap();
        let l = link(20.0, 0.2, 20.0);
        let r = exhaustive_search(&l, &cb, &TrainingConfig::default(), 0).unwrap();
        assert!(r.rate > 0.0);
        assert_eq!(r.eff_rate, 0.0);
    }

    #[test]
    fn perfect_csi_is_matched() {
        let l = link(20.0, -0.4, 20.0);
        let tcfg = TrainingConfig::default();
        let r = perfect_csi(&l, &tcfg).unwrap();
        assert_eq!(r.t_train, 0);
        assert_relative_eq!(r.beamformer.norm(), 1.0, epsilon = 1e-12);
        assert_eq!(r.rate, r.eff_rate);
        // Cauchy-Schwarz: |h^H v| = |h| for the matched beam.
        let gain = l.channel().inner(&r.beamformer).norm();
        assert_relative_eq!(gain, l.channel().norm(), max_relative = 1e-12);
        let s = simulate_sweep(&l, 1).unwrap();
        let w = wdsw_je(&l, &s, &SupportConfig::default(), &tcfg).unwrap();
        assert!(r.rate >= w.rate);
    }

    #[test]
    fn trial_is_reproducible() {
        let cfg = cfg();
        let cb = Codebook::polar(&cfg, 2).unwrap();
        let user = draw_user(42, 3, 20.0, (-1.0, 1.0)).unwrap();
        let l = Link::new(&cfg, &user, 10.0).unwrap();
        let run = || {
            run_trial(
                &l,
                &Scheme::ALL,
                &SupportConfig::default(),
                &TrainingConfig::default(),
                Some(&cb),
                42,
                3,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.omega_hat, y.omega_hat);
            assert_eq!(x.r_hat, y.r_hat);
            assert_eq!(x.rate, y.rate);
            assert_eq!(x.beamformer.values(), y.beamformer.values());
        }
        assert_eq!(
            a.iter().map(|r| r.t_train).collect::<Vec<_>>(),
            vec![cb.len(), 259, 256, 0]
        );
    }

    #[test]
    fn config_validation() {
        assert!(TrainingConfig::default().validate().is_ok());
        let bad = TrainingConfig {
            k_candidates: 2,
            ..TrainingConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(draw_user(1, 0, 20.0, (0.5, -0.5)).is_err());
        assert_eq!(draw_user(1, 0, 20.0, (0.25, 0.25)).unwrap().direction_cosine(), 0.25);
    }

    #[test]
    fn farfield_width_at_half_amplitude() {
        let cfg = cfg();
        let w = farfield_support_width(&cfg, 0.5);
        assert_relative_eq!(w * cfg.aperture() / 4.0, 1.895_494_267, max_relative = 1e-8);
    }
}

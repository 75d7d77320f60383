//! Stationary-phase (POSP) approximation of the wave-number spectrum.
//!
//! Writing the spectrum integrand as `A(x) exp(j psi(x))` with
//!
//! ```text
//! A(x)   = r0 / r(x)
//! psi(x) = -k_x x + k (r0 - r(x))
//! ```
//!
//! there is a single stationary point `x_s` for every `|k_x| < k`. The spectrum
//! is approximated by the stationary-phase value when `x_s` lies on the aperture
//! and by zero otherwise, which makes its support the diffusion interval.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{distance_unchecked, ArrayConfig, UserState};
use crate::spectral::{ComplexSpectrum, Provenance, WaveGrid};

/// Smallest 3 dB main-lobe width of the far-field spectrum, in units of `2 pi / D`,
/// as used by the near/far-field verdict.
pub const FARFIELD_WIDTH_FACTOR: f64 = 0.866;

/// Amplitude and phase of an oscillatory integrand `A(x) exp(j psi(x))`.
pub trait PhasePair {
    fn amplitude(&self, x: f64) -> f64;
    fn phase(&self, x: f64) -> f64;
    fn phase_d1(&self, x: f64) -> f64;
    fn phase_d2(&self, x: f64) -> f64;

    /// `|psi''|` below this makes the stationary point degenerate.
    fn curvature_floor(&self) -> f64 {
        0.0
    }
}

/// The near-field channel integrand at a fixed wave number.
#[derive(Clone, Copy, Debug)]
pub struct ChannelPhase {
    r0: f64,
    omega: f64,
    k0: f64,
    k_x: f64,
    floor: f64,
}

impl ChannelPhase {
    pub fn new(cfg: &ArrayConfig, user: &UserState, k_x: f64) -> Self {
        let k0 = cfg.wavenumber();
        Self {
            r0: user.distance(),
            omega: user.direction_cosine(),
            k0,
            k_x,
            floor: 1e-12 * k0 / cfg.aperture(),
        }
    }

    fn r(&self, x: f64) -> f64 {
        distance_unchecked(self.r0, self.omega, x)
    }
}

impl PhasePair for ChannelPhase {
    fn amplitude(&self, x: f64) -> f64 {
        self.r0 / self.r(x)
    }

    fn phase(&self, x: f64) -> f64 {
        -self.k_x * x + self.k0 * (self.r0 - self.r(x))
    }

    fn phase_d1(&self, x: f64) -> f64 {
        -self.k_x - self.k0 * (x - self.r0 * self.omega) / self.r(x)
    }

    fn phase_d2(&self, x: f64) -> f64 {
        let r = self.r(x);
        -self.k0 * self.r0 * self.r0 * (1.0 - self.omega * self.omega) / (r * r * r)
    }

    fn curvature_floor(&self) -> f64 {
        self.floor
    }
}

/// The unique `x` at which the channel phase is stationary for wave number `k_x`.
pub fn stationary_point(cfg: &ArrayConfig, user: &UserState, k_x: f64) -> Result<f64> {
    let k0 = cfg.wavenumber();
    if !(k_x.abs() < k0) {
        return Err(Error::OutsideBand { k_x, band_limit: k0 });
    }
    let omega = user.direction_cosine();
    let s = (1.0 - omega * omega).sqrt();
    Ok(user.distance() * (omega - k_x * s / (k0 * k0 - k_x * k_x).sqrt()))
}

/// Stationary-phase value `sqrt(2 pi / |psi''|) A exp(j (psi + sgn(psi'') pi / 4))` at `x_s`.
pub fn posp_value<P: PhasePair + ?Sized>(pair: &P, x_s: f64) -> Result<Complex64> {
    let curvature = pair.phase_d2(x_s);
    let threshold = pair.curvature_floor();
    if !(curvature.abs() >= threshold) || curvature == 0.0 {
        return Err(Error::DegenerateStationaryPoint {
            curvature: curvature.abs(),
            threshold,
        });
    }
    let magnitude = (2.0 * PI / curvature.abs()).sqrt() * pair.amplitude(x_s);
    let phase = pair.phase(x_s) + curvature.signum() * FRAC_PI_4;
    Ok(Complex64::from_polar(magnitude, phase))
}

/// Closed wave-number interval `[lower, upper]` in rad/m.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveInterval {
    lower: f64,
    upper: f64,
}

impl WaveInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() || lower > upper {
            return Err(Error::invalid(format!("bad interval [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn centre(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, k_x: f64) -> bool {
        self.lower <= k_x && k_x <= self.upper
    }

    pub(crate) fn clamped(lower: f64, upper: f64, band_limit: f64) -> Self {
        Self {
            lower: lower.clamp(-band_limit, band_limit),
            upper: upper.clamp(-band_limit, band_limit),
        }
    }
}

/// Support of the stationary-phase spectrum: the wave numbers whose stationary
/// point lies on the aperture.
pub fn diffusion_interval(cfg: &ArrayConfig, user: &UserState) -> WaveInterval {
    let k0 = cfg.wavenumber();
    let omega = user.direction_cosine();
    let a = cfg.aperture() / (2.0 * user.distance());
    // Endpoints are the local wave numbers at x = +D/2 and x = -D/2; the
    // denominator vanishes only for an endfire user sitting on an array end.
    let edge = |sign: f64| {
        let den = (1.0 + a * a + sign * 2.0 * a * omega).sqrt();
        if den > 0.0 {
            k0 * (omega + sign * a) / den
        } else {
            k0 * omega
        }
    };
    WaveInterval::clamped(edge(-1.0), edge(1.0), k0)
}

/// First-order form `(2 pi / lambda)[Omega -/+ (D / 2 r0)(1 - Omega^2)]`.
pub fn simplified_interval(cfg: &ArrayConfig, user: &UserState) -> WaveInterval {
    let k0 = cfg.wavenumber();
    let omega = user.direction_cosine();
    let half = cfg.aperture() / (2.0 * user.distance()) * (1.0 - omega * omega);
    WaveInterval::clamped(k0 * (omega - half), k0 * (omega + half), k0)
}

/// Stationary-phase spectrum on `grid`, exactly zero outside the diffusion interval.
///
/// Grid points on the band edge `|k_x| = 2 pi / lambda` carry no stationary point
/// and are set to zero.
pub fn approx_spectrum(cfg: &ArrayConfig, user: &UserState, grid: &WaveGrid) -> Result<ComplexSpectrum> {
    let support = diffusion_interval(cfg, user);
    let k0 = cfg.wavenumber();
    let gain = user.path_gain();
    let values = grid
        .points()
        .par_iter()
        .map(|&k| {
            if !support.contains(k) || k.abs() >= k0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let x_s = stationary_point(cfg, user, k)?;
            Ok(gain * posp_value(&ChannelPhase::new(cfg, user, k), x_s)?)
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexSpectrum::new(values, grid.clone(), Provenance::Posp)
}

/// Distance estimate: a finite range or the far-field verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RangeEstimate {
    Finite(f64),
    FarField,
}

impl RangeEstimate {
    pub fn finite(&self) -> Option<f64> {
        match self {
            RangeEstimate::Finite(r) => Some(*r),
            RangeEstimate::FarField => None,
        }
    }

    pub fn is_far_field(&self) -> bool {
        matches!(self, RangeEstimate::FarField)
    }

    /// `+inf` for the far-field verdict.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UserEstimate {
    pub omega: f64,
    pub range: RangeEstimate,
}

/// Angle and distance from the endpoints of a diffusion interval.
///
/// Intervals narrower than the far-field main lobe carry no range information and
/// yield [`RangeEstimate::FarField`].
pub fn estimate_user(interval: &WaveInterval, cfg: &ArrayConfig) -> UserEstimate {
    let lambda = cfg.wavelength();
    let d = cfg.aperture();
    let omega = (lambda / (4.0 * PI) * (interval.lower + interval.upper)).clamp(-1.0, 1.0);
    let width = interval.width();
    let range = if width <= 0.0 || width < FARFIELD_WIDTH_FACTOR * 2.0 * PI / d {
        RangeEstimate::FarField
    } else {
        RangeEstimate::Finite(2.0 * PI * d / lambda * (1.0 - omega * omega) / width)
    };
    UserEstimate { omega, range }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::effective_rayleigh_distance;
    use approx::assert_relative_eq;

    fn cfg() -> ArrayConfig {
        ArrayConfig::with_propagation_speed(256, 30e9, 3e8).unwrap()
    }

    fn fd1(p: &ChannelPhase, x: f64) -> f64 {
        let h = 1e-6;
        (p.phase(x + h) - p.phase(x - h)) / (2.0 * h)
    }

    fn fd2(p: &ChannelPhase, x: f64) -> f64 {
        let h = 1e-4;
        (p.phase(x + h) - 2.0 * p.phase(x) + p.phase(x - h)) / (h * h)
    }

    #[test]
    fn stationary_point_examples() {
        let cfg = cfg();
        let u = UserState::new(10.0, 0.05).unwrap();
        let k0 = cfg.wavenumber();
        assert_relative_eq!(stationary_point(&cfg, &u, k0 * 0.05).unwrap(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(stationary_point(&cfg, &u, 0.0).unwrap(), 0.5, epsilon = 1e-12);
        let p = ChannelPhase::new(&cfg, &u, 0.0);
        assert!(fd1(&p, 0.5).abs() < 1e-6 * k0);
        for omega in [-1.0, 1.0] {
            let u = UserState::new(3.0, omega).unwrap();
            for k in [-500.0, 0.0, 321.0] {
                assert_eq!(stationary_point(&cfg, &u, k).unwrap(), 3.0 * omega);
            }
        }
    }

    #[test]
    fn stationary_point_outside_band() {
        let cfg = cfg();
        let u = UserState::new(10.0, 0.05).unwrap();
        let k0 = cfg.wavenumber();
        assert!(matches!(stationary_point(&cfg, &u, k0), Err(Error::OutsideBand { .. })));
        assert!(stationary_point(&cfg, &u, -2.0 * k0).is_err());
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let cfg = cfg();
        let u = UserState::new(4.0, -0.35).unwrap();
        let p = ChannelPhase::new(&cfg, &u, 120.0);
        for x in [-0.6, -0.1, 0.0, 0.3, 0.62] {
            assert_relative_eq!(p.phase_d1(x), fd1(&p, x), max_relative = 1e-6, epsilon = 1e-4);
            assert_relative_eq!(p.phase_d2(x), fd2(&p, x), max_relative = 1e-4);
            assert!(p.phase_d2(x) < 0.0);
        }
    }

    #[test]
    fn posp_value_at_centre() {
        let cfg = cfg();
        let u = UserState::new(10.0, 0.0).unwrap();
        let p = ChannelPhase::new(&cfg, &u, 0.0);
        // psi'' = -k (1 - Omega^2) / r0 at the reference antenna.
        assert_relative_eq!(p.phase_d2(0.0), -cfg.wavenumber() / 10.0, max_relative = 1e-12);
        assert_relative_eq!(fd2(&p, 0.0), -cfg.wavenumber() / 10.0, max_relative = 1e-5);
        let v = posp_value(&p, 0.0).unwrap();
        assert_relative_eq!(v.norm(), 0.1f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(v.arg(), -FRAC_PI_4, epsilon = 1e-12);
    }

    struct Toy {
        a: f64,
        sign: f64,
    }

    impl PhasePair for Toy {
        fn amplitude(&self, _x: f64) -> f64 {
            self.a
        }
        fn phase(&self, x: f64) -> f64 {
            self.sign * (0.3 + 2.0 * x * x)
        }
        fn phase_d1(&self, x: f64) -> f64 {
            self.sign * 4.0 * x
        }
        fn phase_d2(&self, _x: f64) -> f64 {
            self.sign * 4.0
        }
    }

    #[test]
    fn posp_value_scaling_and_conjugation() {
        let one = posp_value(&Toy { a: 1.0, sign: 1.0 }, 0.0).unwrap();
        let two = posp_value(&Toy { a: 2.0, sign: 1.0 }, 0.0).unwrap();
        assert_relative_eq!((two - one * 2.0).norm(), 0.0, epsilon = 1e-15);
        let neg = posp_value(&Toy { a: 1.0, sign: -1.0 }, 0.0).unwrap();
        assert_relative_eq!((neg - one.conj()).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(one.norm(), (PI / 2.0).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(one.arg(), 0.3 + FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_curvature_is_an_error() {
        let cfg = cfg();
        let u = UserState::new(0.3, 1.0).unwrap();
        let p = ChannelPhase::new(&cfg, &u, 10.0);
        // Endfire: 1 - Omega^2 = 0 makes psi'' vanish wherever r > 0.
        assert!(matches!(
            posp_value(&p, 0.0),
            Err(Error::DegenerateStationaryPoint { .. })
        ));
        assert!(posp_value(&Toy { a: 1.0, sign: 0.0 }, 0.0).is_err());
    }

    #[test]
    fn diffusion_interval_example() {
        let cfg = cfg();
        let iv = diffusion_interval(&cfg, &UserState::new(10.0, 0.05).unwrap());
        let k0 = cfg.wavenumber();
        let l = k0 * (0.05 - 0.06375) / (1.0f64 + 0.06375 * 0.06375 - 0.1275 * 0.05).sqrt();
        let r = k0 * (0.05 + 0.06375) / (1.0f64 + 0.06375 * 0.06375 + 0.1275 * 0.05).sqrt();
        assert_relative_eq!(iv.lower(), l, max_relative = 1e-12);
        assert_relative_eq!(iv.upper(), r, max_relative = 1e-12);
        assert_relative_eq!(iv.lower(), -8.64938, epsilon = 1e-5);
        assert_relative_eq!(iv.upper(), 71.10108, epsilon = 1e-5);
    }

    #[test]
    fn diffusion_interval_endpoints_are_aperture_stationary_points() {
        let cfg = cfg();
        let u = UserState::new(3.0, 0.4).unwrap();
        let iv = diffusion_interval(&cfg, &u);
        let half = cfg.aperture() / 2.0;
        assert_relative_eq!(
            stationary_point(&cfg, &u, iv.lower()).unwrap(),
            half,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            stationary_point(&cfg, &u, iv.upper()).unwrap(),
            -half,
            max_relative = 1e-9
        );
    }

    #[test]
    fn diffusion_interval_limits() {
        let cfg = cfg();
        let k0 = cfg.wavenumber();
        let iv = diffusion_interval(&cfg, &UserState::new(10.0, 0.0).unwrap());
        let a = cfg.aperture() / 20.0;
        assert_relative_eq!(iv.upper(), k0 * a / (1.0 + a * a).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(iv.lower(), -iv.upper(), max_relative = 1e-12);
        let far = diffusion_interval(&cfg, &UserState::new(1e9, 0.3).unwrap());
        assert!(far.width() < 1e-6);
        assert_relative_eq!(far.centre(), 0.3 * k0, max_relative = 1e-9);
        let on_end = diffusion_interval(&cfg, &UserState::new(cfg.aperture() / 2.0, 1.0).unwrap());
        assert!(on_end.lower().is_finite() && on_end.upper() <= k0);
    }

    #[test]
    fn simplified_interval_examples() {
        let cfg = cfg();
        let k0 = cfg.wavenumber();
        let iv = simplified_interval(&cfg, &UserState::new(10.0, 0.0).unwrap());
        assert_relative_eq!(iv.upper(), 40.055, epsilon = 1e-3);
        assert_relative_eq!(iv.lower(), -iv.upper());
        assert_relative_eq!(
            iv.width(),
            2.0 * PI * cfg.aperture() / (cfg.wavelength() * 10.0),
            max_relative = 1e-12
        );
        for omega in [-1.0, 1.0] {
            let iv = simplified_interval(&cfg, &UserState::new(10.0, omega).unwrap());
            assert_eq!(iv.width(), 0.0);
            assert_eq!(iv.lower(), omega * k0);
        }
        let u = UserState::new(100.0 * cfg.aperture(), 0.3).unwrap();
        let exact = diffusion_interval(&cfg, &u);
        let simple = simplified_interval(&cfg, &u);
        for (a, b) in [(exact.lower(), simple.lower()), (exact.upper(), simple.upper())] {
            assert!(((a - b) / a).abs() < 0.01);
        }
    }

    #[test]
    fn diffusion_is_wider_towards_broadside() {
        let cfg = cfg();
        let k0 = cfg.wavenumber();
        for omega in [0.1, 0.4, 0.8] {
            let iv = diffusion_interval(&cfg, &UserState::new(3.0, omega).unwrap());
            assert!(k0 * omega - iv.lower() > iv.upper() - k0 * omega);
        }
    }

    #[test]
    fn approx_spectrum_centre_and_support() {
        let cfg = cfg();
        let u = UserState::new(10.0, 0.0).unwrap();
        let iv = diffusion_interval(&cfg, &u);
        let grid = WaveGrid::new(
            vec![-300.0, iv.lower() - 0.01, 0.0, iv.upper() + 0.01],
            cfg.wavenumber(),
            1.0,
        )
        .unwrap();
        let s = approx_spectrum(&cfg, &u, &grid).unwrap();
        assert_eq!(s.values()[0], Complex64::new(0.0, 0.0));
        assert_eq!(s.values()[1], Complex64::new(0.0, 0.0));
        assert_eq!(s.values()[3], Complex64::new(0.0, 0.0));
        assert_relative_eq!(
            s.values()[2].norm(),
            (cfg.wavelength() * 10.0).sqrt(),
            max_relative = 1e-12
        );
        assert_eq!(s.provenance(), Provenance::Posp);
    }

    #[test]
    fn approx_spectrum_zero_on_band_edge() {
        let cfg = cfg();
        let u = UserState::new(0.2, 0.999).unwrap();
        let grid = WaveGrid::oversampled(&cfg, 2);
        let s = approx_spectrum(&cfg, &u, &grid).unwrap();
        assert_eq!(*s.values().last().unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn estimate_user_round_trip() {
        let cfg = cfg();
        let u = UserState::new(10.0, 0.05).unwrap();
        let est = estimate_user(&simplified_interval(&cfg, &u), &cfg);
        assert_relative_eq!(est.omega, 0.05, max_relative = 1e-12);
        assert_relative_eq!(est.range.finite().unwrap(), 10.0, max_relative = 1e-12);
        let sym = estimate_user(&WaveInterval::new(-50.0, 50.0).unwrap(), &cfg);
        assert_eq!(sym.omega, 0.0);
    }

    #[test]
    fn estimate_user_far_field_verdict() {
        let cfg = cfg();
        let lobe = FARFIELD_WIDTH_FACTOR * 2.0 * PI / cfg.aperture();
        let narrow = WaveInterval::new(100.0, 100.0 + 0.99 * lobe).unwrap();
        assert!(estimate_user(&narrow, &cfg).range.is_far_field());
        let point = WaveInterval::new(100.0, 100.0).unwrap();
        assert_eq!(estimate_user(&point, &cfg).range, RangeEstimate::FarField);
        let wide = WaveInterval::new(100.0, 100.0 + 1.01 * lobe).unwrap();
        assert!(!estimate_user(&wide, &cfg).range.is_far_field());
        assert_eq!(RangeEstimate::FarField.to_f64(), f64::INFINITY);
        // Beyond the effective Rayleigh distance the simplified width drops below the lobe.
        let r = effective_rayleigh_distance(&cfg, 0.2) * 1.01;
        let est = estimate_user(&simplified_interval(&cfg, &UserState::new(r, 0.2).unwrap()), &cfg);
        assert!(est.range.is_far_field());
    }

    #[test]
    fn interval_validation() {
        assert!(WaveInterval::new(1.0, 0.0).is_err());
        assert!(WaveInterval::new(f64::NAN, 0.0).is_err());
        let iv = WaveInterval::new(-1.0, 3.0).unwrap();
        assert_eq!(iv.width(), 4.0);
        assert_eq!(iv.centre(), 1.0);
        assert!(iv.contains(-1.0) && iv.contains(3.0) && !iv.contains(3.1));
    }
}

//! Uniform linear array geometry and exact spatial-domain channels.
//!
//! The array lies on the x-axis with its centre (the reference antenna) at the
//! origin. A user is described by its distance `r0` from the reference antenna
//! and its direction cosine `omega = cos(phi)` with respect to the array axis.
//! Angles are never carried as `phi`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Aperture definition used in every formula that needs `D`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApertureConvention {
    /// `D = (N - 1) d`, the distance between the outermost antennas.
    #[default]
    #[serde(rename = "n_minus_1")]
    NMinus1,
    /// `D = N d`.
    N,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArrayConfig {
    n_antennas: usize,
    spacing: f64,
    carrier_freq: f64,
    wavelength: f64,
    aperture_convention: ApertureConvention,
}

impl ArrayConfig {
    /// Half-wavelength ULA at `carrier_freq` Hz with free-space propagation.
    pub fn new(n_antennas: usize, carrier_freq: f64) -> Result<Self> {
        Self::with_propagation_speed(n_antennas, carrier_freq, SPEED_OF_LIGHT)
    }

    /// Like [`ArrayConfig::new`] but with an explicit propagation speed, e.g.
    /// the rounded `3e8` m/s that makes 30 GHz a 1 cm wavelength.
    pub fn with_propagation_speed(n_antennas: usize, carrier_freq: f64, speed: f64) -> Result<Self> {
        if n_antennas == 0 {
            return Err(Error::invalid("array needs at least one antenna"));
        }
        if !(carrier_freq > 0.0 && carrier_freq.is_finite()) {
            return Err(Error::invalid(format!(
                "carrier frequency must be positive, got {carrier_freq}"
            )));
        }
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(Error::invalid(format!(
                "propagation speed must be positive, got {speed}"
            )));
        }
        let wavelength = speed / carrier_freq;
        Ok(Self {
            n_antennas,
            spacing: wavelength / 2.0,
            carrier_freq,
            wavelength,
            aperture_convention: ApertureConvention::NMinus1,
        })
    }

    /// 256 antennas at 30 GHz, half-wavelength spacing.
    pub fn reference() -> Self {
        Self::new(256, 30e9).expect("static configuration is valid")
    }

    pub fn with_spacing(mut self, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid(format!(
                "antenna spacing must be positive, got {spacing}"
            )));
        }
        self.spacing = spacing;
        Ok(self)
    }

    pub fn with_aperture_convention(mut self, convention: ApertureConvention) -> Self {
        self.aperture_convention = convention;
        self
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn carrier_freq(&self) -> f64 {
        self.carrier_freq
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn aperture_convention(&self) -> ApertureConvention {
        self.aperture_convention
    }

    pub fn aperture(&self) -> f64 {
        match self.aperture_convention {
            ApertureConvention::NMinus1 => (self.n_antennas - 1) as f64 * self.spacing,
            ApertureConvention::N => self.n_antennas as f64 * self.spacing,
        }
    }

    /// Free-space wave number `2 pi / lambda`, also the edge of the propagating band.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Spacing of the DFT samples on the wave-number axis, `4 pi / (lambda N)`.
    pub fn angular_step(&self) -> f64 {
        4.0 * PI / (self.wavelength * self.n_antennas as f64)
    }

    /// DFT direction cosines `(2n - N - 1) / N`, `n = 1..=N`.
    pub fn dft_directions(&self) -> Vec<f64> {
        let n = self.n_antennas as f64;
        (1..=self.n_antennas).map(|i| (2.0 * i as f64 - n - 1.0) / n).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UserState {
    distance: f64,
    direction_cosine: f64,
    path_gain: Complex64,
}

impl UserState {
    pub fn new(distance: f64, direction_cosine: f64) -> Result<Self> {
        Self::with_gain(distance, direction_cosine, Complex64::new(1.0, 0.0))
    }

    pub fn with_gain(distance: f64, direction_cosine: f64, path_gain: Complex64) -> Result<Self> {
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::invalid(format!(
                "user distance must be positive, got {distance}"
            )));
        }
        if !(direction_cosine.abs() <= 1.0) {
            return Err(Error::invalid(format!(
                "direction cosine must lie in [-1, 1], got {direction_cosine}"
            )));
        }
        Ok(Self {
            distance,
            direction_cosine,
            path_gain,
        })
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn direction_cosine(&self) -> f64 {
        self.direction_cosine
    }

    pub fn path_gain(&self) -> Complex64 {
        self.path_gain
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Spatial,
    Angular,
    Wavenumber,
}

/// Complex samples over a strictly increasing coordinate grid.
///
/// Spatial vectors are indexed by antenna position in meters; angular vectors by
/// the DFT sample positions `k_{x,n}` in rad/m.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    values: Vec<Complex64>,
    grid: Vec<f64>,
    domain: Domain,
}

impl ComplexVector {
    pub fn new(values: Vec<Complex64>, grid: Vec<f64>, domain: Domain) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("grid must be strictly increasing"));
        }
        Ok(Self { values, grid, domain })
    }

    pub(crate) fn from_parts(values: Vec<Complex64>, grid: Vec<f64>, domain: Domain) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { values, grid, domain }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product `self^H other`.
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Same vector scaled to unit norm. A zero vector is returned unchanged.
    pub fn normalized(mut self) -> Self {
        let norm = self.norm();
        if norm > 0.0 {
            for v in &mut self.values {
                *v /= norm;
            }
        }
        self
    }
}

/// `x_n = d (n - (N + 1) / 2)` for `n = 1..=N`.
pub fn antenna_positions(cfg: &ArrayConfig) -> Vec<f64> {
    let centre = (cfg.n_antennas as f64 + 1.0) / 2.0;
    (1..=cfg.n_antennas)
        .map(|n| cfg.spacing * (n as f64 - centre))
        .collect()
}

#[inline]
pub(crate) fn distance_unchecked(r0: f64, omega: f64, x: f64) -> f64 {
    (r0 * r0 + x * x - 2.0 * r0 * x * omega).sqrt()
}

/// Distance from the array point at `x` to the user.
pub fn element_distance(user: &UserState, x: f64) -> Result<f64> {
    let r = distance_unchecked(user.distance, user.direction_cosine, x);
    // Rounding in the radicand can go slightly negative right on the antenna.
    if !(r > user.distance * 1e-15) {
        return Err(Error::DegenerateGeometry { x });
    }
    Ok(r)
}

/// Near-field steering vector `b(omega, r0)` with amplitude taper `r0 / r_n`.
pub fn near_steering_vector(cfg: &ArrayConfig, user: &UserState) -> Result<ComplexVector> {
    let k = cfg.wavenumber();
    let r0 = user.distance;
    let scale = 1.0 / (cfg.n_antennas as f64).sqrt();
    let grid = antenna_positions(cfg);
    let values = grid
        .iter()
        .map(|&x| {
            let r = element_distance(user, x)?;
            Ok(Complex64::from_polar(scale * r0 / r, -k * (r - r0)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexVector::from_parts(values, grid, Domain::Spatial))
}

/// Spatial channel `sqrt(N) h0 b(omega, r0)`.
pub fn spatial_channel(cfg: &ArrayConfig, user: &UserState) -> Result<ComplexVector> {
    let mut h = near_steering_vector(cfg, user)?;
    let gain = user.path_gain * (cfg.n_antennas as f64).sqrt();
    for v in &mut h.values {
        *v *= gain;
    }
    Ok(h)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSample {
    pub value: Complex64,
    /// The sample point lies outside `[-D/2, D/2]`.
    pub outside_aperture: bool,
}

/// Continuous channel `h(x)` along the array axis.
pub fn continuous_channel(cfg: &ArrayConfig, user: &UserState, x: f64) -> Result<ChannelSample> {
    let r = element_distance(user, x)?;
    let r0 = user.distance;
    let value = user.path_gain * Complex64::from_polar(r0 / r, -cfg.wavenumber() * (r - r0));
    Ok(ChannelSample {
        value,
        outside_aperture: x.abs() > cfg.aperture() / 2.0,
    })
}

/// Far-field steering vector `a(omega)`; element `n` has phase `2 pi d / lambda * n * omega`.
pub fn far_steering_vector(cfg: &ArrayConfig, omega: f64) -> ComplexVector {
    let scale = 1.0 / (cfg.n_antennas as f64).sqrt();
    let step = cfg.wavenumber() * cfg.spacing * omega;
    let values = (0..cfg.n_antennas)
        .map(|n| Complex64::from_polar(scale, step * n as f64))
        .collect();
    ComplexVector::from_parts(values, antenna_positions(cfg), Domain::Spatial)
}

/// Classical Rayleigh distance `2 D^2 / lambda`.
pub fn rayleigh_distance(cfg: &ArrayConfig) -> f64 {
    let d = cfg.aperture();
    2.0 * d * d / cfg.wavelength
}

/// Direction-dependent near-field boundary `1.155 D^2 (1 - omega^2) / lambda`.
pub fn effective_rayleigh_distance(cfg: &ArrayConfig, omega: f64) -> f64 {
    let d = cfg.aperture();
    1.155 * d * d * (1.0 - omega * omega) / cfg.wavelength
}

//! Measured diffusion support of a wave-number spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArrayConfig, ComplexVector};
use crate::posp::WaveInterval;
use crate::spectral::{sinc_interpolate, ComplexSpectrum, WaveGrid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupportConfig {
    /// Threshold relative to the spectrum peak.
    pub beta: f64,
    /// Grid points per DFT step when reconstructing from angular samples.
    pub oversample: usize,
    /// Fraction of the propagating band that is searched.
    pub band_fraction: f64,
}

impl Default for SupportConfig {
    fn default() -> Self {
        Self {
            beta: 0.42,
            oversample: 16,
            band_fraction: 1.0,
        }
    }
}

impl SupportConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if self.oversample == 0 {
            return Err(Error::invalid("oversample must be at least 1"));
        }
        if !(self.band_fraction > 0.0 && self.band_fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "band_fraction must lie in (0, 1], got {}",
                self.band_fraction
            )));
        }
        Ok(())
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Support {
    pub interval: WaveInterval,
    /// The run reached the first or last grid point, so the true edge may lie beyond it.
    pub truncated: bool,
}

/// Contiguous run around the global peak on which `|H| >= beta * max |H|`.
///
/// Edges are placed by linear interpolation of `|H|` between the last grid point
/// inside the run and the first one outside it.
pub fn extract_support(spectrum: &ComplexSpectrum, scfg: &SupportConfig) -> Result<Support> {
    scfg.validate()?;
    let mags = spectrum.magnitudes();
    support_from_magnitudes(spectrum.points(), &mags, scfg.beta)
}

pub(crate) fn support_from_magnitudes(points: &[f64], mags: &[f64], beta: f64) -> Result<Support> {
    let (peak, max) = mags
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, &m)| if m > acc.1 { (i, m) } else { acc });
    if !(max > 0.0) {
        return Err(Error::ZeroSpectrum);
    }
    let threshold = beta * max;
    let crossing = |inside: usize, outside: usize| {
        let (m_in, m_out) = (mags[inside], mags[outside]);
        let t = (m_in - threshold) / (m_in - m_out);
        points[inside] + t * (points[outside] - points[inside])
    };

    let mut lo = peak;
    while lo > 0 && mags[lo - 1] >= threshold {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < mags.len() && mags[hi + 1] >= threshold {
        hi += 1;
    }
    let truncated = lo == 0 || hi + 1 == mags.len();
    let lower = if lo == 0 { points[0] } else { crossing(lo, lo - 1) };
    let upper = if hi + 1 == mags.len() {
        points[hi]
    } else {
        crossing(hi, hi + 1)
    };
    Ok(Support {
        interval: WaveInterval::new(lower, upper)?,
        truncated,
    })
}

/// Reconstructs the spectrum from `N` angular samples onto the oversampled grid
/// and extracts its support.
pub fn support_from_angular(cfg: &ArrayConfig, angular: &ComplexVector, scfg: &SupportConfig) -> Result<Support> {
    scfg.validate()?;
    let grid = WaveGrid::band_fraction(cfg, scfg.oversample, scfg.band_fraction);
    let spectrum = sinc_interpolate(cfg, angular, &grid)?;
    extract_support(&spectrum, scfg)
}

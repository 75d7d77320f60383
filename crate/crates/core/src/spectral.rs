//! Transforms between the spatial, angular and wave-number domains.
//!
//! The wave-number spectrum of the continuous channel is
//!
//! ```text
//! H(k_x) = ∫_{-D/2}^{D/2} h(x) exp(-j k_x x) dx
//! ```
//!
//! [`wavenumber_quadrature`] evaluates it numerically and is the reference every
//! approximation in this crate is checked against. The angular (DFT) domain
//! samples the same spectrum at `k_{x,n} = (2 pi / lambda)(2n - N - 1) / N`;
//! [`sinc_interpolate`] reconstructs the continuous spectrum from those samples.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{antenna_positions, ArrayConfig, ComplexVector, Domain, UserState};

/// Strictly increasing wave-number sample points inside the propagating band.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveGrid {
    points: Vec<f64>,
    band_limit: f64,
    sample_step: f64,
}

impl WaveGrid {
    pub fn new(points: Vec<f64>, band_limit: f64, sample_step: f64) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("wave grid must be strictly increasing"));
        }
        if let Some(p) = points.iter().find(|p| p.abs() > band_limit * (1.0 + 1e-12)) {
            return Err(Error::OutsideBand { k_x: *p, band_limit });
        }
        Ok(Self {
            points,
            band_limit,
            sample_step,
        })
    }

    /// The `N` DFT sample positions `k_{x,n}`.
    pub fn angular(cfg: &ArrayConfig) -> Self {
        let k0 = cfg.wavenumber();
        Self {
            points: cfg.dft_directions().into_iter().map(|o| k0 * o).collect(),
            band_limit: k0,
            sample_step: cfg.angular_step(),
        }
    }

    /// Whole band `[-2 pi / lambda, 2 pi / lambda]` at `oversample` points per DFT step.
    pub fn oversampled(cfg: &ArrayConfig, oversample: usize) -> Self {
        Self::band_fraction(cfg, oversample, 1.0)
    }

    /// Oversampled lattice restricted to `|k_x| <= fraction * 2 pi / lambda`.
    pub fn band_fraction(cfg: &ArrayConfig, oversample: usize, fraction: f64) -> Self {
        let k0 = cfg.wavenumber();
        let limit = fraction.clamp(0.0, 1.0) * k0;
        Self::window(cfg, oversample, -limit, limit)
    }

    /// Points of the oversampled lattice `-2 pi / lambda + i * step / oversample`
    /// that fall inside `[lo, hi]` (clipped to the band).
    ///
    /// Every window of the same array and oversampling factor shares the lattice,
    /// so spectra on different windows line up point for point.
    pub fn window(cfg: &ArrayConfig, oversample: usize, lo: f64, hi: f64) -> Self {
        let k0 = cfg.wavenumber();
        let oversample = oversample.max(1);
        let step = cfg.angular_step() / oversample as f64;
        let count = cfg.n_antennas() * oversample;
        let lo = lo.max(-k0);
        let hi = hi.min(k0);
        let first = ((lo + k0) / step - 1e-9).ceil().max(0.0) as usize;
        let last = (((hi + k0) / step + 1e-9).floor().max(0.0) as usize).min(count);
        let points = if hi < lo || first > last {
            Vec::new()
        } else {
            (first..=last).map(|i| (-k0 + i as f64 * step).clamp(-k0, k0)).collect()
        };
        Self {
            points,
            band_limit: k0,
            sample_step: cfg.angular_step(),
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn band_limit(&self) -> f64 {
        self.band_limit
    }

    /// DFT sample spacing `4 pi / (lambda N)` of the array this grid belongs to.
    pub fn sample_step(&self) -> f64 {
        self.sample_step
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Quadrature,
    Interpolated,
    Posp,
    Farfield,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSpectrum {
    values: Vec<Complex64>,
    grid: WaveGrid,
    provenance: Provenance,
}

impl ComplexSpectrum {
    pub fn new(values: Vec<Complex64>, grid: WaveGrid, provenance: Provenance) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self {
            values,
            grid,
            provenance,
        })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn grid(&self) -> &WaveGrid {
        &self.grid
    }

    pub fn points(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Largest magnitude, or 0 for an empty spectrum.
    pub fn peak_magnitude(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        for v in &mut self.values {
            *v *= factor;
        }
        self
    }
}

/// Virtual angular representation `H_A[n] = a(Omega_n)^H h`.
///
/// The DFT grid is unitary for half-wavelength spacing.
pub fn angular_transform(cfg: &ArrayConfig, h: &ComplexVector) -> Result<ComplexVector> {
    let n = cfg.n_antennas();
    if h.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: h.len(),
        });
    }
    let scale = 1.0 / (n as f64).sqrt();
    let step = cfg.wavenumber() * cfg.spacing();
    let grid = WaveGrid::angular(cfg).points;
    let values = cfg
        .dft_directions()
        .into_iter()
        .map(|omega| {
            let rot = Complex64::from_polar(1.0, -step * omega);
            let mut phasor = Complex64::new(scale, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for v in h.values() {
                acc += phasor * v;
                phasor *= rot;
            }
            acc
        })
        .collect();
    Ok(ComplexVector::from_parts(values, grid, Domain::Angular))
}

/// Adjoint of [`angular_transform`]: `h = sum_n a(Omega_n) H_A[n]`.
pub fn inverse_angular_transform(cfg: &ArrayConfig, angular: &ComplexVector) -> Result<ComplexVector> {
    let n = cfg.n_antennas();
    if angular.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: angular.len(),
        });
    }
    let scale = 1.0 / (n as f64).sqrt();
    let step = cfg.wavenumber() * cfg.spacing();
    let directions = cfg.dft_directions();
    let values = (0..n)
        .map(|i| {
            directions
                .iter()
                .zip(angular.values())
                .map(|(omega, v)| Complex64::from_polar(scale, step * omega * i as f64) * v)
                .sum()
        })
        .collect();
    Ok(ComplexVector::from_parts(
        values,
        antenna_positions(cfg),
        Domain::Spatial,
    ))
}

/// Settings of the adaptive oscillatory quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    /// Largest phase advance of the integrand per coarsest step, radians.
    pub max_phase_step: f64,
    /// Stop when successive Simpson estimates agree to this relative tolerance.
    pub rel_tol: f64,
    /// Values smaller than `floor_fraction * ∫|h(x)| dx` are converged in absolute
    /// rather than relative terms; far outside the diffusion support the spectrum
    /// is many orders below its peak.
    pub floor_fraction: f64,
    /// Maximum number of step halvings after the first Simpson pair.
    pub max_halvings: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            max_phase_step: PI / 8.0,
            rel_tol: 1e-6,
            floor_fraction: 1e-3,
            max_halvings: 10,
        }
    }
}

struct Integrand {
    r0: f64,
    omega: f64,
    k0: f64,
    gain: Complex64,
}

impl Integrand {
    #[inline]
    fn channel(&self, x: f64) -> Complex64 {
        let r = crate::geometry::distance_unchecked(self.r0, self.omega, x);
        self.gain * Complex64::from_polar(self.r0 / r, -self.k0 * (r - self.r0))
    }
}

/// Channel samples on the nested trapezoid lattices, shared by every wave number.
///
/// Level 0 holds the `panels + 1` coarse nodes; level `j >= 1` holds the midpoints
/// added by the `j`-th halving.
struct Nodes {
    half: f64,
    panels: usize,
    levels: Vec<Vec<Complex64>>,
    l1: f64,
}

/// Halvings whose samples are cached; deeper levels are evaluated on demand.
const CACHED_LEVELS: usize = 6;

impl Nodes {
    fn new(integrand: &Integrand, half: f64, panels: usize, depth: usize) -> Self {
        let span = 2.0 * half;
        let coarse: Vec<Complex64> = (0..=panels)
            .map(|i| integrand.channel(-half + span * i as f64 / panels as f64))
            .collect();
        let n = coarse.len();
        let l1 = coarse.iter().enumerate().fold(0.0, |acc, (i, v)| {
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            acc + w * v.norm()
        }) * span
            / panels as f64;
        let mut nodes = Self {
            half,
            panels,
            levels: vec![coarse],
            l1,
        };
        for j in 1..=depth {
            let level = nodes.midpoints(integrand, j);
            nodes.levels.push(level);
        }
        nodes
    }

    /// Step of the lattice after `j` halvings.
    fn step(&self, j: usize) -> f64 {
        2.0 * self.half / (self.panels << j) as f64
    }

    fn midpoints(&self, integrand: &Integrand, j: usize) -> Vec<Complex64> {
        let coarse = self.step(j - 1);
        (0..self.panels << (j - 1))
            .map(|i| integrand.channel(-self.half + (i as f64 + 0.5) * coarse))
            .collect()
    }
}

/// `sum_i values[i] exp(-j k (x0 + i dx))`, with the kernel advanced by rotation
/// and re-anchored exactly every 512 samples.
fn phased_sum(values: &[Complex64], x0: f64, dx: f64, k_x: f64) -> Complex64 {
    let rot = Complex64::from_polar(1.0, -k_x * dx);
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, chunk) in values.chunks(512).enumerate() {
        let mut kernel = Complex64::from_polar(1.0, -k_x * (x0 + (c * 512) as f64 * dx));
        for v in chunk {
            acc += v * kernel;
            kernel *= rot;
        }
    }
    acc
}

fn integrate_at(integrand: &Integrand, nodes: &Nodes, k_x: f64, qcfg: &QuadratureConfig) -> Result<Complex64> {
    let half = nodes.half;
    let step0 = nodes.step(0);
    let coarse = &nodes.levels[0];
    let ends = (coarse[0] * Complex64::from_polar(1.0, k_x * half)
        + coarse[coarse.len() - 1] * Complex64::from_polar(1.0, -k_x * half))
        * 0.5;
    let inner = phased_sum(&coarse[1..coarse.len() - 1], -half + step0, step0, k_x);
    let floor = qcfg.floor_fraction * nodes.l1;

    // Trapezoid sums reuse every previous sample when the step is halved.
    let refine = |trap: Complex64, j: usize| -> Complex64 {
        let coarse_step = nodes.step(j - 1);
        let computed;
        let mids: &[Complex64] = match nodes.levels.get(j) {
            Some(level) => level,
            None => {
                computed = nodes.midpoints(integrand, j);
                &computed
            }
        };
        trap * 0.5 + phased_sum(mids, -half + 0.5 * coarse_step, coarse_step, k_x) * nodes.step(j)
    };

    let mut trap = (ends + inner) * step0;
    let trap1 = refine(trap, 1);
    let mut simpson = (trap1 * 4.0 - trap) / 3.0;
    trap = trap1;
    let mut estimate = f64::INFINITY;
    for j in 2..qcfg.max_halvings as usize + 2 {
        let next_trap = refine(trap, j);
        let next = (next_trap * 4.0 - trap) / 3.0;
        let delta = (next - simpson).norm();
        estimate = delta / next.norm().max(floor);
        if estimate <= qcfg.rel_tol {
            // One Richardson step on top of the converged Simpson pair.
            return Ok(next + (next - simpson) / 15.0);
        }
        simpson = next;
        trap = next_trap;
    }
    Err(Error::QuadratureNotConverged { k_x, estimate })
}

/// Numerical wave-number spectrum of the continuous channel.
///
/// Composite Simpson rule on nested lattices whose coarsest step keeps the
/// integrand phase advance below `max_phase_step` for every propagating wave
/// number (phase rate at most `|k_x| + 2 pi / lambda <= 4 pi / lambda`). Each
/// grid point halves the step until two successive estimates agree to `rel_tol`.
/// Channel samples are shared across grid points; points are evaluated in
/// parallel with a fixed summation order, so results do not depend on the grid
/// or the thread count.
pub fn wavenumber_quadrature(cfg: &ArrayConfig, user: &UserState, grid: &WaveGrid) -> Result<ComplexSpectrum> {
    wavenumber_quadrature_with(cfg, user, grid, &QuadratureConfig::default())
}

pub fn wavenumber_quadrature_with(
    cfg: &ArrayConfig,
    user: &UserState,
    grid: &WaveGrid,
    qcfg: &QuadratureConfig,
) -> Result<ComplexSpectrum> {
    let half = cfg.aperture() / 2.0;
    let omega = user.direction_cosine();
    let r0 = user.distance();
    // The only non-integrable case: an endfire user sitting inside the aperture.
    if 1.0 - omega * omega == 0.0 && r0 <= half {
        return Err(Error::DegenerateGeometry { x: r0 * omega });
    }
    if !(qcfg.max_phase_step > 0.0) {
        return Err(Error::invalid("max_phase_step must be positive"));
    }
    let k0 = cfg.wavenumber();
    let integrand = Integrand {
        r0,
        omega,
        k0,
        gain: user.path_gain(),
    };
    let panels = ((2.0 * half * 2.0 * k0 / qcfg.max_phase_step).ceil() as usize).max(2);
    let depth = CACHED_LEVELS.min(qcfg.max_halvings as usize + 1);
    let nodes = Nodes::new(&integrand, half, panels, depth);
    let values = grid
        .points()
        .par_iter()
        .map(|&k| integrate_at(&integrand, &nodes, k, qcfg))
        .collect::<Result<Vec<_>>>()?;
    ComplexSpectrum::new(values, grid.clone(), Provenance::Quadrature)
}

/// Closed-form plane-wave spectrum `2 sin((D/2) u) / u`, `u = k_x - 2 pi omega / lambda`.
pub fn farfield_spectrum(cfg: &ArrayConfig, omega: f64, grid: &WaveGrid) -> ComplexSpectrum {
    let d = cfg.aperture();
    let centre = cfg.wavenumber() * omega;
    let values = grid
        .points()
        .iter()
        .map(|&k| {
            let a = 0.5 * d * (k - centre);
            let v = if a.abs() < 1e-8 {
                d * (1.0 - a * a / 6.0)
            } else {
                d * a.sin() / a
            };
            Complex64::new(v, 0.0)
        })
        .collect();
    ComplexSpectrum {
        values,
        grid: grid.clone(),
        provenance: Provenance::Farfield,
    }
}

/// Wave-number samples implied by an angular vector.
///
/// `H_A[m]` is a unitary DFT referenced to the first antenna; the continuous
/// spectrum is referenced to the array centre and carries the spatial step `d`.
/// Sample `m` of the spectrum is therefore `d sqrt(N) exp(j k_m d (N-1)/2) H_A[m]`,
/// which equals `d sum_n h_n exp(-j k_m x_n)` exactly.
pub fn wavenumber_samples(cfg: &ArrayConfig, angular: &ComplexVector) -> Result<Vec<Complex64>> {
    let n = cfg.n_antennas();
    if angular.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: angular.len(),
        });
    }
    let d = cfg.spacing();
    let scale = d * (n as f64).sqrt();
    let shift = d * (n as f64 - 1.0) / 2.0;
    let grid = WaveGrid::angular(cfg);
    Ok(grid
        .points()
        .iter()
        .zip(angular.values())
        .map(|(&k, v)| Complex64::from_polar(scale, k * shift) * v)
        .collect())
}

/// Sinc reconstruction of the continuous spectrum from `N` angular samples.
///
/// The infinite sum over the periodically extended samples is truncated to `3N`
/// terms centred on each query point. With the centre-referenced samples the
/// extension is periodic for odd `N` and alternates sign every period for even
/// `N`. Exact reconstruction between samples assumes half-wavelength spacing.
pub fn sinc_interpolate(cfg: &ArrayConfig, angular: &ComplexVector, query: &WaveGrid) -> Result<ComplexSpectrum> {
    let samples = wavenumber_samples(cfg, angular)?;
    let n = cfg.n_antennas() as i64;
    let step = cfg.angular_step();
    let centre = (n as f64 + 1.0) / 2.0;
    let alternate = n % 2 == 0;
    let half_terms = 3 * n / 2;
    let values = query
        .points()
        .par_iter()
        .map(|&k| {
            let position = k / step + centre;
            let nearest = position.round() as i64;
            if (position - nearest as f64).abs() < 1e-12 {
                let period = (nearest - 1).div_euclid(n);
                let sign = if alternate && period % 2 != 0 { -1.0 } else { 1.0 };
                return samples[(nearest - 1).rem_euclid(n) as usize] * sign;
            }
            // sin(pi (u - j)) = (-1)^j sin(pi u): one sine per query point.
            let first = nearest - half_terms;
            let u = position - first as f64;
            let mut numerator = (PI * u).sin() / PI;
            let mut acc = Complex64::new(0.0, 0.0);
            for idx in first..(first + 3 * n) {
                let weight = numerator / (position - idx as f64);
                numerator = -numerator;
                let period = (idx - 1).div_euclid(n);
                let m = (idx - 1).rem_euclid(n) as usize;
                let sign = if alternate && period % 2 != 0 { -1.0 } else { 1.0 };
                acc += samples[m] * (sign * weight);
            }
            acc
        })
        .collect();
    ComplexSpectrum::new(values, query.clone(), Provenance::Interpolated)
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("user coincides with the antenna at x = {x} m")]
    DegenerateGeometry { x: f64 },

    #[error("wave-number {k_x} rad/m is outside the open band |k_x| < {band_limit} rad/m")]
    OutsideBand { k_x: f64, band_limit: f64 },

    #[error("degenerate stationary point: |psi''(x_s)| = {curvature:e} is below {threshold:e}")]
    DegenerateStationaryPoint { curvature: f64, threshold: f64 },

    #[error("quadrature at k_x = {k_x} rad/m did not converge (estimated relative error {estimate:e})")]
    QuadratureNotConverged { k_x: f64, estimate: f64 },

    #[error("spectrum is identically zero")]
    ZeroSpectrum,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("cannot aggregate an empty set of trial records")]
    EmptyRecords,

    #[error("NMSE denominator is zero")]
    ZeroDenominator,

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

//! Wave-number domain modelling of near-field channels for extremely large
//! linear arrays: spectra, stationary-phase approximations, diffusion support
//! estimation and beam training.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod experiments;
pub mod geometry;
pub mod metrics;
pub mod posp;
pub mod spectral;
pub mod support;
pub mod training;

pub use error::{Error, Result};

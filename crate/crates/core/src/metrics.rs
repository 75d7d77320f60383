//! Interval similarity, estimation error and rate metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ComplexVector;
use crate::posp::{RangeEstimate, WaveInterval};

/// Intersection over union of two closed intervals (length measure).
///
/// Two zero-width intervals score 1 when identical and 0 otherwise.
pub fn jaccard(a: &WaveInterval, b: &WaveInterval) -> f64 {
    let union = a.upper().max(b.upper()) - a.lower().min(b.lower());
    if union <= 0.0 {
        return if a == b { 1.0 } else { 0.0 };
    }
    let inter = (a.upper().min(b.upper()) - a.lower().max(b.lower())).max(0.0);
    (inter / union).clamp(0.0, 1.0)
}

/// One scheme's outcome in one Monte-Carlo trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub scheme: String,
    pub snr_db: f64,
    pub true_omega: f64,
    pub est_omega: f64,
    pub true_r: f64,
    pub est_r: RangeEstimate,
    pub rate: f64,
    pub eff_rate: f64,
}

/// `E|est - true|^2 / E|true|^2` over the direction cosines.
pub fn nmse_angle(records: &[TrialRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let (num, den) = records.iter().fold((0.0, 0.0), |(n, d), r| {
        (n + (r.est_omega - r.true_omega).powi(2), d + r.true_omega.powi(2))
    });
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceNmse {
    /// `None` when every estimate was a far-field verdict.
    pub nmse: Option<f64>,
    /// Records excluded because the estimate was a far-field verdict.
    pub far_field_count: usize,
}

/// Distance NMSE over the records with a finite range estimate.
pub fn nmse_distance(records: &[TrialRecord]) -> Result<DistanceNmse> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut far_field_count = 0;
    let (mut num, mut den) = (0.0, 0.0);
    for r in records {
        match r.est_r {
            RangeEstimate::Finite(est) => {
                num += (est - r.true_r).powi(2);
                den += r.true_r.powi(2);
            }
            RangeEstimate::FarField => far_field_count += 1,
        }
    }
    if far_field_count == records.len() {
        return Ok(DistanceNmse {
            nmse: None,
            far_field_count,
        });
    }
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(DistanceNmse {
        nmse: Some(num / den),
        far_field_count,
    })
}

/// How the beamforming gain enters the rate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    /// `log2(1 + |h^H v|^2 / sigma^2)`.
    #[default]
    Squared,
    /// `log2(1 + |h^H v| / sigma^2)`, gain not squared.
    Unsquared,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates {
    pub rate: f64,
    pub eff_rate: f64,
}

/// Achievable rate of beamformer `v` and its overhead-discounted value.
pub fn rates(
    h: &ComplexVector,
    v: &ComplexVector,
    noise_var: f64,
    t_tra: usize,
    t_tot: usize,
    convention: RateConvention,
) -> Result<Rates> {
    if h.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: h.len(),
            actual: v.len(),
        });
    }
    if !(noise_var > 0.0) {
        return Err(Error::invalid(format!(
            "noise variance must be positive, got {noise_var}"
        )));
    }
    if t_tot == 0 || t_tra > t_tot {
        return Err(Error::invalid(format!(
            "need 0 <= t_tra <= t_tot, got {t_tra} / {t_tot}"
        )));
    }
    let gain = h.inner(v).norm();
    let snr = match convention {
        RateConvention::Squared => gain * gain / noise_var,
        RateConvention::Unsquared => gain / noise_var,
    };
    let rate = snr.ln_1p() / std::f64::consts::LN_2;
    Ok(Rates {
        rate,
        eff_rate: (1.0 - t_tra as f64 / t_tot as f64) * rate,
    })
}

/// Sample mean and standard error of the mean (0 for a single sample).
pub fn mean_and_std_err(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

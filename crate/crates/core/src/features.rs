//! Per-subject feature assembly.
//!
//! Eight spectral features per channel (seven band powers plus relative
//! gamma) and five asymmetry indices:
//!
//! * frontal alpha   α_f = (α_AF4 − α_AF3) / (α_AF3 + α_AF4)
//! * temporal alpha  α_t = (α_T8 − α_T7) / (α_T8 + α_T7)
//! * alpha asymmetry α_a = α_f + α_t
//! * frontal beta    β_f = (β_AF4 − β_AF3) / (β_AF3 + β_AF4)
//! * temporal beta   β_t = (β_T8 − β_T7) / (β_T8 + β_T7)
//!
//! With the default five-channel montage this yields 45 named features per
//! subject. Band powers are kept as absolute integrated power in µV²;
//! standardization happens inside the classifiers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::CleanRecording;
use crate::spectral::{
    all_band_powers, relative_gamma, welch_psd, Band, RgDirection, SpectralError,
};

/// Names of the five asymmetry features, in canonical order.
pub const ASYMMETRY_NAMES: [&str; 5] = [
    "alpha_frontal",
    "alpha_temporal",
    "alpha_asym",
    "beta_frontal",
    "beta_temporal",
];

/// Channels required by the asymmetry equations.
const FRONTAL_LEFT: &str = "AF3";
const FRONTAL_RIGHT: &str = "AF4";
const TEMPORAL_LEFT: &str = "T7";
const TEMPORAL_RIGHT: &str = "T8";

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("channel {0} required for asymmetry features is missing")]
    MissingChannel(String),
    #[error("feature {name}: degenerate denominator ({left} + {right})")]
    DegenerateDenominator { name: String, left: f64, right: f64 },
    #[error("feature {name}: {source}")]
    Spectral { name: String, source: SpectralError },
}

/// Spectral-extraction settings shared by the whole cohort.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub window_len: usize,
    pub overlap_frac: f64,
    pub rg_direction: RgDirection,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            window_len: 128,
            overlap_frac: 0.5,
            rg_direction: RgDirection::default(),
        }
    }
}

/// An ordered, named feature vector for one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub subject_id: String,
    entries: Vec<(String, f64)>,
}

impl FeatureVector {
    pub fn new(subject_id: impl Into<String>, entries: Vec<(String, f64)>) -> Self {
        FeatureVector {
            subject_id: subject_id.into(),
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, v)| *v)
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

/// Canonical feature names for a montage: per channel `delta_<ch>`,
/// `theta_<ch>`, `slow_<ch>`, `alpha_<ch>`, `low_beta_<ch>`, `beta_<ch>`,
/// `gamma_<ch>`, `RG_<ch>`, followed by the five asymmetries.
pub fn feature_names(montage: &[String]) -> Vec<String> {
    let mut names = Vec::with_capacity(montage.len() * 8 + 5);
    for ch in montage {
        for band in Band::ALL {
            names.push(format!("{}_{ch}", band.name()));
        }
        names.push(format!("RG_{ch}"));
    }
    names.extend(ASYMMETRY_NAMES.iter().map(|s| s.to_string()));
    names
}

fn normalized_asymmetry(name: &str, left: f64, right: f64) -> Result<f64, FeatureError> {
    let denom = left + right;
    if !(denom.is_finite() && denom > f64::EPSILON) {
        return Err(FeatureError::DegenerateDenominator {
            name: name.into(),
            left,
            right,
        });
    }
    Ok((right - left) / denom)
}

/// Frontal alpha asymmetry from the AF3/AF4 alpha powers.
pub fn frontal_alpha_asymmetry(a_af3: f64, a_af4: f64) -> Result<f64, FeatureError> {
    normalized_asymmetry("alpha_frontal", a_af3, a_af4)
}

/// Temporal alpha asymmetry from the T7/T8 alpha powers.
pub fn temporal_alpha_asymmetry(a_t7: f64, a_t8: f64) -> Result<f64, FeatureError> {
    normalized_asymmetry("alpha_temporal", a_t7, a_t8)
}

/// Alpha asymmetry: the sum of the frontal and temporal indices.
pub fn alpha_asymmetry(af: f64, at: f64) -> f64 {
    af + at
}

/// Frontal and temporal beta asymmetries.
pub fn beta_asymmetries(
    b_af3: f64,
    b_af4: f64,
    b_t7: f64,
    b_t8: f64,
) -> Result<(f64, f64), FeatureError> {
    Ok((
        normalized_asymmetry("beta_frontal", b_af3, b_af4)?,
        normalized_asymmetry("beta_temporal", b_t7, b_t8)?,
    ))
}

/// Builds the full feature vector for one cleaned recording.
///
/// Any degenerate feature (zero-power denominator, unusable spectrum) fails
/// the whole subject; cohort-level extraction records the failure reason and
/// excludes the subject.
pub fn build_feature_vector(
    clean: &CleanRecording,
    config: &FeatureConfig,
) -> Result<FeatureVector, FeatureError> {
    let rate = clean.sample_rate_hz();
    let mut entries = Vec::new();
    let mut alpha_by_channel: Vec<(String, f64)> = Vec::new();
    let mut beta_by_channel: Vec<(String, f64)> = Vec::new();

    for ch in &clean.recording.channels {
        let psd = welch_psd(&ch.samples, rate, config.window_len, config.overlap_frac).map_err(
            |source| FeatureError::Spectral {
                name: format!("psd_{}", ch.name),
                source,
            },
        )?;
        let powers = all_band_powers(&psd).map_err(|source| FeatureError::Spectral {
            name: format!("bands_{}", ch.name),
            source,
        })?;
        for band in Band::ALL {
            entries.push((format!("{}_{}", band.name(), ch.name), powers[&band]));
        }
        let rg = relative_gamma(&powers, config.rg_direction).map_err(|source| {
            FeatureError::Spectral {
                name: format!("RG_{}", ch.name),
                source,
            }
        })?;
        entries.push((format!("RG_{}", ch.name), rg));
        alpha_by_channel.push((ch.name.clone(), powers[&Band::Alpha]));
        beta_by_channel.push((ch.name.clone(), powers[&Band::Beta]));
    }

    let power = |list: &[(String, f64)], name: &str| -> Result<f64, FeatureError> {
        list.iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| FeatureError::MissingChannel(name.to_string()))
    };

    let af = frontal_alpha_asymmetry(
        power(&alpha_by_channel, FRONTAL_LEFT)?,
        power(&alpha_by_channel, FRONTAL_RIGHT)?,
    )?;
    let at = temporal_alpha_asymmetry(
        power(&alpha_by_channel, TEMPORAL_LEFT)?,
        power(&alpha_by_channel, TEMPORAL_RIGHT)?,
    )?;
    let (bf, bt) = beta_asymmetries(
        power(&beta_by_channel, FRONTAL_LEFT)?,
        power(&beta_by_channel, FRONTAL_RIGHT)?,
        power(&beta_by_channel, TEMPORAL_LEFT)?,
        power(&beta_by_channel, TEMPORAL_RIGHT)?,
    )?;

    entries.push(("alpha_frontal".into(), af));
    entries.push(("alpha_temporal".into(), at));
    entries.push(("alpha_asym".into(), alpha_asymmetry(af, at)));
    entries.push(("beta_frontal".into(), bf));
    entries.push(("beta_temporal".into(), bt));

    Ok(FeatureVector::new(clean.subject_id(), entries))
}

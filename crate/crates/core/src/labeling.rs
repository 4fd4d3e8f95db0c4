//! Stress/control labelling.
//!
//! Two methods are supported:
//!
//! * **PSS thresholding** — the ten PSS-10 item responses (0..=4 each) are
//!   summed to a 0..=40 total; the cohort mean μ and standard deviation σ
//!   define a neutral band μ ± σ/2. Totals strictly below the band are
//!   control, strictly above are stress, and anything inside the band
//!   (boundaries included) is excluded as neutral.
//! * **Expert evaluation** — labels come directly from the manifest;
//!   subjects without one are excluded as unlabeled.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;
use crate::ingest::{ExpertLabel, SubjectManifest};

#[derive(Debug, Error)]
pub enum LabelingError {
    #[error("need at least 2 PSS scores to compute thresholds, got {0}")]
    InsufficientCohort(usize),
}

/// Binary class label. Stress is the positive class throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Control,
    Stress,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Stress => "stress",
            Label::Control => "control",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMethod {
    PssThreshold,
    Expert,
}

impl LabelMethod {
    pub fn name(self) -> &'static str {
        match self {
            LabelMethod::PssThreshold => "pss_threshold",
            LabelMethod::Expert => "expert",
        }
    }
}

/// Why a subject was left out of the labeled dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    NeutralBand,
    Unlabeled,
    InvalidFeatures,
}

impl ExclusionReason {
    pub fn name(self) -> &'static str {
        match self {
            ExclusionReason::NeutralBand => "neutral_band",
            ExclusionReason::Unlabeled => "unlabeled",
            ExclusionReason::InvalidFeatures => "invalid_features",
        }
    }
}

/// Labelling outcome for one subject, before features are attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelOutcome {
    Labeled(Label),
    Excluded(ExclusionReason),
}

/// A subject's summed PSS-10 score.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PssScore {
    pub subject_id: String,
    pub total: u8,
}

/// Sums the ten item responses. Range validation happens at ingest.
pub fn score_pss(items: &[u8; 10]) -> u8 {
    items.iter().sum()
}

/// Which standard-deviation denominator the threshold uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdConvention {
    /// n − 1 denominator (default; psychometric convention).
    #[default]
    Sample,
    /// n denominator.
    Population,
}

/// The neutral band μ ± σ/2.
///
/// Stored as the center and half-width so that the band is symmetric by
/// construction; `t_low`/`t_high` are derived views.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PssThresholds {
    pub mean: f64,
    pub half_band: f64,
    pub sd_convention: SdConvention,
}

impl PssThresholds {
    pub fn t_low(&self) -> f64 {
        self.mean - self.half_band
    }

    pub fn t_high(&self) -> f64 {
        self.mean + self.half_band
    }

    fn classify(&self, total: u8) -> LabelOutcome {
        let dev = total as f64 - self.mean;
        if dev < -self.half_band {
            LabelOutcome::Labeled(Label::Control)
        } else if dev > self.half_band {
            LabelOutcome::Labeled(Label::Stress)
        } else {
            LabelOutcome::Excluded(ExclusionReason::NeutralBand)
        }
    }
}

/// Thresholds directly from cohort moments: T = μ ± σ/2.
pub fn thresholds_from_moments(mu: f64, sigma: f64, sd_convention: SdConvention) -> PssThresholds {
    PssThresholds {
        mean: mu,
        half_band: sigma / 2.0,
        sd_convention,
    }
}

/// Computes the PSS thresholds from a cohort of scores.
pub fn pss_thresholds(
    scores: &[PssScore],
    sd_convention: SdConvention,
) -> Result<PssThresholds, LabelingError> {
    let n = scores.len();
    if n < 2 {
        return Err(LabelingError::InsufficientCohort(n));
    }
    let totals: Vec<f64> = scores.iter().map(|s| s.total as f64).collect();
    let mu = totals.iter().sum::<f64>() / n as f64;
    let ss: f64 = totals.iter().map(|t| (t - mu) * (t - mu)).sum();
    let denom = match sd_convention {
        SdConvention::Sample => (n - 1) as f64,
        SdConvention::Population => n as f64,
    };
    Ok(thresholds_from_moments(
        mu,
        (ss / denom).sqrt(),
        sd_convention,
    ))
}

/// Partitions the cohort by PSS total: below the band → control, above →
/// stress, inside (inclusive) → neutral. Output order follows the input.
pub fn label_by_pss(
    scores: &[PssScore],
    thresholds: &PssThresholds,
) -> Vec<(String, LabelOutcome)> {
    scores
        .iter()
        .map(|s| (s.subject_id.clone(), thresholds.classify(s.total)))
        .collect()
}

/// Takes labels straight from the manifest's expert field.
pub fn label_by_expert(manifest: &SubjectManifest) -> Vec<(String, LabelOutcome)> {
    manifest
        .entries
        .iter()
        .map(|e| {
            let outcome = match e.expert_label {
                ExpertLabel::Stress => LabelOutcome::Labeled(Label::Stress),
                ExpertLabel::Control => LabelOutcome::Labeled(Label::Control),
                ExpertLabel::Unlabeled => LabelOutcome::Excluded(ExclusionReason::Unlabeled),
            };
            (e.subject_id.clone(), outcome)
        })
        .collect()
}

/// One row of the labeled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub subject_id: String,
    pub features: FeatureVector,
    pub label: Label,
}

/// Feature rows with labels, plus the subjects that were excluded and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub method: LabelMethod,
    pub rows: Vec<DatasetRow>,
    pub excluded: Vec<(String, ExclusionReason)>,
}

impl LabeledDataset {
    pub fn class_count(&self, label: Label) -> usize {
        self.rows.iter().filter(|r| r.label == label).count()
    }

    pub fn subject_count(&self) -> usize {
        self.rows.len() + self.excluded.len()
    }
}

/// Joins labelling outcomes with extracted features.
///
/// Subjects whose feature extraction failed are excluded with
/// `invalid_features`, which takes precedence over a label.
pub fn assemble_dataset(
    method: LabelMethod,
    outcomes: &[(String, LabelOutcome)],
    features: &[FeatureVector],
) -> LabeledDataset {
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (subject_id, outcome) in outcomes {
        let fv = features.iter().find(|f| &f.subject_id == subject_id);
        match (outcome, fv) {
            (LabelOutcome::Labeled(label), Some(fv)) => rows.push(DatasetRow {
                subject_id: subject_id.clone(),
                features: fv.clone(),
                label: *label,
            }),
            (LabelOutcome::Labeled(_), None) => {
                excluded.push((subject_id.clone(), ExclusionReason::InvalidFeatures));
            }
            (LabelOutcome::Excluded(reason), _) => excluded.push((subject_id.clone(), *reason)),
        }
    }
    LabeledDataset {
        method,
        rows,
        excluded,
    }
}

//! Run configuration: every pipeline knob with a documented default.
//!
//! The fully resolved configuration is written into the artifact directory
//! (`run_config.json`, also embedded in `evaluation_report.json`), so any
//! run can be reproduced bitwise by feeding that file back via `--config`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use eegstress::classify::ClassifierKind;
use eegstress::labeling::{LabelMethod, SdConvention};
use eegstress::selection::TTestVariant;
use eegstress::spectral::RgDirection;
use eegstress::synth::CohortSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Directory with `manifest.json` and recording CSVs. When absent the
    /// cohort is synthesized in memory from `synth`.
    pub data_dir: Option<PathBuf>,
    /// Synthetic cohort parameters used when `data_dir` is not set.
    pub synth: CohortSpec,
    /// Labelling method driving selection and evaluation.
    pub method: LabelMethod,
    /// Significance level for feature selection.
    pub alpha_level: f64,
    pub t_test: TTestVariant,
    pub sd_convention: SdConvention,
    pub rg_direction: RgDirection,
    pub window_len: usize,
    pub overlap_frac: f64,
    /// Channel list and order expected in recordings.
    pub montage: Vec<String>,
    /// Declared sample rate; recordings must agree within 1%.
    pub sample_rate_hz: Option<f64>,
    pub classifiers: Vec<ClassifierKind>,
    /// Explicit feature sets to evaluate. When absent, all non-empty
    /// combinations of the (up to three most significant) selected features
    /// are used.
    pub feature_sets: Option<Vec<Vec<String>>>,
    pub fold_count: usize,
    pub stratified: bool,
    /// Seed for the fold plan.
    pub cv_seed: u64,
    /// Seed for classifier training.
    pub train_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_dir: None,
            synth: CohortSpec::default(),
            method: LabelMethod::Expert,
            alpha_level: 0.05,
            t_test: TTestVariant::default(),
            sd_convention: SdConvention::default(),
            rg_direction: RgDirection::default(),
            window_len: 128,
            overlap_frac: 0.5,
            montage: eegstress::ingest::DEFAULT_MONTAGE
                .iter()
                .map(|s| s.to_string())
                .collect(),
            sample_rate_hz: None,
            classifiers: ClassifierKind::ALL.to_vec(),
            feature_sets: None,
            fold_count: 10,
            stratified: true,
            cv_seed: 7,
            train_seed: 13,
        }
    }
}

impl RunConfig {
    pub fn ingest_config(&self) -> eegstress::ingest::IngestConfig {
        eegstress::ingest::IngestConfig {
            montage: self.montage.clone(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    pub fn feature_config(&self) -> eegstress::features::FeatureConfig {
        eegstress::features::FeatureConfig {
            window_len: self.window_len,
            overlap_frac: self.overlap_frac,
            rg_direction: self.rg_direction,
        }
    }
}

/// Parses `"a,b;c"`-style feature-set lists: sets split on ';', features on
/// ','.
pub fn parse_feature_sets(raw: &str) -> Result<Vec<Vec<String>>, String> {
    let mut sets = Vec::new();
    for chunk in raw.split(';') {
        let set: Vec<String> = chunk
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        if set.is_empty() {
            return Err(format!("empty feature set in {raw:?}"));
        }
        sets.push(set);
    }
    if sets.is_empty() {
        return Err("no feature sets given".into());
    }
    Ok(sets)
}

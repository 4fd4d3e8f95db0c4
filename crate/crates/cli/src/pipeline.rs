//! Stage orchestration shared by the subcommands.
//!
//! Errors carry the process exit code: 2 for validation problems (bad
//! inputs, impossible configuration), 3 for numerical failures (degenerate
//! features, non-convergence).

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use eegstress::classify::ClassifyError;
use eegstress::evaluate::{
    cross_validate, make_folds, DesignMatrix, EvaluateError, EvaluationReport,
};
use eegstress::features::{build_feature_vector, FeatureVector};
use eegstress::ingest::{load_manifest, load_recording, Recording, SubjectManifest};
use eegstress::labeling::{
    assemble_dataset, label_by_expert, label_by_pss, pss_thresholds, score_pss, Label, LabelMethod,
    LabelOutcome, LabeledDataset, PssScore, PssThresholds,
};
use eegstress::selection::{select_features, TTestResult};
use eegstress::synth::generate_cohort;

use crate::artifacts::BoxplotRow;
use crate::config::RunConfig;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn validation(message: impl fmt::Display) -> Self {
        CliError {
            exit_code: EXIT_VALIDATION,
            message: message.to_string(),
        }
    }

    pub fn numerical(message: impl fmt::Display) -> Self {
        CliError {
            exit_code: EXIT_NUMERICAL,
            message: message.to_string(),
        }
    }

    pub fn in_stage(self, stage: &str) -> Self {
        CliError {
            exit_code: self.exit_code,
            message: format!("{stage}: {}", self.message),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

impl From<eegstress::ingest::IngestError> for CliError {
    fn from(e: eegstress::ingest::IngestError) -> Self {
        CliError::validation(e)
    }
}

impl From<eegstress::synth::SynthError> for CliError {
    fn from(e: eegstress::synth::SynthError) -> Self {
        CliError::validation(e)
    }
}

impl From<eegstress::labeling::LabelingError> for CliError {
    fn from(e: eegstress::labeling::LabelingError) -> Self {
        CliError::validation(e)
    }
}

impl From<eegstress::selection::SelectionError> for CliError {
    fn from(e: eegstress::selection::SelectionError) -> Self {
        CliError::validation(e)
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::NonFiniteFeature { .. } | ClassifyError::NoConvergence { .. } => {
                CliError::numerical(e)
            }
            _ => CliError::validation(e),
        }
    }
}

impl From<EvaluateError> for CliError {
    fn from(e: EvaluateError) -> Self {
        match e {
            EvaluateError::Training { fold, source } => {
                let inner: CliError = source.into();
                CliError {
                    exit_code: inner.exit_code,
                    message: format!("fold {fold}: {}", inner.message),
                }
            }
            other => CliError::validation(other),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::validation(format!("{e:#}"))
    }
}

/// Recordings plus manifest, from disk or the synthetic generator.
pub fn load_cohort(config: &RunConfig) -> CliResult<(Vec<Recording>, SubjectManifest)> {
    match &config.data_dir {
        Some(dir) => load_cohort_from_dir(dir, config),
        None => Ok(generate_cohort(&config.synth)?),
    }
}

pub fn load_cohort_from_dir(
    dir: &Path,
    config: &RunConfig,
) -> CliResult<(Vec<Recording>, SubjectManifest)> {
    let manifest = load_manifest(&dir.join("manifest.json"))?;
    let ingest = config.ingest_config();
    let mut recordings = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let path = dir.join(&entry.recording_path);
        let mut rec = load_recording(&path, &ingest)
            .map_err(|e| CliError::from(e).in_stage(&format!("ingest {}", entry.subject_id)))?;
        rec.subject_id = entry.subject_id.clone();
        recordings.push(rec);
    }
    Ok((recordings, manifest))
}

/// Offset removal plus feature extraction for the whole cohort.
///
/// Subjects whose extraction fails are reported, not fatal; callers decide
/// whether an empty result is an error.
pub fn extract_features(
    recordings: &[Recording],
    config: &RunConfig,
) -> (Vec<FeatureVector>, Vec<(String, String)>) {
    let feature_config = config.feature_config();
    let mut features = Vec::with_capacity(recordings.len());
    let mut failures = Vec::new();
    for rec in recordings {
        let clean = eegstress::preprocess::remove_baseline_offset(rec);
        match build_feature_vector(&clean, &feature_config) {
            Ok(fv) => features.push(fv),
            Err(e) => failures.push((rec.subject_id.clone(), e.to_string())),
        }
    }
    (features, failures)
}

/// Summed PSS scores for every subject that has items.
pub fn pss_scores(manifest: &SubjectManifest) -> Vec<PssScore> {
    manifest
        .entries
        .iter()
        .filter_map(|e| {
            e.pss_items.map(|items| PssScore {
                subject_id: e.subject_id.clone(),
                total: score_pss(&items),
            })
        })
        .collect()
}

/// Labelling outcomes for the requested method, plus the PSS thresholds if
/// they were computed.
/// Per-subject labelling outcomes plus the PSS thresholds when computed.
pub type LabellingOutput = (Vec<(String, LabelOutcome)>, Option<PssThresholds>);

pub fn label_outcomes(
    manifest: &SubjectManifest,
    method: LabelMethod,
    config: &RunConfig,
) -> CliResult<LabellingOutput> {
    match method {
        LabelMethod::Expert => Ok((label_by_expert(manifest), None)),
        LabelMethod::PssThreshold => {
            let scores = pss_scores(manifest);
            if scores.len() < 2 {
                return Err(CliError::validation(format!(
                    "PSS labelling needs at least 2 subjects with pss_items, found {}",
                    scores.len()
                )));
            }
            let thresholds = pss_thresholds(&scores, config.sd_convention)?;
            let mut outcomes = label_by_pss(&scores, &thresholds);
            // Subjects without PSS items cannot be placed by this method.
            let scored: BTreeSet<&str> = scores.iter().map(|s| s.subject_id.as_str()).collect();
            for entry in &manifest.entries {
                if !scored.contains(entry.subject_id.as_str()) {
                    outcomes.push((
                        entry.subject_id.clone(),
                        LabelOutcome::Excluded(eegstress::labeling::ExclusionReason::Unlabeled),
                    ));
                }
            }
            Ok((outcomes, Some(thresholds)))
        }
    }
}

/// All non-empty combinations of the given features, ordered by size then
/// by input order (singletons first, then pairs, then the full set).
pub fn feature_combinations(features: &[String]) -> Vec<Vec<String>> {
    let n = features.len();
    let mut sets: Vec<Vec<String>> = Vec::new();
    for mask in 1u32..(1 << n) {
        let set: Vec<String> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| features[i].clone())
            .collect();
        sets.push(set);
    }
    sets.sort_by_key(|s| s.len());
    sets
}

/// Resolves the feature sets to evaluate: explicit configuration wins;
/// otherwise combinations of the up-to-three most significant selected
/// features; if nothing was selected, the single lowest-p feature.
pub fn resolve_feature_sets(
    config: &RunConfig,
    selected: &[String],
    table: &[TTestResult],
) -> Vec<Vec<String>> {
    if let Some(sets) = &config.feature_sets {
        return sets.clone();
    }
    if selected.is_empty() {
        let mut best: Option<&TTestResult> = None;
        for row in table {
            if best.is_none_or(|b| row.p_value < b.p_value) {
                best = Some(row);
            }
        }
        return match best {
            Some(row) => vec![vec![row.feature_name.clone()]],
            None => Vec::new(),
        };
    }
    let basis: Vec<String> = selected.iter().take(3).cloned().collect();
    feature_combinations(&basis)
}

/// Everything `run` produces, ready for the artifact writers.
pub struct RunOutput {
    pub features: Vec<FeatureVector>,
    pub extraction_failures: Vec<(String, String)>,
    pub outcomes: Vec<(String, LabelOutcome)>,
    pub thresholds: Option<PssThresholds>,
    pub scores: Vec<PssScore>,
    pub dataset: LabeledDataset,
    pub selected: Vec<String>,
    pub ttest_table: Vec<TTestResult>,
    pub feature_sets: Vec<Vec<String>>,
    pub evaluations: Vec<EvaluationReport>,
    pub boxplots: Vec<BoxplotRow>,
}

pub fn run_pipeline(config: &RunConfig) -> CliResult<RunOutput> {
    let (recordings, manifest) = load_cohort(config).map_err(|e| e.in_stage("load"))?;

    let (features, extraction_failures) = extract_features(&recordings, config);
    if features.is_empty() {
        let detail = extraction_failures
            .iter()
            .map(|(id, msg)| format!("{id}: {msg}"))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(CliError::numerical(format!(
            "feature extraction failed for every subject ({detail})"
        )));
    }

    let scores = pss_scores(&manifest);
    let (outcomes, mut thresholds) =
        label_outcomes(&manifest, config.method, config).map_err(|e| e.in_stage("label"))?;
    if thresholds.is_none() && scores.len() >= 2 {
        // Histogram classes still come from the PSS rule even when labelling
        // itself is expert-driven.
        thresholds = Some(pss_thresholds(&scores, config.sd_convention)?);
    }

    let dataset = assemble_dataset(config.method, &outcomes, &features);
    if dataset.rows.is_empty() {
        return Err(CliError::validation(format!(
            "labelling method {} produced an empty dataset",
            config.method.name()
        )));
    }

    let (selected, ttest_table) = select_features(&dataset, config.alpha_level, config.t_test)
        .map_err(|e| CliError::from(e).in_stage("select"))?;

    let feature_sets = resolve_feature_sets(config, &selected, &ttest_table);
    if feature_sets.is_empty() {
        return Err(CliError::validation("no feature sets to evaluate"));
    }

    let plan = make_folds(
        &dataset,
        config.fold_count,
        config.cv_seed,
        config.stratified,
    )
    .map_err(|e| CliError::from(e).in_stage("evaluate"))?;
    let mut evaluations = Vec::new();
    for set in &feature_sets {
        let matrix = DesignMatrix::from_dataset(&dataset, set)
            .map_err(|e| CliError::from(e).in_stage("evaluate"))?;
        for kind in &config.classifiers {
            let spec = eegstress::classify::ClassifierSpec::with_defaults(*kind, config.train_seed);
            let report = cross_validate(&spec, &matrix, &plan)
                .map_err(|e| CliError::from(e).in_stage("evaluate"))?;
            evaluations.push(report);
        }
    }

    let boxplots = boxplot_rows(&manifest, &features, config)?;

    Ok(RunOutput {
        features,
        extraction_failures,
        outcomes,
        thresholds,
        scores,
        dataset,
        selected,
        ttest_table,
        feature_sets,
        evaluations,
        boxplots,
    })
}

/// Box-plot statistics for every feature, for each labelling method that is
/// computable on this manifest, split by group.
pub fn boxplot_rows(
    manifest: &SubjectManifest,
    features: &[FeatureVector],
    config: &RunConfig,
) -> CliResult<Vec<BoxplotRow>> {
    let mut rows = Vec::new();
    let methods = [LabelMethod::PssThreshold, LabelMethod::Expert];
    for method in methods {
        let outcomes = match label_outcomes(manifest, method, config) {
            Ok((outcomes, _)) => outcomes,
            // A manifest without PSS items simply has no PSS box plots.
            Err(_) => continue,
        };
        let dataset = assemble_dataset(method, &outcomes, features);
        if dataset.rows.is_empty() {
            continue;
        }
        let names: Vec<String> = dataset.rows[0].features.names().map(String::from).collect();
        for group in [Label::Stress, Label::Control] {
            for name in &names {
                let values: Vec<f64> = dataset
                    .rows
                    .iter()
                    .filter(|r| r.label == group)
                    .filter_map(|r| r.features.get(name))
                    .collect();
                if let Some(stats) = eegstress::report::boxplot_stats(&values) {
                    rows.push(BoxplotRow {
                        method,
                        group,
                        feature: name.clone(),
                        stats,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Writes `content` files atomically: everything goes into a staging
/// directory next to `out_dir`, which is renamed into place only when all
/// writes succeeded.
pub fn write_artifacts_atomically(
    out_dir: &PathBuf,
    force: bool,
    files: &[(&str, String)],
) -> CliResult<()> {
    if out_dir.exists() && !force {
        return Err(CliError::validation(format!(
            "output directory {} already exists (use --force to replace)",
            out_dir.display()
        )));
    }
    let parent = out_dir
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&parent)
        .map_err(|e| CliError::validation(format!("creating {}: {e}", parent.display())))?;
    let staging = parent.join(format!(
        ".{}.staging-{}",
        out_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into()),
        std::process::id()
    ));
    if staging.exists() {
        std::fs::remove_dir_all(&staging)
            .map_err(|e| CliError::validation(format!("clearing staging dir: {e}")))?;
    }
    std::fs::create_dir_all(&staging)
        .map_err(|e| CliError::validation(format!("creating staging dir: {e}")))?;

    let result = (|| -> CliResult<()> {
        for (name, content) in files {
            std::fs::write(staging.join(name), content)
                .map_err(|e| CliError::validation(format!("writing {name}: {e}")))?;
        }
        if out_dir.exists() {
            std::fs::remove_dir_all(out_dir).map_err(|e| {
                CliError::validation(format!("replacing {}: {e}", out_dir.display()))
            })?;
        }
        std::fs::rename(&staging, out_dir)
            .map_err(|e| CliError::validation(format!("publishing artifacts: {e}")))?;
        Ok(())
    })();
    if result.is_err() {
        let _ = std::fs::remove_dir_all(&staging);
    }
    result
}

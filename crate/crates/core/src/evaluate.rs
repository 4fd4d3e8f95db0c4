//! Cross-validation harness and performance metrics.
//!
//! Folds are stratified by default: with ten folds over a 20-subject cohort,
//! plain random splitting can produce single-class training folds, so each
//! class is dealt round-robin from a seeded shuffle instead. Metrics are
//! computed once on the predictions pooled across folds (per-fold metrics on
//! two subjects would be degenerate), sorted by subject id so that results
//! do not depend on fold numbering or dataset order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{train, ClassifierSpec, ClassifyError};
use crate::labeling::{Label, LabeledDataset};

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("dataset of {size} subjects cannot fill {folds} folds")]
    TooFewSubjects { size: usize, folds: usize },
    #[error("{label:?} class has {count} subjects, fewer than {folds} folds; reduce --folds")]
    TooFewPerClass {
        label: Label,
        count: usize,
        folds: usize,
    },
    #[error("prediction/truth length mismatch: {preds} vs {truths}")]
    LengthMismatch { preds: usize, truths: usize },
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("feature {0} missing from dataset rows")]
    UnknownFeature(String),
    #[error("fold {fold}: {source}")]
    Training { fold: usize, source: ClassifyError },
    #[error("fold count must be ≥ 2, got {0}")]
    BadFoldCount(usize),
}

/// Assignment of every subject to a test fold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub fold_count: usize,
    /// subject id → fold index, sorted by subject id.
    pub assignments: BTreeMap<String, usize>,
    pub seed: u64,
    pub stratified: bool,
}

impl FoldPlan {
    pub fn fold_of(&self, subject_id: &str) -> Option<usize> {
        self.assignments.get(subject_id).copied()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.fold_count];
        for &f in self.assignments.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Builds a deterministic fold plan from the seed.
///
/// Subject ids are sorted before shuffling, so the plan depends only on the
/// id set, the seed and the flags — not on dataset row order.
pub fn make_folds(
    dataset: &LabeledDataset,
    fold_count: usize,
    seed: u64,
    stratified: bool,
) -> Result<FoldPlan, EvaluateError> {
    if fold_count < 2 {
        return Err(EvaluateError::BadFoldCount(fold_count));
    }
    let size = dataset.rows.len();
    if size < fold_count {
        return Err(EvaluateError::TooFewSubjects {
            size,
            folds: fold_count,
        });
    }

    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let mut assignments = BTreeMap::new();
    if stratified {
        for label in [Label::Stress, Label::Control] {
            let count = dataset.class_count(label);
            if count < fold_count {
                return Err(EvaluateError::TooFewPerClass {
                    label,
                    count,
                    folds: fold_count,
                });
            }
        }
        // Deal each class round-robin with a cursor that persists across
        // classes: global and per-class fold sizes both stay within one.
        let mut cursor = 0usize;
        for label in [Label::Stress, Label::Control] {
            let mut ids: Vec<&str> = dataset
                .rows
                .iter()
                .filter(|r| r.label == label)
                .map(|r| r.subject_id.as_str())
                .collect();
            ids.sort_unstable();
            ids.shuffle(&mut rng);
            for id in ids {
                assignments.insert(id.to_string(), cursor);
                cursor = (cursor + 1) % fold_count;
            }
        }
    } else {
        let mut ids: Vec<&str> = dataset.rows.iter().map(|r| r.subject_id.as_str()).collect();
        ids.sort_unstable();
        ids.shuffle(&mut rng);
        for (i, id) in ids.iter().enumerate() {
            assignments.insert(id.to_string(), i % fold_count);
        }
    }

    Ok(FoldPlan {
        fold_count,
        assignments,
        seed,
        stratified,
    })
}

/// Feature matrix view of a labeled dataset, restricted to named features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub feature_names: Vec<String>,
    pub subject_ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

impl DesignMatrix {
    pub fn from_dataset(
        dataset: &LabeledDataset,
        feature_names: &[String],
    ) -> Result<Self, EvaluateError> {
        let mut rows = Vec::with_capacity(dataset.rows.len());
        let mut subject_ids = Vec::with_capacity(dataset.rows.len());
        let mut labels = Vec::with_capacity(dataset.rows.len());
        for row in &dataset.rows {
            let values: Result<Vec<f64>, EvaluateError> = feature_names
                .iter()
                .map(|name| {
                    row.features
                        .get(name)
                        .ok_or_else(|| EvaluateError::UnknownFeature(name.clone()))
                })
                .collect();
            rows.push(values?);
            subject_ids.push(row.subject_id.clone());
            labels.push(row.label);
        }
        Ok(DesignMatrix {
            feature_names: feature_names.to_vec(),
            subject_ids,
            rows,
            labels,
        })
    }
}

/// One pooled test prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub subject_id: String,
    pub fold: usize,
    pub true_label: Label,
    pub pred_label: Label,
    pub p_stress: f64,
}

/// Stress-positive binary confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_stress: usize,
    pub false_stress: usize,
    pub true_control: usize,
    pub false_control: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_stress + self.false_stress + self.true_control + self.false_control
    }
}

/// The five headline metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Percentage of correctly classified instances.
    pub accuracy_pct: f64,
    /// Chance-corrected agreement; 0 is chance level, 1 perfect.
    pub kappa: f64,
    /// Support-weighted mean of the per-class F1 scores.
    pub f_measure: f64,
    /// Mean absolute probability error over both class positions.
    pub mae: f64,
    /// Root of the mean squared probability error (same positions).
    pub rmae: f64,
    /// Set when expected agreement is 1 and kappa is reported as 0.
    pub kappa_degenerate: bool,
}

/// Cross-validation outcome for one classifier on one feature set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub classifier: ClassifierSpec,
    pub feature_names: Vec<String>,
    pub fold_count: usize,
    pub plan_seed: u64,
    pub stratified: bool,
    pub metrics: Metrics,
    pub confusion: ConfusionMatrix,
    /// Recall of (control, stress); lets per-class behaviour be inspected.
    pub per_class_recall: [f64; 2],
    /// Pooled predictions sorted by subject id.
    pub predictions: Vec<PredictionRecord>,
}

/// Runs k-fold cross-validation: train on each fold's complement, predict
/// the fold, pool every test prediction, compute metrics once.
pub fn cross_validate(
    spec: &ClassifierSpec,
    matrix: &DesignMatrix,
    plan: &FoldPlan,
) -> Result<EvaluationReport, EvaluateError> {
    let predictions = run_folds(matrix, plan, |fold, train_x, train_y| {
        let model = train(spec, train_x, train_y)
            .map_err(|source| EvaluateError::Training { fold, source })?;
        Ok(Box::new(move |x: &[f64]| {
            let (label, p) = model.predict(x).expect("arity fixed by design matrix");
            (label, p)
        }))
    })?;

    let pred_labels: Vec<Label> = predictions.iter().map(|p| p.pred_label).collect();
    let pred_probs: Vec<f64> = predictions.iter().map(|p| p.p_stress).collect();
    let true_labels: Vec<Label> = predictions.iter().map(|p| p.true_label).collect();
    let m = metrics(&pred_labels, &pred_probs, &true_labels)?;
    let confusion = confusion_matrix(&pred_labels, &true_labels);

    let recall = |tp: usize, fn_: usize| {
        if tp + fn_ == 0 {
            0.0
        } else {
            tp as f64 / (tp + fn_) as f64
        }
    };
    Ok(EvaluationReport {
        classifier: spec.clone(),
        feature_names: matrix.feature_names.clone(),
        fold_count: plan.fold_count,
        plan_seed: plan.seed,
        stratified: plan.stratified,
        metrics: m,
        confusion,
        per_class_recall: [
            recall(confusion.true_control, confusion.false_stress),
            recall(confusion.true_stress, confusion.false_control),
        ],
        predictions,
    })
}

/// Shared fold loop, generic over the trainer so tests can inject synthetic
/// predictors (constant, oracle) and probe metric semantics end to end.
pub(crate) fn run_folds<F>(
    matrix: &DesignMatrix,
    plan: &FoldPlan,
    mut trainer: F,
) -> Result<Vec<PredictionRecord>, EvaluateError>
where
    F: FnMut(
        usize,
        &[Vec<f64>],
        &[Label],
    ) -> Result<Box<dyn Fn(&[f64]) -> (Label, f64)>, EvaluateError>,
{
    let mut predictions = Vec::with_capacity(matrix.rows.len());
    for fold in 0..plan.fold_count {
        let mut train_x = Vec::new();
        let mut train_y = Vec::new();
        let mut test_idx = Vec::new();
        for (i, id) in matrix.subject_ids.iter().enumerate() {
            match plan.fold_of(id) {
                Some(f) if f == fold => test_idx.push(i),
                Some(_) => {
                    train_x.push(matrix.rows[i].clone());
                    train_y.push(matrix.labels[i]);
                }
                None => {}
            }
        }
        if test_idx.is_empty() {
            continue;
        }
        let predictor = trainer(fold, &train_x, &train_y)?;
        for i in test_idx {
            let (pred_label, p_stress) = predictor(&matrix.rows[i]);
            predictions.push(PredictionRecord {
                subject_id: matrix.subject_ids[i].clone(),
                fold,
                true_label: matrix.labels[i],
                pred_label,
                p_stress,
            });
        }
    }
    // Pool in subject-id order: metric sums become independent of fold
    // numbering and dataset order.
    predictions.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    Ok(predictions)
}

fn confusion_matrix(pred: &[Label], truth: &[Label]) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (t, p) {
            (Label::Stress, Label::Stress) => cm.true_stress += 1,
            (Label::Stress, Label::Control) => cm.false_control += 1,
            (Label::Control, Label::Stress) => cm.false_stress += 1,
            (Label::Control, Label::Control) => cm.true_control += 1,
        }
    }
    cm
}

/// Computes the five metrics from pooled predictions.
///
/// MAE and RMAE follow the probability-error convention for nominal
/// classes: each instance contributes |indicator − p| at both class
/// positions, which for two classes collapses to |y − p_stress| with
/// y ∈ {0, 1}.
pub fn metrics(
    pred_labels: &[Label],
    pred_probs: &[f64],
    true_labels: &[Label],
) -> Result<Metrics, EvaluateError> {
    let n = true_labels.len();
    if pred_labels.len() != n || pred_probs.len() != n || n == 0 {
        return Err(EvaluateError::LengthMismatch {
            preds: pred_labels.len().min(pred_probs.len()),
            truths: n,
        });
    }
    for &p in pred_probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(EvaluateError::BadProbability(p));
        }
    }

    let cm = confusion_matrix(pred_labels, true_labels);
    let n_f = n as f64;
    let p_observed = (cm.true_stress + cm.true_control) as f64 / n_f;
    let accuracy_pct = 100.0 * p_observed;

    // Expected agreement from the marginal frequencies.
    let true_stress_frac = (cm.true_stress + cm.false_control) as f64 / n_f;
    let pred_stress_frac = (cm.true_stress + cm.false_stress) as f64 / n_f;
    let p_expected =
        pred_stress_frac * true_stress_frac + (1.0 - pred_stress_frac) * (1.0 - true_stress_frac);
    let (kappa, kappa_degenerate) = if p_expected >= 1.0 {
        (0.0, true)
    } else {
        ((p_observed - p_expected) / (1.0 - p_expected), false)
    };

    // Support-weighted F1 over both classes.
    let f1 = |tp: f64, fp: f64, fn_: f64| -> f64 {
        if 2.0 * tp + fp + fn_ == 0.0 {
            0.0
        } else {
            2.0 * tp / (2.0 * tp + fp + fn_)
        }
    };
    let f1_stress = f1(
        cm.true_stress as f64,
        cm.false_stress as f64,
        cm.false_control as f64,
    );
    let f1_control = f1(
        cm.true_control as f64,
        cm.false_control as f64,
        cm.false_stress as f64,
    );
    let support_stress = (cm.true_stress + cm.false_control) as f64 / n_f;
    let f_measure = support_stress * f1_stress + (1.0 - support_stress) * f1_control;

    let mut abs_err = 0.0;
    let mut sq_err = 0.0;
    for (&t, &p) in true_labels.iter().zip(pred_probs) {
        let y = match t {
            Label::Stress => 1.0,
            Label::Control => 0.0,
        };
        let e = (y - p).abs();
        abs_err += e;
        sq_err += e * e;
    }
    let mae = abs_err / n_f;
    let rmae = (sq_err / n_f).sqrt();

    Ok(Metrics {
        accuracy_pct,
        kappa,
        f_measure,
        mae,
        rmae,
        kappa_degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::ClassifierKind;
    use crate::features::FeatureVector;
    use crate::labeling::{DatasetRow, LabelMethod};

    fn dataset(n_stress: usize, n_control: usize) -> LabeledDataset {
        let mut rows = Vec::new();
        for i in 0..n_stress + n_control {
            let label = if i < n_stress {
                Label::Stress
            } else {
                Label::Control
            };
            let value = match label {
                Label::Stress => 1.0 + i as f64 * 0.01,
                Label::Control => -1.0 - i as f64 * 0.01,
            };
            rows.push(DatasetRow {
                subject_id: format!("S{i:02}"),
                features: FeatureVector::new(
                    format!("S{i:02}"),
                    vec![("alpha_asym".into(), value)],
                ),
                label,
            });
        }
        LabeledDataset {
            method: LabelMethod::Expert,
            rows,
            excluded: vec![],
        }
    }

    fn matrix(ds: &LabeledDataset) -> DesignMatrix {
        DesignMatrix::from_dataset(ds, &["alpha_asym".to_string()]).unwrap()
    }

    #[test]
    fn stratified_folds_have_one_of_each_class() {
        let ds = dataset(10, 10);
        let plan = make_folds(&ds, 10, 42, true).unwrap();
        assert_eq!(plan.fold_sizes(), vec![2; 10]);
        for fold in 0..10 {
            let members: Vec<&DatasetRow> = ds
                .rows
                .iter()
                .filter(|r| plan.fold_of(&r.subject_id) == Some(fold))
                .collect();
            assert_eq!(members.len(), 2);
            assert_eq!(
                members.iter().filter(|r| r.label == Label::Stress).count(),
                1,
                "fold {fold}"
            );
        }
    }

    #[test]
    fn same_seed_reproduces_plan() {
        let ds = dataset(10, 10);
        let a = make_folds(&ds, 10, 7, true).unwrap();
        let b = make_folds(&ds, 10, 7, true).unwrap();
        assert_eq!(a, b);
        let c = make_folds(&ds, 10, 8, true).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn every_subject_tested_exactly_once() {
        let ds = dataset(10, 10);
        for stratified in [true, false] {
            let plan = make_folds(&ds, 10, 3, stratified).unwrap();
            // Brute-force coverage count over all folds.
            let mut tested = BTreeMap::new();
            for fold in 0..plan.fold_count {
                for row in &ds.rows {
                    if plan.fold_of(&row.subject_id) == Some(fold) {
                        *tested.entry(row.subject_id.clone()).or_insert(0) += 1;
                    }
                }
            }
            assert_eq!(tested.len(), 20);
            assert!(tested.values().all(|&c| c == 1));
        }
    }

    #[test]
    fn stratified_unequal_classes_stay_within_one() {
        let ds = dataset(7, 5);
        let plan = make_folds(&ds, 4, 19, true).unwrap();
        let sizes = plan.fold_sizes();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for label in [Label::Stress, Label::Control] {
            let mut per_fold = vec![0usize; 4];
            for row in ds.rows.iter().filter(|r| r.label == label) {
                per_fold[plan.fold_of(&row.subject_id).unwrap()] += 1;
            }
            let max = per_fold.iter().max().unwrap();
            let min = per_fold.iter().min().unwrap();
            assert!(max - min <= 1, "{label:?}: {per_fold:?}");
        }
    }

    #[test]
    fn unstratified_fold_sizes_are_balanced() {
        let ds = dataset(13, 10);
        let plan = make_folds(&ds, 10, 11, false).unwrap();
        let sizes = plan.fold_sizes();
        let min = *sizes.iter().min().unwrap();
        let max = *sizes.iter().max().unwrap();
        assert!(max - min <= 1);
        assert_eq!(sizes.iter().sum::<usize>(), 23);
    }

    #[test]
    fn fold_validation_errors() {
        let ds = dataset(3, 3);
        assert!(matches!(
            make_folds(&ds, 10, 0, true),
            Err(EvaluateError::TooFewSubjects { .. })
        ));
        let ds = dataset(4, 12);
        assert!(matches!(
            make_folds(&ds, 8, 0, true),
            Err(EvaluateError::TooFewPerClass {
                label: Label::Stress,
                count: 4,
                folds: 8
            })
        ));
    }

    #[test]
    fn constant_predictor_scores_chance_level() {
        let ds = dataset(10, 10);
        let dm = matrix(&ds);
        let plan = make_folds(&ds, 10, 5, true).unwrap();
        let preds = run_folds(&dm, &plan, |_, _, _| {
            Ok(Box::new(|_: &[f64]| (Label::Control, 0.5)))
        })
        .unwrap();
        assert_eq!(preds.len(), 20);
        let m = metrics(
            &preds.iter().map(|p| p.pred_label).collect::<Vec<_>>(),
            &preds.iter().map(|p| p.p_stress).collect::<Vec<_>>(),
            &preds.iter().map(|p| p.true_label).collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(m.accuracy_pct, 50.0);
        assert_eq!(m.kappa, 0.0);
        assert!(!m.kappa_degenerate);
        assert_eq!(m.mae, 0.5);
        assert_eq!(m.rmae, 0.5);
    }

    #[test]
    fn oracle_predictor_scores_perfectly() {
        let ds = dataset(10, 10);
        let dm = matrix(&ds);
        let plan = make_folds(&ds, 10, 5, true).unwrap();
        // The single feature is positive exactly for stress rows.
        let preds = run_folds(&dm, &plan, |_, _, _| {
            Ok(Box::new(|x: &[f64]| {
                if x[0] > 0.0 {
                    (Label::Stress, 1.0)
                } else {
                    (Label::Control, 0.0)
                }
            }))
        })
        .unwrap();
        let m = metrics(
            &preds.iter().map(|p| p.pred_label).collect::<Vec<_>>(),
            &preds.iter().map(|p| p.p_stress).collect::<Vec<_>>(),
            &preds.iter().map(|p| p.true_label).collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(m.accuracy_pct, 100.0);
        assert_eq!(m.kappa, 1.0);
        assert_eq!(m.f_measure, 1.0);
        assert_eq!(m.mae, 0.0);
        assert_eq!(m.rmae, 0.0);
    }

    #[test]
    fn separable_dataset_cross_validates_cleanly() {
        let ds = dataset(10, 10);
        let dm = matrix(&ds);
        let plan = make_folds(&ds, 10, 5, true).unwrap();
        let spec = ClassifierSpec::with_defaults(ClassifierKind::Svm, 1);
        let report = cross_validate(&spec, &dm, &plan).unwrap();
        assert!(report.metrics.accuracy_pct >= 85.0);
        assert_eq!(report.confusion.total(), 20);
        assert_eq!(report.predictions.len(), 20);
    }

    /// Twenty constructed predictions with hand-computed metrics:
    /// TP=7 (p=0.8), FN=3 (p=0.4), TN=8 (p=0.1), FP=2 (p=0.7).
    #[test]
    fn hand_computed_twenty_prediction_metrics() {
        let mut pred = Vec::new();
        let mut probs = Vec::new();
        let mut truth = Vec::new();
        for _ in 0..7 {
            truth.push(Label::Stress);
            pred.push(Label::Stress);
            probs.push(0.8);
        }
        for _ in 0..3 {
            truth.push(Label::Stress);
            pred.push(Label::Control);
            probs.push(0.4);
        }
        for _ in 0..8 {
            truth.push(Label::Control);
            pred.push(Label::Control);
            probs.push(0.1);
        }
        for _ in 0..2 {
            truth.push(Label::Control);
            pred.push(Label::Stress);
            probs.push(0.7);
        }
        let m = metrics(&pred, &probs, &truth).unwrap();
        // accuracy = 15/20; p_e = (9/20)(10/20) + (11/20)(10/20) = 1/2;
        // kappa = (0.75 − 0.5)/(1 − 0.5) = 0.5.
        assert_eq!(m.accuracy_pct, 75.0);
        assert_eq!(m.kappa, 0.5);
        // F1_stress = 14/19, F1_control = 16/21, equal supports.
        let expected_f = 0.5 * (14.0 / 19.0) + 0.5 * (16.0 / 21.0);
        assert!((m.f_measure - expected_f).abs() < 1e-12);
        // MAE = (7·0.2 + 3·0.6 + 8·0.1 + 2·0.7)/20 = 0.27.
        assert!((m.mae - 0.27).abs() < 1e-12);
        // RMAE = √((7·0.04 + 3·0.36 + 8·0.01 + 2·0.49)/20) = √0.121.
        assert!((m.rmae - 0.121f64.sqrt()).abs() < 1e-12);
        assert!((m.rmae * m.rmae - 0.121).abs() < 1e-12);
    }

    #[test]
    fn degenerate_kappa_is_flagged() {
        let truth = vec![Label::Stress; 4];
        let pred = vec![Label::Stress; 4];
        let probs = vec![1.0; 4];
        let m = metrics(&pred, &probs, &truth).unwrap();
        assert_eq!(m.kappa, 0.0);
        assert!(m.kappa_degenerate);
        assert_eq!(m.accuracy_pct, 100.0);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(matches!(
            metrics(&[Label::Stress], &[0.5, 0.5], &[Label::Stress]),
            Err(EvaluateError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn fold_training_failure_aborts_with_context() {
        // 2 + 2 subjects over two stratified folds: every training
        // complement has a single example per class, which train() rejects.
        let ds = dataset(2, 2);
        let dm = matrix(&ds);
        let plan = make_folds(&ds, 2, 1, true).unwrap();
        let spec = ClassifierSpec::with_defaults(ClassifierKind::Svm, 0);
        let err = cross_validate(&spec, &dm, &plan).unwrap_err();
        match err {
            EvaluateError::Training { fold, source } => {
                assert_eq!(fold, 0);
                assert!(matches!(
                    source,
                    crate::classify::ClassifyError::TooFewExamples {
                        stress: 1,
                        control: 1
                    }
                ));
            }
            other => panic!("expected Training error, got {other:?}"),
        }
    }

    #[test]
    fn report_is_reproducible_bitwise() {
        let ds = dataset(10, 10);
        let dm = matrix(&ds);
        let plan = make_folds(&ds, 10, 9, true).unwrap();
        let spec = ClassifierSpec::with_defaults(ClassifierKind::Mlp, 4);
        let a = cross_validate(&spec, &dm, &plan).unwrap();
        let b = cross_validate(&spec, &dm, &plan).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn metrics_invariant_to_dataset_order_and_fold_relabeling() {
        let ds = dataset(10, 10);
        let dm = matrix(&ds);
        let plan = make_folds(&ds, 10, 2, true).unwrap();
        let spec = ClassifierSpec::with_defaults(ClassifierKind::Knn, 3);
        let base = cross_validate(&spec, &dm, &plan).unwrap();

        // Reverse dataset order: identical plan, identical pooled metrics.
        let mut reversed = ds.clone();
        reversed.rows.reverse();
        let dm_rev = matrix(&reversed);
        let rev = cross_validate(&spec, &dm_rev, &plan).unwrap();
        assert_eq!(base.metrics, rev.metrics);
        assert_eq!(base.predictions, rev.predictions);

        // Relabel folds (0 ↔ 9, 1 ↔ 8, …): training complements are the
        // same sets, so pooled metrics are unchanged.
        let mut relabeled = plan.clone();
        for v in relabeled.assignments.values_mut() {
            *v = plan.fold_count - 1 - *v;
        }
        let rel = cross_validate(&spec, &dm, &relabeled).unwrap();
        assert_eq!(base.metrics, rel.metrics);
    }
}

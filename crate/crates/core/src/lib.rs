//! Classification of long-term (chronic) stress from baseline EEG recordings.
//!
//! The pipeline mirrors a standard resting-state EEG study design:
//!
//! ```text
//! recordings + manifest
//!   │
//!   ├─ ingest      CSV/JSON parsing, montage + sample-rate validation
//!   ├─ preprocess  per-channel continuous-offset removal
//!   ├─ spectral    Welch PSD (Hann, 128-sample windows, 50% overlap),
//!   │              band-power integration, relative gamma
//!   ├─ features    45 features per subject: 8 band powers × 5 channels
//!   │              + frontal/temporal alpha and beta asymmetries
//!   ├─ labeling    stress/control split via PSS-10 thresholds (μ ± σ/2)
//!   │              or expert-assigned labels
//!   ├─ selection   per-feature two-sample t-test, p < α feature selection
//!   ├─ classify    SVM (SMO), Gaussian NB, KNN, logistic regression, MLP
//!   ├─ evaluate    stratified 10-fold CV; accuracy, kappa, F-measure,
//!   │              MAE, RMAE on pooled predictions
//!   └─ report      PSS histogram and box-plot statistics for plotting
//! ```
//!
//! The [`synth`] module generates deterministic synthetic cohorts (per-band
//! sinusoids plus white noise, with a controllable right-hemisphere alpha
//! effect) so that every stage can be verified against analytic ground truth.
//!
//! All stages are pure functions of their inputs: given the same data, seeds
//! and configuration they produce bitwise-identical results, and the value
//! types they exchange are immutable and safe to share across threads.

pub mod classify;
pub mod evaluate;
pub mod features;
pub mod ingest;
pub mod labeling;
pub mod preprocess;
pub mod report;
pub mod selection;
pub mod spectral;
pub mod synth;

pub use classify::{train, ClassifierKind, ClassifierSpec, TrainedModel};
pub use evaluate::{cross_validate, make_folds, metrics, EvaluationReport, FoldPlan};
pub use features::{build_feature_vector, FeatureConfig, FeatureVector};
pub use ingest::{load_manifest, load_recording, IngestConfig, Recording, SubjectManifest};
pub use labeling::{
    label_by_expert, label_by_pss, pss_thresholds, score_pss, Label, LabelMethod, LabeledDataset,
};
pub use preprocess::{remove_baseline_offset, CleanRecording};
pub use selection::{select_features, t_test, TTestResult, TTestVariant};
pub use spectral::{band_power, relative_gamma, welch_psd, Band, BandDefinition, PsdEstimate};
pub use synth::{generate_cohort, CohortSpec};

//! The five classifiers, implemented from first principles behind one
//! train/predict interface.
//!
//! * SVM — soft-margin SMO solver, linear kernel by default, Platt-scaled
//!   probabilities
//! * Naive Bayes — Gaussian class-conditional densities
//! * KNN — Euclidean distance, majority vote over k neighbours
//! * Logistic regression — L2 penalty, gradient descent with backtracking
//! * MLP — one sigmoid hidden layer trained by full-batch backprop on the
//!   squared-error objective
//!
//! Every model standardizes features with statistics fit on its own training
//! data, and training is reproducible from the spec seed: the same spec,
//! seed and data give bitwise-identical predictions.

mod knn;
mod logistic;
mod mlp;
mod naive_bayes;
mod scaler;
mod svm;

pub use knn::KnnState;
pub use logistic::LogisticState;
pub use mlp::MlpNet;
pub use naive_bayes::NaiveBayesState;
pub use scaler::Scaler;
pub use svm::{KernelKind, SvmState};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labeling::Label;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("training data has a single class ({0:?})")]
    SingleClassTraining(Label),
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("need at least 2 examples per class, got {stress} stress / {control} control")]
    TooFewExamples { stress: usize, control: usize },
    #[error("feature arity mismatch: model expects {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("rows have inconsistent arity: row {row} has {got}, expected {expected}")]
    RaggedMatrix {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("{kind:?} failed to converge after {iterations} iterations (objective {objective})")]
    NoConvergence {
        kind: ClassifierKind,
        iterations: usize,
        objective: f64,
    },
    #[error("model serialization: {0}")]
    Serialization(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Svm,
    NaiveBayes,
    Knn,
    LogisticRegression,
    Mlp,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Svm,
        ClassifierKind::NaiveBayes,
        ClassifierKind::Knn,
        ClassifierKind::LogisticRegression,
        ClassifierKind::Mlp,
    ];

    /// Short name used in CLI flags and report columns.
    pub fn short_name(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::Knn => "knn",
            ClassifierKind::LogisticRegression => "lr",
            ClassifierKind::Mlp => "mlp",
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "svm" => Ok(ClassifierKind::Svm),
            "nb" | "naive_bayes" => Ok(ClassifierKind::NaiveBayes),
            "knn" => Ok(ClassifierKind::Knn),
            "lr" | "logistic_regression" => Ok(ClassifierKind::LogisticRegression),
            "mlp" => Ok(ClassifierKind::Mlp),
            other => Err(format!("unknown classifier {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelKind,
    /// KKT tolerance for the SMO solver.
    pub tol: f64,
    /// Consecutive sweeps without an update before the solver stops.
    pub max_passes: usize,
    /// Hard cap on pair optimizations.
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            kernel: KernelKind::Linear,
            tol: 1e-3,
            max_passes: 10,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    /// Lower bound on per-feature variances, keeping likelihoods finite.
    pub var_floor: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        NbParams { var_floor: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// L2 penalty weight on the coefficients (the intercept is not
    /// penalized).
    pub l2: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            l2: 1e-2,
            grad_tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Weights start uniform in ±init_scale, drawn from the spec seed.
    pub init_scale: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden_units: 10,
            learning_rate: 0.1,
            epochs: 2_000,
            init_scale: 0.5,
        }
    }
}

/// Kind-specific hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Svm(SvmParams),
    NaiveBayes(NbParams),
    Knn(KnnParams),
    LogisticRegression(LogisticParams),
    Mlp(MlpParams),
}

impl ModelParams {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ModelParams::Svm(_) => ClassifierKind::Svm,
            ModelParams::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            ModelParams::Knn(_) => ClassifierKind::Knn,
            ModelParams::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            ModelParams::Mlp(_) => ClassifierKind::Mlp,
        }
    }
}

/// What to train and with which seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub params: ModelParams,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn with_defaults(kind: ClassifierKind, seed: u64) -> Self {
        let params = match kind {
            ClassifierKind::Svm => ModelParams::Svm(SvmParams::default()),
            ClassifierKind::NaiveBayes => ModelParams::NaiveBayes(NbParams::default()),
            ClassifierKind::Knn => ModelParams::Knn(KnnParams::default()),
            ClassifierKind::LogisticRegression => {
                ModelParams::LogisticRegression(LogisticParams::default())
            }
            ClassifierKind::Mlp => ModelParams::Mlp(MlpParams::default()),
        };
        ClassifierSpec { params, seed }
    }

    pub fn kind(&self) -> ClassifierKind {
        self.params.kind()
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        let bad = |msg: String| Err(ClassifyError::InvalidHyperparameter(msg));
        match &self.params {
            ModelParams::Svm(p) => {
                if !(p.c.is_finite() && p.c > 0.0) {
                    return bad(format!("svm: C must be positive, got {}", p.c));
                }
                if let KernelKind::Rbf { gamma: Some(g) } = p.kernel {
                    if !(g.is_finite() && g > 0.0) {
                        return bad(format!("svm: RBF gamma must be positive, got {g}"));
                    }
                }
                if !(p.tol.is_finite() && p.tol > 0.0) {
                    return bad(format!("svm: tol must be positive, got {}", p.tol));
                }
            }
            ModelParams::NaiveBayes(p) => {
                if !(p.var_floor.is_finite() && p.var_floor > 0.0) {
                    return bad(format!(
                        "nb: variance floor must be positive, got {}",
                        p.var_floor
                    ));
                }
            }
            ModelParams::Knn(p) => {
                if p.k == 0 || p.k % 2 == 0 {
                    return bad(format!("knn: k must be odd and ≥ 1, got {}", p.k));
                }
            }
            ModelParams::LogisticRegression(p) => {
                if !(p.l2.is_finite() && p.l2 >= 0.0) {
                    return bad(format!("lr: L2 weight must be ≥ 0, got {}", p.l2));
                }
                if p.max_iter == 0 {
                    return bad("lr: max_iter must be ≥ 1".into());
                }
            }
            ModelParams::Mlp(p) => {
                if p.hidden_units == 0 {
                    return bad("mlp: hidden_units must be ≥ 1".into());
                }
                if !(p.learning_rate.is_finite() && p.learning_rate > 0.0) {
                    return bad(format!(
                        "mlp: learning rate must be positive, got {}",
                        p.learning_rate
                    ));
                }
                if p.epochs == 0 {
                    return bad("mlp: epochs must be ≥ 1".into());
                }
            }
        }
        Ok(())
    }
}

/// Kind-specific learned state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelState {
    Svm(SvmState),
    NaiveBayes(NaiveBayesState),
    Knn(KnnState),
    LogisticRegression(LogisticState),
    Mlp(MlpNet),
}

/// A trained classifier: spec echo, feature scaler, learned parameters and
/// class priors. Immutable after training and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub scaler: Scaler,
    pub state: ModelState,
    pub n_features: usize,
    /// (control, stress) training fractions.
    pub class_priors: [f64; 2],
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        self.spec.kind()
    }

    /// Predicted label and stress probability for one feature vector.
    ///
    /// The label is the argmax class; an exact probability tie goes to
    /// control.
    pub fn predict(&self, x: &[f64]) -> Result<(Label, f64), ClassifyError> {
        if x.len() != self.n_features {
            return Err(ClassifyError::ArityMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        let z = self.scaler.transform(x);
        let p_stress = match &self.state {
            ModelState::Svm(m) => m.probability(&z),
            ModelState::NaiveBayes(m) => m.probability(&z),
            ModelState::Knn(m) => m.probability(&z),
            ModelState::LogisticRegression(m) => m.probability(&z),
            ModelState::Mlp(net) => net.forward(&z),
        };
        let label = if p_stress > 0.5 {
            Label::Stress
        } else {
            Label::Control
        };
        Ok((label, p_stress))
    }

    /// Raw SVM decision value Σ αᵢyᵢK(xᵢ, x) + b; `None` for other kinds.
    pub fn svm_decision_value(&self, x: &[f64]) -> Option<f64> {
        match &self.state {
            ModelState::Svm(m) => Some(m.decision_value(&self.scaler.transform(x))),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("model serialization")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifyError> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| ClassifyError::Serialization(e.to_string()))?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(ClassifyError::Serialization(format!(
                "unsupported model format version {}",
                doc.format_version
            )));
        }
        Ok(doc.model)
    }
}

/// Validates shapes and values, standardizes the features, and trains the
/// requested classifier.
pub fn train(
    spec: &ClassifierSpec,
    x: &[Vec<f64>],
    y: &[Label],
) -> Result<TrainedModel, ClassifyError> {
    spec.validate()?;
    if x.is_empty() || y.is_empty() {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    debug_assert_eq!(x.len(), y.len());
    let n_features = x[0].len();
    for (row, r) in x.iter().enumerate() {
        if r.len() != n_features {
            return Err(ClassifyError::RaggedMatrix {
                row,
                got: r.len(),
                expected: n_features,
            });
        }
        for (col, v) in r.iter().enumerate() {
            if !v.is_finite() {
                return Err(ClassifyError::NonFiniteFeature { row, col });
            }
        }
    }
    let n_stress = y.iter().filter(|&&l| l == Label::Stress).count();
    let n_control = y.len() - n_stress;
    if n_stress == 0 {
        return Err(ClassifyError::SingleClassTraining(Label::Control));
    }
    if n_control == 0 {
        return Err(ClassifyError::SingleClassTraining(Label::Stress));
    }
    if n_stress < 2 || n_control < 2 {
        return Err(ClassifyError::TooFewExamples {
            stress: n_stress,
            control: n_control,
        });
    }

    let scaler = Scaler::fit(x);
    let z = scaler.transform_matrix(x);
    let state = match &spec.params {
        ModelParams::Svm(p) => ModelState::Svm(svm::train_svm(p, &z, y, spec.seed)?),
        ModelParams::NaiveBayes(p) => ModelState::NaiveBayes(naive_bayes::train_nb(p, &z, y)),
        ModelParams::Knn(p) => ModelState::Knn(knn::train_knn(p, &z, y)),
        ModelParams::LogisticRegression(p) => {
            ModelState::LogisticRegression(logistic::train_logistic(p, &z, y)?)
        }
        ModelParams::Mlp(p) => ModelState::Mlp(mlp::train_mlp(p, &z, y, spec.seed)),
    };

    Ok(TrainedModel {
        spec: spec.clone(),
        scaler,
        state,
        n_features,
        class_priors: [
            n_control as f64 / y.len() as f64,
            n_stress as f64 / y.len() as f64,
        ],
    })
}

/// Euclidean distance over all attributes.
pub fn knn_distance(a: &[f64], b: &[f64]) -> Result<f64, ClassifyError> {
    if a.len() != b.len() {
        return Err(ClassifyError::ArityMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Squared-error objective for a single instance: ½(y − f(x))².
pub fn mlp_loss(y: f64, f_x: f64) -> f64 {
    0.5 * (y - f_x) * (y - f_x)
}

pub(crate) fn label_to_unit(label: Label) -> f64 {
    match label {
        Label::Stress => 1.0,
        Label::Control => 0.0,
    }
}

pub(crate) fn label_to_sign(label: Label) -> f64 {
    match label {
        Label::Stress => 1.0,
        Label::Control => -1.0,
    }
}

//! Gaussian Naive Bayes.

use serde::{Deserialize, Serialize};

use crate::labeling::Label;

/// Per-class feature means/variances and log priors, index 0 = control,
/// index 1 = stress.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesState {
    pub log_priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

pub(super) fn train_nb(params: &super::NbParams, z: &[Vec<f64>], y: &[Label]) -> NaiveBayesState {
    let d = z[0].len();
    let mut counts = [0usize; 2];
    let mut means = [vec![0.0; d], vec![0.0; d]];
    for (row, &label) in z.iter().zip(y) {
        let c = class_index(label);
        counts[c] += 1;
        for (m, v) in means[c].iter_mut().zip(row) {
            *m += v;
        }
    }
    for c in 0..2 {
        for m in &mut means[c] {
            *m /= counts[c] as f64;
        }
    }
    let mut variances = [vec![0.0; d], vec![0.0; d]];
    for (row, &label) in z.iter().zip(y) {
        let c = class_index(label);
        for ((s, m), v) in variances[c].iter_mut().zip(&means[c]).zip(row) {
            *s += (v - m) * (v - m);
        }
    }
    for c in 0..2 {
        for s in &mut variances[c] {
            // Maximum-likelihood variance with a floor against degenerate
            // (constant) features.
            *s = (*s / counts[c] as f64).max(params.var_floor);
        }
    }
    let n = z.len() as f64;
    NaiveBayesState {
        log_priors: [(counts[0] as f64 / n).ln(), (counts[1] as f64 / n).ln()],
        means,
        variances,
    }
}

impl NaiveBayesState {
    fn log_joint(&self, class: usize, z: &[f64]) -> f64 {
        let mut lp = self.log_priors[class];
        for ((v, m), var) in z.iter().zip(&self.means[class]).zip(&self.variances[class]) {
            let diff = v - m;
            lp += -0.5 * ((std::f64::consts::TAU * var).ln() + diff * diff / var);
        }
        lp
    }

    /// Posterior stress probability from the two log joints.
    pub fn probability(&self, z: &[f64]) -> f64 {
        let lc = self.log_joint(0, z);
        let ls = self.log_joint(1, z);
        1.0 / (1.0 + (lc - ls).exp())
    }
}

fn class_index(label: Label) -> usize {
    match label {
        Label::Control => 0,
        Label::Stress => 1,
    }
}

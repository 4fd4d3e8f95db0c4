//! Plot-ready summary statistics: the PSS-score histogram and per-feature
//! box plots. Rendering itself is left to external tooling; these functions
//! produce the numbers the figures are drawn from.

use serde::{Deserialize, Serialize};

use crate::labeling::{ExclusionReason, Label, LabelOutcome, PssScore, PssThresholds};

/// Linear-interpolation ("type 7") quantile of pre-sorted values.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median, quartiles, 1.5×IQR whiskers and outliers for one feature/group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Smallest sample ≥ q1 − 1.5·IQR.
    pub whisker_lo: f64,
    /// Largest sample ≤ q3 + 1.5·IQR.
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
}

pub fn boxplot_stats(values: &[f64]) -> Option<BoxplotStats> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_type7(&sorted, 0.25);
    let median = quantile_type7(&sorted, 0.5);
    let q3 = quantile_type7(&sorted, 0.75);
    let iqr = q3 - q1;
    let lo_fence = q1 - 1.5 * iqr;
    let hi_fence = q3 + 1.5 * iqr;
    let whisker_lo = sorted
        .iter()
        .copied()
        .find(|&v| v >= lo_fence)
        .unwrap_or(sorted[0]);
    let whisker_hi = sorted
        .iter()
        .rev()
        .copied()
        .find(|&v| v <= hi_fence)
        .unwrap_or(sorted[sorted.len() - 1]);
    let outliers = sorted
        .iter()
        .copied()
        .filter(|&v| v < lo_fence || v > hi_fence)
        .collect();
    Some(BoxplotStats {
        count: sorted.len(),
        median,
        q1,
        q3,
        whisker_lo,
        whisker_hi,
        outliers,
    })
}

/// One histogram bar: a PSS score, how many subjects hit it, and the group
/// the thresholds put that score in (the figure's bar colour).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub score: u8,
    pub count: usize,
    pub class: &'static str,
}

/// Unit-width histogram of the full 0..=40 score axis.
pub fn pss_histogram(scores: &[PssScore], thresholds: &PssThresholds) -> Vec<HistogramBin> {
    let mut counts = [0usize; 41];
    for s in scores {
        counts[s.total as usize] += 1;
    }
    (0..=40u8)
        .map(|score| {
            let dev = score as f64 - thresholds.mean;
            let class = if dev < -thresholds.half_band {
                "control"
            } else if dev > thresholds.half_band {
                "stress"
            } else {
                "neutral"
            };
            HistogramBin {
                score,
                count: counts[score as usize],
                class,
            }
        })
        .collect()
}

/// Class name used in label exports for an outcome.
pub fn outcome_class(outcome: &LabelOutcome) -> (&'static str, &'static str) {
    match outcome {
        LabelOutcome::Labeled(Label::Stress) => ("stress", ""),
        LabelOutcome::Labeled(Label::Control) => ("control", ""),
        LabelOutcome::Excluded(ExclusionReason::NeutralBand) => ("excluded", "neutral_band"),
        LabelOutcome::Excluded(ExclusionReason::Unlabeled) => ("excluded", "unlabeled"),
        LabelOutcome::Excluded(ExclusionReason::InvalidFeatures) => {
            ("excluded", "invalid_features")
        }
    }
}

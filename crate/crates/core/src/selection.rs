//! Feature selection with a two-sample t-test.
//!
//! Defaults to Welch's unequal-variance test with Welch–Satterthwaite degrees
//! of freedom and a two-tailed p-value; a pooled-variance Student variant is
//! available for sensitivity analysis. The t CDF is evaluated through the
//! regularized incomplete beta function (continued fraction, ~1e-14
//! termination). No multiple-comparison correction is applied: 45 features
//! are tested at the raw α level.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labeling::{Label, LabeledDataset};

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("group needs at least 2 values, got {0}")]
    InsufficientGroup(usize),
    #[error("non-finite value in group")]
    NonFiniteValue,
    #[error("dataset has no {0:?} rows")]
    EmptyClass(Label),
    #[error("feature {0} missing from a row")]
    MissingFeature(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestVariant {
    /// Welch's test: unequal variances, Welch–Satterthwaite dof (default).
    #[default]
    Welch,
    /// Student's pooled-variance test, dof = n_a + n_b − 2.
    Pooled,
}

/// Plain two-sample test outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    /// Positive when group A's mean exceeds group B's.
    pub t_stat: f64,
    /// Two-tailed p-value in [0, 1].
    pub p_value: f64,
    pub dof: f64,
    /// Set when both groups are constant and equal, which leaves the
    /// statistic undefined; the result is reported as t = 0, p = 1.
    pub degenerate: bool,
}

/// Per-feature test row as emitted by [`select_features`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub feature_name: String,
    pub t_stat: f64,
    pub p_value: f64,
    pub dof: f64,
    pub n_stress: usize,
    pub n_control: usize,
    pub degenerate: bool,
    pub selected: bool,
}

/// Two-sample t-test of `group_a` against `group_b`.
///
/// Inputs are copied and sorted before accumulation, so the result is
/// bitwise invariant under any permutation of either group.
pub fn t_test(
    group_a: &[f64],
    group_b: &[f64],
    variant: TTestVariant,
) -> Result<TTest, SelectionError> {
    if group_a.len() < 2 {
        return Err(SelectionError::InsufficientGroup(group_a.len()));
    }
    if group_b.len() < 2 {
        return Err(SelectionError::InsufficientGroup(group_b.len()));
    }
    if group_a.iter().chain(group_b).any(|v| !v.is_finite()) {
        return Err(SelectionError::NonFiniteValue);
    }

    let (ma, va) = sorted_mean_var(group_a);
    let (mb, vb) = sorted_mean_var(group_b);
    let na = group_a.len() as f64;
    let nb = group_b.len() as f64;

    if va == 0.0 && vb == 0.0 {
        if ma == mb {
            return Ok(TTest {
                t_stat: 0.0,
                p_value: 1.0,
                dof: na + nb - 2.0,
                degenerate: true,
            });
        }
        // Constant groups with different means: infinitely significant.
        return Ok(TTest {
            t_stat: if ma > mb {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            },
            p_value: 0.0,
            dof: na + nb - 2.0,
            degenerate: false,
        });
    }

    let (t, dof) = match variant {
        TTestVariant::Welch => {
            let sa = va / na;
            let sb = vb / nb;
            let t = (ma - mb) / (sa + sb).sqrt();
            let dof = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
            (t, dof)
        }
        TTestVariant::Pooled => {
            let dof = na + nb - 2.0;
            let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / dof;
            let t = (ma - mb) / (sp2 * (1.0 / na + 1.0 / nb)).sqrt();
            (t, dof)
        }
    };

    Ok(TTest {
        t_stat: t,
        p_value: two_tailed_p(t, dof),
        dof,
        degenerate: false,
    })
}

/// Mean and sample variance over a sorted copy, fixing the accumulation
/// order regardless of input order.
fn sorted_mean_var(values: &[f64]) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let ss: f64 = sorted.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Two-tailed p-value of a t statistic via the identity
/// p = I_x(ν/2, 1/2) with x = ν / (ν + t²).
pub fn two_tailed_p(t: f64, dof: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = dof / (dof + t * t);
    inc_beta_reg(x, dof / 2.0, 0.5).clamp(0.0, 1.0)
}

/// Runs the t-test for every feature between the stress and control rows.
///
/// Returns the selected feature names (p < `alpha_level`, ascending p, ties
/// broken by table order) together with the full per-feature table in
/// canonical feature order.
pub fn select_features(
    dataset: &LabeledDataset,
    alpha_level: f64,
    variant: TTestVariant,
) -> Result<(Vec<String>, Vec<TTestResult>), SelectionError> {
    let stress: Vec<&crate::labeling::DatasetRow> = dataset
        .rows
        .iter()
        .filter(|r| r.label == Label::Stress)
        .collect();
    let control: Vec<&crate::labeling::DatasetRow> = dataset
        .rows
        .iter()
        .filter(|r| r.label == Label::Control)
        .collect();
    if stress.is_empty() {
        return Err(SelectionError::EmptyClass(Label::Stress));
    }
    if control.is_empty() {
        return Err(SelectionError::EmptyClass(Label::Control));
    }

    let names: Vec<String> = dataset.rows[0].features.names().map(String::from).collect();
    let mut table = Vec::with_capacity(names.len());
    for name in &names {
        let collect = |rows: &[&crate::labeling::DatasetRow]| -> Result<Vec<f64>, SelectionError> {
            rows.iter()
                .map(|r| {
                    r.features
                        .get(name)
                        .ok_or_else(|| SelectionError::MissingFeature(name.clone()))
                })
                .collect()
        };
        let group_stress = collect(&stress)?;
        let group_control = collect(&control)?;
        let test = t_test(&group_stress, &group_control, variant)?;
        table.push(TTestResult {
            feature_name: name.clone(),
            t_stat: test.t_stat,
            p_value: test.p_value,
            dof: test.dof,
            n_stress: group_stress.len(),
            n_control: group_control.len(),
            degenerate: test.degenerate,
            selected: test.p_value < alpha_level,
        });
    }

    let mut selected: Vec<(usize, &TTestResult)> = table
        .iter()
        .enumerate()
        .filter(|(_, r)| r.selected)
        .collect();
    selected.sort_by(|(ia, a), (ib, b)| {
        a.p_value
            .partial_cmp(&b.p_value)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(ia.cmp(ib))
    });
    Ok((
        selected
            .into_iter()
            .map(|(_, r)| r.feature_name.clone())
            .collect(),
        table,
    ))
}

// ---------------------------------------------------------------------------
// Special functions: ln Γ and the regularized incomplete beta.
// ---------------------------------------------------------------------------

/// ln Γ(z) for z > 0, Lanczos approximation.
fn ln_gamma(z: f64) -> f64 {
    const COEF: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut sum = 1.000000000190015;
    for (i, c) in COEF.iter().enumerate() {
        sum += c / (z + i as f64 + 1.0);
    }
    let tmp = z + 5.5;
    (z + 0.5) * tmp.ln() - tmp + (2.5066282746310005 * sum / z).ln()
}

/// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
fn inc_beta_reg(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    // Use the symmetry relation where the continued fraction converges fast.
    if x > (a + 1.0) / (a + b + 2.0) {
        return 1.0 - inc_beta_reg(1.0 - x, b, a);
    }
    let front =
        (a * x.ln() + b * (1.0 - x).ln() - ln_gamma(a) - ln_gamma(b) + ln_gamma(a + b)).exp();
    front * beta_cont_frac(x, a, b) / a
}

fn beta_cont_frac(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 400;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m_f = m as f64;
        let m2 = 2.0 * m_f;
        // Even step.
        let aa = m_f * (b - m_f) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        let aa = -(a + m_f) * (qab + m_f) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

//! Artifact readers and writers.
//!
//! All CSVs are plain comma-separated text with a header row; floats use
//! Rust's shortest round-trip formatting, so re-parsing recovers the exact
//! values and repeated runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use eegstress::evaluate::EvaluationReport;
use eegstress::features::FeatureVector;
use eegstress::labeling::{ExclusionReason, Label, LabelMethod, LabelOutcome};
use eegstress::report::{BoxplotStats, HistogramBin};
use eegstress::selection::TTestResult;

use crate::config::RunConfig;

pub fn features_csv(features: &[FeatureVector]) -> Result<String> {
    let Some(first) = features.first() else {
        bail!("no feature vectors to export");
    };
    let names: Vec<&str> = first.names().collect();
    let mut out = String::from("subject_id");
    for name in &names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for fv in features {
        let fv_names: Vec<&str> = fv.names().collect();
        if fv_names != names {
            bail!("feature vector {} has a different layout", fv.subject_id);
        }
        out.push_str(&fv.subject_id);
        for v in fv.values() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_features_csv(text: &str) -> Result<Vec<FeatureVector>> {
    let mut lines = text.lines();
    let header = lines.next().context("features csv: empty file")?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.first() != Some(&"subject_id") {
        bail!("features csv: header must start with subject_id");
    }
    let names: Vec<String> = columns[1..].iter().map(|s| s.to_string()).collect();
    let mut vectors = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            bail!("features csv: row {} has {} fields", i + 2, fields.len());
        }
        let entries: Result<Vec<(String, f64)>> = names
            .iter()
            .zip(&fields[1..])
            .map(|(name, raw)| {
                let v: f64 = raw
                    .parse()
                    .with_context(|| format!("features csv: bad value {raw:?}"))?;
                Ok((name.clone(), v))
            })
            .collect();
        vectors.push(FeatureVector::new(fields[0], entries?));
    }
    Ok(vectors)
}

/// JSON alternative to `features.csv` with identical names and ordering:
/// an array of `{subject_id, features: {name: value, …}}` objects.
pub fn features_json(features: &[FeatureVector]) -> String {
    let mut out = String::from("[\n");
    for (i, fv) in features.iter().enumerate() {
        let _ = write!(
            out,
            "  {{\"subject_id\": {}, \"features\": {{",
            serde_json::to_string(&fv.subject_id).expect("string json")
        );
        for (j, (name, value)) in fv.entries().iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            let _ = write!(
                out,
                "{}: {}",
                serde_json::to_string(name).expect("string json"),
                serde_json::Number::from_f64(*value)
                    .map(|n| n.to_string())
                    .unwrap_or_else(|| "null".into())
            );
        }
        out.push_str("}}");
        if i + 1 < features.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

/// PSD export: `freq_hz,power` rows.
pub fn psd_csv(psd: &eegstress::spectral::PsdEstimate) -> String {
    let mut out = String::from("freq_hz,power\n");
    for (f, p) in psd.freqs_hz.iter().zip(&psd.power) {
        let _ = writeln!(out, "{f},{p}");
    }
    out
}

pub fn labels_csv(outcomes: &[(String, LabelOutcome)]) -> String {
    let mut out = String::from("subject_id,label,reason\n");
    for (subject_id, outcome) in outcomes {
        let (label, reason) = eegstress::report::outcome_class(outcome);
        let _ = writeln!(out, "{subject_id},{label},{reason}");
    }
    out
}

pub fn parse_labels_csv(text: &str) -> Result<Vec<(String, LabelOutcome)>> {
    let mut lines = text.lines();
    let header = lines.next().context("labels csv: empty file")?;
    if header != "subject_id,label,reason" {
        bail!("labels csv: unexpected header {header:?}");
    }
    let mut outcomes = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            bail!("labels csv: malformed row {line:?}");
        }
        let outcome = match (fields[1], fields[2]) {
            ("stress", _) => LabelOutcome::Labeled(Label::Stress),
            ("control", _) => LabelOutcome::Labeled(Label::Control),
            ("excluded", "neutral_band") => LabelOutcome::Excluded(ExclusionReason::NeutralBand),
            ("excluded", "unlabeled") => LabelOutcome::Excluded(ExclusionReason::Unlabeled),
            ("excluded", "invalid_features") => {
                LabelOutcome::Excluded(ExclusionReason::InvalidFeatures)
            }
            _ => bail!("labels csv: unknown label/reason in {line:?}"),
        };
        outcomes.push((fields[0].to_string(), outcome));
    }
    Ok(outcomes)
}

/// `ttest_report.csv`: one row per feature in canonical order.
pub fn ttest_csv(table: &[TTestResult]) -> String {
    let mut out = String::from("feature,t,dof,p,selected\n");
    for row in table {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.feature_name, row.t_stat, row.dof, row.p_value, row.selected
        );
    }
    out
}

/// `table2.csv`: rows = feature sets, columns = classifier accuracies.
pub fn accuracy_table_csv(
    feature_sets: &[Vec<String>],
    classifiers: &[eegstress::classify::ClassifierKind],
    reports: &[EvaluationReport],
) -> String {
    let mut out = String::from("feature_set");
    for kind in classifiers {
        out.push(',');
        out.push_str(kind.short_name());
    }
    out.push('\n');
    for set in feature_sets {
        out.push_str(&set.join("+"));
        for kind in classifiers {
            let report = reports
                .iter()
                .find(|r| r.classifier.kind() == *kind && r.feature_names == *set);
            match report {
                Some(r) => {
                    let _ = write!(out, ",{}", r.metrics.accuracy_pct);
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// `table3.csv`: per classifier, the full metric row of its best-accuracy
/// feature set (earlier set wins a tie).
pub fn best_performers_csv(
    classifiers: &[eegstress::classify::ClassifierKind],
    feature_sets: &[Vec<String>],
    reports: &[EvaluationReport],
) -> String {
    let mut out = String::from("classifier,feature_set,accuracy_pct,kappa,f_measure,mae,rmae\n");
    for kind in classifiers {
        let best = feature_sets
            .iter()
            .filter_map(|set| {
                reports
                    .iter()
                    .find(|r| r.classifier.kind() == *kind && &r.feature_names == set)
            })
            .max_by(|a, b| {
                a.metrics
                    .accuracy_pct
                    .partial_cmp(&b.metrics.accuracy_pct)
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        if let Some(r) = best {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                kind.short_name(),
                r.feature_names.join("+"),
                m.accuracy_pct,
                m.kappa,
                m.f_measure,
                m.mae,
                m.rmae
            );
        }
    }
    out
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("score,count,class\n");
    for bin in bins {
        let _ = writeln!(out, "{},{},{}", bin.score, bin.count, bin.class);
    }
    out
}

/// One `boxplots.csv` row: labelling method × group × feature.
pub struct BoxplotRow {
    pub method: LabelMethod,
    pub group: Label,
    pub feature: String,
    pub stats: BoxplotStats,
}

pub fn boxplots_csv(rows: &[BoxplotRow]) -> String {
    let mut out =
        String::from("method,group,feature,count,median,q1,q3,whisker_lo,whisker_hi,outliers\n");
    for row in rows {
        let outliers = row
            .stats
            .outliers
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            row.method.name(),
            row.group.name(),
            row.feature,
            row.stats.count,
            row.stats.median,
            row.stats.q1,
            row.stats.q3,
            row.stats.whisker_lo,
            row.stats.whisker_hi,
            outliers
        );
    }
    out
}

/// Top-level `evaluation_report.json` document.
#[derive(Debug, Serialize, Deserialize)]
pub struct EvaluationDocument {
    pub format_version: u32,
    /// The fully resolved configuration that produced this report.
    pub config: RunConfig,
    pub selected_features: Vec<String>,
    pub ttest_table: Vec<TTestResult>,
    pub feature_sets: Vec<Vec<String>>,
    pub evaluations: Vec<EvaluationReport>,
}

pub const EVALUATION_FORMAT_VERSION: u32 = 1;

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

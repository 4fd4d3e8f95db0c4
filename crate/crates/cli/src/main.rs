//! `eegstress` — baseline-EEG chronic stress classification pipeline.
//!
//! Subcommands mirror the pipeline stages (`synth`, `extract`, `label`,
//! `select`, `train`, `evaluate`, `report`) plus `run`, which executes the
//! whole chain and writes a reproducible artifact directory.
//!
//! Exit codes: 0 success, 2 validation failure, 3 numerical failure.

mod artifacts;
mod config;
mod pipeline;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use eegstress::classify::{ClassifierKind, ClassifierSpec};
use eegstress::evaluate::{cross_validate, make_folds, DesignMatrix};
use eegstress::ingest::write_manifest;
use eegstress::labeling::{assemble_dataset, LabelMethod, SdConvention};
use eegstress::selection::{select_features, TTestVariant};
use eegstress::spectral::RgDirection;
use eegstress::synth::CohortSpec;

use artifacts::*;
use config::{parse_feature_sets, RunConfig};
use pipeline::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "eegstress",
    version,
    about = "EEG chronic-stress classification pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by stages that read a cohort directory.
#[derive(Args, Clone)]
struct CohortArgs {
    /// Directory containing manifest.json and the recording CSVs.
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated channel list overriding the default montage.
    #[arg(long)]
    montage: Option<String>,
    /// Declared sample rate in Hz; recordings must agree within 1%.
    #[arg(long)]
    sample_rate: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort and write it in the ingest formats.
    Synth {
        /// Cohort spec JSON; missing fields take defaults.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Override the spec seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the per-subject feature vectors into a CSV.
    Extract {
        #[command(flatten)]
        cohort: CohortArgs,
        /// Welch window length in samples.
        #[arg(long, default_value_t = 128)]
        window: usize,
        /// Welch overlap fraction in [0, 1).
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
        /// Relative-gamma direction: gamma_over_slow or slow_over_gamma.
        #[arg(long, default_value = "gamma_over_slow")]
        rg_direction: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write the feature matrix as JSON.
        #[arg(long)]
        json_out: Option<PathBuf>,
        /// Export each subject × channel PSD as `<subject>_<channel>.csv`
        /// (header `freq_hz,power`) into this directory.
        #[arg(long)]
        psd_dir: Option<PathBuf>,
    },
    /// Assign stress/control labels from the manifest.
    Label {
        #[command(flatten)]
        cohort: CohortArgs,
        /// pss or expert.
        #[arg(long)]
        method: String,
        /// Use the population (n) standard deviation in the PSS thresholds.
        #[arg(long)]
        population_sd: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-feature t-test between the stress and control groups.
    Select {
        /// features.csv produced by `extract`.
        #[arg(long)]
        features: PathBuf,
        /// labels.csv produced by `label`.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Use the pooled-variance Student test instead of Welch's.
        #[arg(long)]
        pooled: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one classifier on the full labeled dataset.
    Train {
        #[arg(long)]
        features_csv: PathBuf,
        #[arg(long)]
        labels_csv: PathBuf,
        /// svm, nb, knn, lr or mlp.
        #[arg(long)]
        classifier: String,
        /// Comma-separated feature names to train on.
        #[arg(long)]
        features: String,
        #[arg(long, default_value_t = 13)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate classifiers over feature sets.
    Evaluate {
        #[arg(long)]
        features_csv: PathBuf,
        #[arg(long)]
        labels_csv: PathBuf,
        /// Comma-separated classifiers (default: all five).
        #[arg(long, default_value = "svm,nb,knn,lr,mlp")]
        classifiers: String,
        /// Semicolon-separated feature sets, features comma-separated.
        #[arg(long)]
        feature_sets: String,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 7)]
        cv_seed: u64,
        #[arg(long, default_value_t = 13)]
        train_seed: u64,
        /// Plain random folds instead of stratified ones.
        #[arg(long)]
        no_stratify: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Histogram and box-plot statistics for plotting.
    Report {
        #[command(flatten)]
        cohort: CohortArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the whole pipeline and write the artifact directory.
    Run {
        /// Run configuration JSON; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Cohort directory; omit to synthesize a cohort in memory.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Synthetic cohort spec JSON (only used without --data).
        #[arg(long)]
        synth_spec: Option<PathBuf>,
        /// Labelling method: pss or expert.
        #[arg(long)]
        method: Option<String>,
        /// Significance level for feature selection.
        #[arg(long)]
        alpha: Option<f64>,
        /// Comma-separated classifier list.
        #[arg(long)]
        classifiers: Option<String>,
        /// Semicolon-separated feature sets (overrides automatic selection).
        #[arg(long)]
        feature_sets: Option<String>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        cv_seed: Option<u64>,
        #[arg(long)]
        train_seed: Option<u64>,
        /// Seed for the synthetic cohort.
        #[arg(long)]
        synth_seed: Option<u64>,
        /// Output directory (default $EEGSTRESS_OUT_DIR or eegstress_out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace the output directory if it already exists.
        #[arg(long)]
        force: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code);
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth { spec, seed, out } => cmd_synth(spec, seed, out),
        Command::Extract {
            cohort,
            window,
            overlap,
            rg_direction,
            out,
            json_out,
            psd_dir,
        } => cmd_extract(
            cohort,
            window,
            overlap,
            &rg_direction,
            out,
            json_out,
            psd_dir,
        ),
        Command::Label {
            cohort,
            method,
            population_sd,
            out,
        } => cmd_label(cohort, &method, population_sd, out),
        Command::Select {
            features,
            labels,
            alpha,
            pooled,
            out,
        } => cmd_select(features, labels, alpha, pooled, out),
        Command::Train {
            features_csv,
            labels_csv,
            classifier,
            features,
            seed,
            out,
        } => cmd_train(features_csv, labels_csv, &classifier, &features, seed, out),
        Command::Evaluate {
            features_csv,
            labels_csv,
            classifiers,
            feature_sets,
            folds,
            cv_seed,
            train_seed,
            no_stratify,
            out_dir,
        } => cmd_evaluate(
            features_csv,
            labels_csv,
            &classifiers,
            &feature_sets,
            folds,
            cv_seed,
            train_seed,
            no_stratify,
            out_dir,
        ),
        Command::Report { cohort, out_dir } => cmd_report(cohort, out_dir),
        Command::Run {
            config,
            data,
            synth_spec,
            method,
            alpha,
            classifiers,
            feature_sets,
            folds,
            cv_seed,
            train_seed,
            synth_seed,
            out,
            force,
        } => {
            let mut run_config = match config {
                Some(path) => read_json::<RunConfig>(&path)?,
                None => RunConfig::default(),
            };
            if let Some(path) = synth_spec {
                run_config.synth = read_json::<CohortSpec>(&path)?;
            }
            if let Some(dir) = data {
                run_config.data_dir = Some(dir);
            }
            if let Some(m) = method {
                run_config.method = parse_method(&m)?;
            }
            if let Some(a) = alpha {
                run_config.alpha_level = a;
            }
            if let Some(list) = classifiers {
                run_config.classifiers = parse_classifiers(&list)?;
            }
            if let Some(sets) = feature_sets {
                run_config.feature_sets =
                    Some(parse_feature_sets(&sets).map_err(CliError::validation)?);
            }
            if let Some(f) = folds {
                run_config.fold_count = f;
            }
            if let Some(s) = cv_seed {
                run_config.cv_seed = s;
            }
            if let Some(s) = train_seed {
                run_config.train_seed = s;
            }
            if let Some(s) = synth_seed {
                run_config.synth.seed = s;
            }
            let out_dir = out.unwrap_or_else(|| {
                std::env::var_os("EEGSTRESS_OUT_DIR")
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("eegstress_out"))
            });
            cmd_run(run_config, out_dir, force)
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("parsing {}: {e}", path.display())))
}

fn parse_method(raw: &str) -> CliResult<LabelMethod> {
    match raw.to_ascii_lowercase().as_str() {
        "pss" | "pss_threshold" => Ok(LabelMethod::PssThreshold),
        "expert" => Ok(LabelMethod::Expert),
        other => Err(CliError::validation(format!(
            "unknown labelling method {other:?} (expected pss or expert)"
        ))),
    }
}

fn parse_classifiers(raw: &str) -> CliResult<Vec<ClassifierKind>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<ClassifierKind>().map_err(CliError::validation))
        .collect()
}

fn parse_rg_direction(raw: &str) -> CliResult<RgDirection> {
    match raw.to_ascii_lowercase().as_str() {
        "gamma_over_slow" => Ok(RgDirection::GammaOverSlow),
        "slow_over_gamma" => Ok(RgDirection::SlowOverGamma),
        other => Err(CliError::validation(format!(
            "unknown rg direction {other:?}"
        ))),
    }
}

fn cohort_config(args: &CohortArgs) -> RunConfig {
    let mut config = RunConfig {
        data_dir: Some(args.data.clone()),
        sample_rate_hz: args.sample_rate,
        ..RunConfig::default()
    };
    if let Some(montage) = &args.montage {
        config.montage = montage
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
    }
    config
}

fn cmd_synth(spec: Option<PathBuf>, seed: Option<u64>, out: PathBuf) -> CliResult<()> {
    let mut cohort_spec = match spec {
        Some(path) => read_json::<CohortSpec>(&path)?,
        None => CohortSpec::default(),
    };
    if let Some(s) = seed {
        cohort_spec.seed = s;
    }
    let (recordings, manifest) = eegstress::synth::generate_cohort(&cohort_spec)?;
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::validation(format!("creating {}: {e}", out.display())))?;
    for rec in &recordings {
        eegstress::ingest::write_recording(rec, &out.join(format!("{}.csv", rec.subject_id)))?;
    }
    write_manifest(&manifest, &out.join("manifest.json"))?;
    println!(
        "wrote {} recordings + manifest.json to {}",
        recordings.len(),
        out.display()
    );
    Ok(())
}

fn cmd_extract(
    cohort: CohortArgs,
    window: usize,
    overlap: f64,
    rg_direction: &str,
    out: PathBuf,
    json_out: Option<PathBuf>,
    psd_dir: Option<PathBuf>,
) -> CliResult<()> {
    let mut config = cohort_config(&cohort);
    config.window_len = window;
    config.overlap_frac = overlap;
    config.rg_direction = parse_rg_direction(rg_direction)?;
    let (recordings, _manifest) = pipeline::load_cohort(&config)?;
    let (features, failures) = pipeline::extract_features(&recordings, &config);
    for (subject, msg) in &failures {
        eprintln!("warning: excluding {subject}: {msg}");
    }
    if features.is_empty() {
        return Err(CliError::numerical(
            "feature extraction failed for every subject",
        ));
    }
    write_text(&out, &features_csv(&features)?)?;
    if let Some(path) = json_out {
        write_text(&path, &features_json(&features))?;
    }
    if let Some(dir) = psd_dir {
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::validation(format!("creating {}: {e}", dir.display())))?;
        for rec in &recordings {
            let clean = eegstress::preprocess::remove_baseline_offset(rec);
            for ch in &clean.recording.channels {
                let psd = eegstress::spectral::welch_psd(
                    &ch.samples,
                    clean.sample_rate_hz(),
                    config.window_len,
                    config.overlap_frac,
                )
                .map_err(|e| CliError::numerical(format!("{}/{}: {e}", rec.subject_id, ch.name)))?;
                write_text(
                    &dir.join(format!("{}_{}.csv", rec.subject_id, ch.name)),
                    &psd_csv(&psd),
                )?;
            }
        }
    }
    println!(
        "wrote {} feature vectors to {}",
        features.len(),
        out.display()
    );
    Ok(())
}

fn cmd_label(cohort: CohortArgs, method: &str, population_sd: bool, out: PathBuf) -> CliResult<()> {
    let mut config = cohort_config(&cohort);
    config.method = parse_method(method)?;
    if population_sd {
        config.sd_convention = SdConvention::Population;
    }
    let manifest = eegstress::ingest::load_manifest(&cohort.data.join("manifest.json"))?;
    let (outcomes, thresholds) = pipeline::label_outcomes(&manifest, config.method, &config)?;
    if !outcomes
        .iter()
        .any(|(_, o)| matches!(o, eegstress::labeling::LabelOutcome::Labeled(_)))
    {
        eprintln!(
            "warning: method {} labelled no subjects; the dataset is empty",
            config.method.name()
        );
    }
    write_text(&out, &labels_csv(&outcomes))?;
    if let Some(t) = thresholds {
        println!(
            "PSS thresholds: t_low = {:.4}, t_high = {:.4} ({:?} SD)",
            t.t_low(),
            t.t_high(),
            t.sd_convention
        );
    }
    println!("wrote labels to {}", out.display());
    Ok(())
}

fn load_dataset(
    features_csv_path: &PathBuf,
    labels_csv_path: &PathBuf,
    method: LabelMethod,
) -> CliResult<eegstress::labeling::LabeledDataset> {
    let features =
        parse_features_csv(&std::fs::read_to_string(features_csv_path).map_err(|e| {
            CliError::validation(format!("reading {}: {e}", features_csv_path.display()))
        })?)?;
    let outcomes = parse_labels_csv(&std::fs::read_to_string(labels_csv_path).map_err(|e| {
        CliError::validation(format!("reading {}: {e}", labels_csv_path.display()))
    })?)?;
    Ok(assemble_dataset(method, &outcomes, &features))
}

fn cmd_select(
    features: PathBuf,
    labels: PathBuf,
    alpha: f64,
    pooled: bool,
    out: PathBuf,
) -> CliResult<()> {
    let dataset = load_dataset(&features, &labels, LabelMethod::Expert)?;
    let variant = if pooled {
        TTestVariant::Pooled
    } else {
        TTestVariant::Welch
    };
    let (selected, table) = select_features(&dataset, alpha, variant)?;
    write_text(&out, &ttest_csv(&table))?;
    println!(
        "selected {} of {} features at alpha = {alpha}: {}",
        selected.len(),
        table.len(),
        selected.join(", ")
    );
    Ok(())
}

fn cmd_train(
    features_csv_path: PathBuf,
    labels_csv_path: PathBuf,
    classifier: &str,
    feature_list: &str,
    seed: u64,
    out: PathBuf,
) -> CliResult<()> {
    let kind: ClassifierKind = classifier.parse().map_err(CliError::validation)?;
    let names: Vec<String> = feature_list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect();
    if names.is_empty() {
        return Err(CliError::validation("no features given"));
    }
    let dataset = load_dataset(&features_csv_path, &labels_csv_path, LabelMethod::Expert)?;
    let matrix = DesignMatrix::from_dataset(&dataset, &names).map_err(CliError::from)?;
    let spec = ClassifierSpec::with_defaults(kind, seed);
    let model = eegstress::classify::train(&spec, &matrix.rows, &matrix.labels)?;
    write_text(&out, &model.to_json())?;
    println!(
        "trained {} on {} rows × {} features -> {}",
        kind.short_name(),
        matrix.rows.len(),
        names.len(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    features_csv_path: PathBuf,
    labels_csv_path: PathBuf,
    classifiers: &str,
    feature_sets_raw: &str,
    folds: usize,
    cv_seed: u64,
    train_seed: u64,
    no_stratify: bool,
    out_dir: PathBuf,
) -> CliResult<()> {
    let kinds = parse_classifiers(classifiers)?;
    let sets = parse_feature_sets(feature_sets_raw).map_err(CliError::validation)?;
    let dataset = load_dataset(&features_csv_path, &labels_csv_path, LabelMethod::Expert)?;
    let plan = make_folds(&dataset, folds, cv_seed, !no_stratify)?;

    let mut evaluations = Vec::new();
    for set in &sets {
        let matrix = DesignMatrix::from_dataset(&dataset, set)?;
        for kind in &kinds {
            let spec = ClassifierSpec::with_defaults(*kind, train_seed);
            evaluations.push(cross_validate(&spec, &matrix, &plan)?);
        }
    }

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::validation(format!("creating {}: {e}", out_dir.display())))?;
    let document = EvaluationDocument {
        format_version: EVALUATION_FORMAT_VERSION,
        config: RunConfig {
            classifiers: kinds.clone(),
            feature_sets: Some(sets.clone()),
            fold_count: folds,
            cv_seed,
            train_seed,
            stratified: !no_stratify,
            ..RunConfig::default()
        },
        selected_features: Vec::new(),
        ttest_table: Vec::new(),
        feature_sets: sets.clone(),
        evaluations,
    };
    write_text(
        &out_dir.join("evaluation_report.json"),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&document).expect("report json")
        ),
    )?;
    write_text(
        &out_dir.join("table2.csv"),
        &accuracy_table_csv(&sets, &kinds, &document.evaluations),
    )?;
    write_text(
        &out_dir.join("table3.csv"),
        &best_performers_csv(&kinds, &sets, &document.evaluations),
    )?;
    println!("wrote evaluation artifacts to {}", out_dir.display());
    Ok(())
}

fn cmd_report(cohort: CohortArgs, out_dir: PathBuf) -> CliResult<()> {
    let config = cohort_config(&cohort);
    let (recordings, manifest) = pipeline::load_cohort(&config)?;
    let (features, failures) = pipeline::extract_features(&recordings, &config);
    for (subject, msg) in &failures {
        eprintln!("warning: excluding {subject}: {msg}");
    }
    let scores = pipeline::pss_scores(&manifest);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::validation(format!("creating {}: {e}", out_dir.display())))?;
    if scores.len() >= 2 {
        let thresholds = eegstress::labeling::pss_thresholds(&scores, config.sd_convention)?;
        let bins = eegstress::report::pss_histogram(&scores, &thresholds);
        write_text(&out_dir.join("histogram.csv"), &histogram_csv(&bins))?;
    } else {
        eprintln!("warning: fewer than 2 PSS scores; histogram left empty");
        write_text(&out_dir.join("histogram.csv"), "score,count,class\n")?;
    }
    let rows = pipeline::boxplot_rows(&manifest, &features, &config)?;
    write_text(&out_dir.join("boxplots.csv"), &boxplots_csv(&rows))?;
    println!("wrote report statistics to {}", out_dir.display());
    Ok(())
}

fn cmd_run(config: RunConfig, out_dir: PathBuf, force: bool) -> CliResult<()> {
    let output = pipeline::run_pipeline(&config)?;
    for (subject, msg) in &output.extraction_failures {
        eprintln!("warning: excluded {subject}: {msg}");
    }

    let histogram = match (&output.thresholds, output.scores.len()) {
        (Some(thresholds), n) if n >= 1 => histogram_csv(&eegstress::report::pss_histogram(
            &output.scores,
            thresholds,
        )),
        _ => "score,count,class\n".to_string(),
    };

    let document = EvaluationDocument {
        format_version: EVALUATION_FORMAT_VERSION,
        config: config.clone(),
        selected_features: output.selected.clone(),
        ttest_table: output.ttest_table.clone(),
        feature_sets: output.feature_sets.clone(),
        evaluations: output.evaluations.clone(),
    };

    let files = vec![
        (
            "run_config.json",
            format!(
                "{}\n",
                serde_json::to_string_pretty(&config).expect("config json")
            ),
        ),
        ("features.csv", features_csv(&output.features)?),
        ("labels.csv", labels_csv(&output.outcomes)),
        ("ttest_report.csv", ttest_csv(&output.ttest_table)),
        (
            "evaluation_report.json",
            format!(
                "{}\n",
                serde_json::to_string_pretty(&document).expect("report json")
            ),
        ),
        (
            "table2.csv",
            accuracy_table_csv(
                &output.feature_sets,
                &config.classifiers,
                &output.evaluations,
            ),
        ),
        (
            "table3.csv",
            best_performers_csv(
                &config.classifiers,
                &output.feature_sets,
                &output.evaluations,
            ),
        ),
        ("histogram.csv", histogram),
        ("boxplots.csv", boxplots_csv(&output.boxplots)),
    ];
    pipeline::write_artifacts_atomically(&out_dir, force, &files)?;

    let best = output.evaluations.iter().max_by(|a, b| {
        a.metrics
            .accuracy_pct
            .partial_cmp(&b.metrics.accuracy_pct)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    println!(
        "dataset: {} rows ({} stress / {} control), {} excluded",
        output.dataset.rows.len(),
        output
            .dataset
            .class_count(eegstress::labeling::Label::Stress),
        output
            .dataset
            .class_count(eegstress::labeling::Label::Control),
        output.dataset.excluded.len()
    );
    println!(
        "selected features (p < {}): {}",
        config.alpha_level,
        if output.selected.is_empty() {
            "none".to_string()
        } else {
            output.selected.join(", ")
        }
    );
    if let Some(report) = best {
        println!(
            "best: {} on [{}] -> {:.2}% accuracy, kappa {:.3}",
            report.classifier.kind().short_name(),
            report.feature_names.join("+"),
            report.metrics.accuracy_pct,
            report.metrics.kappa
        );
    }
    println!("artifacts: {}", out_dir.display());
    Ok(())
}

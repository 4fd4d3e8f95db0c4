//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its runtime (visible with `--nocapture`).
//!
//! Run with `cargo test -p eegstress-cli --test acceptance`.

use std::time::{Duration, Instant};

use eegstress::classify::{
    knn_distance, train, ClassifierKind, ClassifierSpec, ModelParams, ModelState, SvmParams,
};
use eegstress::evaluate::{cross_validate, make_folds, metrics, DesignMatrix};
use eegstress::features::{
    alpha_asymmetry, build_feature_vector, frontal_alpha_asymmetry, temporal_alpha_asymmetry,
    FeatureConfig,
};
use eegstress::labeling::{
    assemble_dataset, label_by_expert, thresholds_from_moments, Label, LabelMethod, SdConvention,
};
use eegstress::preprocess::remove_baseline_offset;
use eegstress::selection::{select_features, t_test, TTestVariant};
use eegstress::spectral::{band_power, welch_psd, Band, BandDefinition};
use eegstress::synth::{generate_cohort, CohortSpec};

fn report(criterion: &str, start: Instant, budget: Duration) {
    let elapsed = start.elapsed();
    println!(
        "acceptance {criterion}: PASS ({:.3} s, budget {:.0} s)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(
        elapsed <= budget,
        "{criterion} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

/// Deterministic uniform stream in [0, 1).
struct Lcg(u64);

impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Criterion 1 — PSS threshold arithmetic: μ = 20.4, σ = 6.14 gives
/// thresholds (17.33, 23.47) within 0.005.
#[test]
fn criterion_1_pss_threshold_arithmetic() {
    let start = Instant::now();
    let thresholds = thresholds_from_moments(20.4, 6.14, SdConvention::Sample);
    assert!(
        (thresholds.t_low() - 17.33).abs() < 0.005,
        "t_low = {}",
        thresholds.t_low()
    );
    assert!(
        (thresholds.t_high() - 23.47).abs() < 0.005,
        "t_high = {}",
        thresholds.t_high()
    );
    report(
        "criterion 1 (threshold arithmetic)",
        start,
        Duration::from_millis(1),
    );
}

/// Criterion 2 — spectral correctness: the unit 10 Hz sine carries 0.5 ± 2%
/// total power with ≥ 99% inside alpha, and Parseval holds to 1e-6 on 100
/// seeded noise signals.
#[test]
fn criterion_2_spectral_correctness() {
    let start = Instant::now();

    let n = 23040; // 180 s at 128 Hz
    let sine: Vec<f64> = (0..n)
        .map(|i| (std::f64::consts::TAU * 10.0 * i as f64 / 128.0).sin())
        .collect();
    let psd = welch_psd(&sine, 128.0, 128, 0.5).unwrap();
    let full_band = BandDefinition {
        band: Band::Alpha,
        lo_hz: 0.0,
        hi_hz: 64.0,
    };
    let total = band_power(&psd, &full_band).unwrap();
    assert!((total - 0.5).abs() <= 0.01, "total power {total}");
    let alpha = band_power(&psd, &Band::Alpha.definition()).unwrap();
    assert!(alpha / total >= 0.99, "alpha fraction {}", alpha / total);

    // Parseval on 100 seeded noise signals: integral of the one-sided PSD
    // equals the mean windowed-segment variance, recomputed directly.
    let window: Vec<f64> = (0..128)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / 128.0).cos()))
        .collect();
    let window_energy: f64 = window.iter().map(|w| w * w).sum();
    for seed in 0..100u64 {
        let mut lcg = Lcg(seed * 7919 + 1);
        let samples: Vec<f64> = (0..1024).map(|_| lcg.next_f64() * 2.0 - 1.0).collect();
        let psd = welch_psd(&samples, 128.0, 128, 0.5).unwrap();
        let integral: f64 = psd.power.iter().sum::<f64>() * psd.freq_step_hz();
        let mut vars = Vec::new();
        let mut startpos = 0;
        while startpos + 128 <= samples.len() {
            let seg = &samples[startpos..startpos + 128];
            let mean = seg.iter().sum::<f64>() / 128.0;
            let energy: f64 = seg
                .iter()
                .zip(&window)
                .map(|(x, w)| ((x - mean) * w).powi(2))
                .sum();
            vars.push(energy / window_energy);
            startpos += 64;
        }
        let expected = vars.iter().sum::<f64>() / vars.len() as f64;
        assert!(
            ((integral - expected) / expected).abs() <= 1e-6,
            "seed {seed}: parseval {integral} vs {expected}"
        );
    }

    report(
        "criterion 2 (spectral correctness)",
        start,
        Duration::from_secs(5),
    );
}

/// Criterion 3 — asymmetry algebra on 1,000 randomized feature
/// computations: swap antisymmetry, scale invariance, α_a decomposition,
/// all to 1e-9.
#[test]
fn criterion_3_asymmetry_algebra() {
    let start = Instant::now();
    let mut lcg = Lcg(0xA5A5);
    for case in 0..1000 {
        let power = |lcg: &mut Lcg| 10f64.powf(lcg.next_f64() * 6.0 - 3.0); // 1e-3..1e3
        let (a3, a4) = (power(&mut lcg), power(&mut lcg));
        let (t7, t8) = (power(&mut lcg), power(&mut lcg));
        let scale = 10f64.powf(lcg.next_f64() * 4.0 - 2.0);

        let af = frontal_alpha_asymmetry(a3, a4).unwrap();
        let at = temporal_alpha_asymmetry(t7, t8).unwrap();
        let aa = alpha_asymmetry(af, at);

        // Channel swap negates each index.
        let af_swapped = frontal_alpha_asymmetry(a4, a3).unwrap();
        let at_swapped = temporal_alpha_asymmetry(t8, t7).unwrap();
        assert!((af_swapped + af).abs() <= 1e-9, "case {case}");
        assert!((at_swapped + at).abs() <= 1e-9, "case {case}");

        // Scaling all powers by a² (any positive factor) changes nothing.
        let af_scaled = frontal_alpha_asymmetry(a3 * scale, a4 * scale).unwrap();
        let at_scaled = temporal_alpha_asymmetry(t7 * scale, t8 * scale).unwrap();
        assert!((af_scaled - af).abs() <= 1e-9, "case {case}");
        assert!((at_scaled - at).abs() <= 1e-9, "case {case}");

        // Decomposition α_a = α_f + α_t.
        assert!((aa - (af + at)).abs() <= 1e-9, "case {case}");
        assert!((-1.0..=1.0).contains(&af) && (-1.0..=1.0).contains(&at));
        assert!((-2.0..=2.0).contains(&aa));
    }
    report(
        "criterion 3 (asymmetry algebra)",
        start,
        Duration::from_secs(5),
    );
}

/// Quadrature reference for the two-tailed t p-value: Simpson integration
/// of the unnormalized t density, normalization constant also by
/// quadrature.
fn p_value_by_quadrature(t: f64, dof: f64) -> f64 {
    let kernel = |u: f64| (1.0 + u * u / dof).powf(-(dof + 1.0) / 2.0);
    let tail = |lo: f64| -> f64 {
        let n = 100_001usize;
        let h = std::f64::consts::FRAC_PI_2 / (n - 1) as f64;
        let f = |theta: f64| {
            let tan = theta.tan();
            kernel(lo + tan) * (1.0 + tan * tan)
        };
        let mut sum = f(0.0);
        for i in 1..n - 1 {
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        sum * h / 3.0
    };
    (tail(t.abs()) / tail(0.0)).clamp(0.0, 1.0)
}

/// Criterion 4 — t-test fidelity: 50 randomized group pairs, p within 1e-6
/// of the quadrature reference.
#[test]
fn criterion_4_ttest_fidelity() {
    let start = Instant::now();
    let mut lcg = Lcg(0xBEEF);
    for case in 0..50 {
        let na = 3 + (case * 7 + 1) % 10;
        let nb = 3 + (case * 3 + 2) % 12;
        let offset = lcg.next_f64() * 3.0;
        let a: Vec<f64> = (0..na).map(|_| lcg.next_f64() * 8.0).collect();
        let b: Vec<f64> = (0..nb).map(|_| lcg.next_f64() * 8.0 + offset).collect();
        let result = t_test(&a, &b, TTestVariant::Welch).unwrap();
        let expected = p_value_by_quadrature(result.t_stat, result.dof);
        assert!(
            (result.p_value - expected).abs() <= 1e-6,
            "case {case}: p {} vs quadrature {expected}",
            result.p_value
        );
    }
    report(
        "criterion 4 (t-test fidelity)",
        start,
        Duration::from_secs(5),
    );
}

/// Criterion 5 — classifier oracles: SVM kernel expansion to 1e-8, MLP
/// gradients against central differences to 1e-6 relative, KNN distances
/// against a naive loop to 1e-12, NB parameter recovery within 3 SE.
#[test]
fn criterion_5_classifier_oracles() {
    let start = Instant::now();

    // SVM decision values against the explicit expansion on 20 points.
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..10 {
        let t = i as f64 * 0.41;
        x.push(vec![1.2 + t.sin() * 0.8, 0.9 + t.cos() * 0.6]);
        y.push(Label::Stress);
        x.push(vec![-1.1 - t.cos() * 0.7, -0.8 + (t * 1.3).sin() * 0.5]);
        y.push(Label::Control);
    }
    let svm_spec = ClassifierSpec {
        params: ModelParams::Svm(SvmParams::default()),
        seed: 3,
    };
    let model = train(&svm_spec, &x, &y).unwrap();
    let state = match &model.state {
        ModelState::Svm(s) => s,
        _ => unreachable!(),
    };
    for probe in &x {
        let z = model.scaler.transform(probe);
        let mut oracle = state.bias;
        for sv in &state.support {
            let dot: f64 = sv.x.iter().zip(&z).map(|(a, b)| a * b).sum();
            oracle += sv.alpha_y * dot;
        }
        let got = model.svm_decision_value(probe).unwrap();
        assert!((got - oracle).abs() <= 1e-8, "svm {got} vs {oracle}");
    }

    // MLP backprop against central finite differences (step 1e-5).
    let mut lcg = Lcg(0x31415);
    let grad_x: Vec<Vec<f64>> = (0..8)
        .map(|_| (0..3).map(|_| lcg.next_f64() * 2.0 - 1.0).collect())
        .collect();
    let grad_t: Vec<f64> = (0..8).map(|i| (i % 2) as f64).collect();
    let net = eegstress::classify::MlpNet::init(3, 5, 0.5, 27);
    let analytic = net.gradients(&grad_x, &grad_t);
    let step = 1e-5;
    let mut checked = 0usize;
    let mut check = |got: f64, perturb: &dyn Fn(&mut eegstress::classify::MlpNet, f64)| {
        let mut plus = net.clone();
        perturb(&mut plus, step);
        let mut minus = net.clone();
        perturb(&mut minus, -step);
        let numeric =
            (plus.mean_loss(&grad_x, &grad_t) - minus.mean_loss(&grad_x, &grad_t)) / (2.0 * step);
        let tol = (1e-6 * got.abs().max(numeric.abs())).max(1e-10);
        assert!((got - numeric).abs() <= tol, "gradient {got} vs {numeric}");
        checked += 1;
    };
    for j in 0..5 {
        for i in 0..3 {
            check(analytic.w_hidden[j][i], &move |n, e| n.w_hidden[j][i] += e);
        }
        check(analytic.b_hidden[j], &move |n, e| n.b_hidden[j] += e);
        check(analytic.w_out[j], &move |n, e| n.w_out[j] += e);
    }
    check(analytic.b_out, &|n, e| n.b_out += e);
    assert_eq!(checked, 26);

    // KNN distance against an explicit loop in 45 dimensions.
    let a: Vec<f64> = (0..45).map(|_| lcg.next_f64() * 20.0 - 10.0).collect();
    let b: Vec<f64> = (0..45).map(|_| lcg.next_f64() * 20.0 - 10.0).collect();
    let mut acc = 0.0;
    for k in 0..45 {
        acc += (a[k] - b[k]) * (a[k] - b[k]);
    }
    assert!((knn_distance(&a, &b).unwrap() - acc.sqrt()).abs() <= 1e-12);

    // NB recovers the generating Gaussians within three standard errors.
    let mut gauss_state = Lcg(0xD00D);
    let mut gauss = move |mean: f64, sd: f64| {
        let u1 = gauss_state.next_f64().max(f64::MIN_POSITIVE);
        let u2 = gauss_state.next_f64();
        mean + sd * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let n_per_class = 600;
    let stress_params = [(1.5, 0.9), (-0.5, 1.2)];
    let control_params = [(-0.4, 1.1), (0.8, 0.7)];
    let mut nx = Vec::new();
    let mut ny = Vec::new();
    for _ in 0..n_per_class {
        nx.push(
            stress_params
                .iter()
                .map(|&(m, s)| gauss(m, s))
                .collect::<Vec<_>>(),
        );
        ny.push(Label::Stress);
        nx.push(
            control_params
                .iter()
                .map(|&(m, s)| gauss(m, s))
                .collect::<Vec<_>>(),
        );
        ny.push(Label::Control);
    }
    let nb = train(
        &ClassifierSpec::with_defaults(ClassifierKind::NaiveBayes, 0),
        &nx,
        &ny,
    )
    .unwrap();
    let nb_state = match &nb.state {
        ModelState::NaiveBayes(s) => s,
        _ => unreachable!(),
    };
    let nf = n_per_class as f64;
    for (class, params) in [(0usize, control_params), (1usize, stress_params)] {
        for (feat, &(m, s)) in params.iter().enumerate() {
            let mean_hat =
                nb_state.means[class][feat] * nb.scaler.sds[feat] + nb.scaler.means[feat];
            let var_hat = nb_state.variances[class][feat] * nb.scaler.sds[feat].powi(2);
            assert!(
                (mean_hat - m).abs() <= 3.0 * s / nf.sqrt(),
                "class {class} feat {feat}: mean {mean_hat} vs {m}"
            );
            assert!(
                (var_hat - s * s).abs() <= 3.0 * s * s * (2.0 / (nf - 1.0)).sqrt(),
                "class {class} feat {feat}: var {var_hat} vs {}",
                s * s
            );
        }
    }

    report(
        "criterion 5 (classifier oracles)",
        start,
        Duration::from_secs(30),
    );
}

/// Criterion 6 — pipeline-level qualitative reproduction: with an injected
/// right-alpha effect, SVM on alpha_asym alone reaches ≥ 85% accuracy in at
/// least 8 of 10 seeds and alpha_asym is t-test-selected in at least 9 of
/// 10; with the effect removed, accuracy and kappa stay at chance level
/// across seeds.
#[test]
fn criterion_6_pipeline_reproduction() {
    let start = Instant::now();

    let run_seed = |seed: u64, effect: f64| -> (f64, f64, bool) {
        let spec = CohortSpec {
            n_stress: 10,
            n_control: 10,
            n_neutral: 0,
            duration_s: 60.0,
            asymmetry_effect: effect,
            noise_sd_uv: 2.0,
            seed,
            ..CohortSpec::default()
        };
        let (recordings, manifest) = generate_cohort(&spec).unwrap();
        let features: Vec<_> = recordings
            .iter()
            .map(|rec| {
                build_feature_vector(&remove_baseline_offset(rec), &FeatureConfig::default())
                    .unwrap()
            })
            .collect();
        let outcomes = label_by_expert(&manifest);
        let dataset = assemble_dataset(LabelMethod::Expert, &outcomes, &features);
        let (selected, _) = select_features(&dataset, 0.05, TTestVariant::Welch).unwrap();
        let alpha_selected = selected.iter().any(|s| s == "alpha_asym");

        let matrix = DesignMatrix::from_dataset(&dataset, &["alpha_asym".to_string()]).unwrap();
        let plan = make_folds(&dataset, 10, seed, true).unwrap();
        let svm = ClassifierSpec::with_defaults(ClassifierKind::Svm, seed);
        let result = cross_validate(&svm, &matrix, &plan).unwrap();
        (
            result.metrics.accuracy_pct,
            result.metrics.kappa,
            alpha_selected,
        )
    };

    // Injected effect: asymmetry_effect = 2, moderate noise.
    let mut high_accuracy_seeds = 0;
    let mut selected_seeds = 0;
    for seed in 0..10 {
        let (acc, _, selected) = run_seed(seed, 2.0);
        println!("  effect seed {seed}: accuracy {acc:.1}%, alpha_asym selected: {selected}");
        if acc >= 85.0 {
            high_accuracy_seeds += 1;
        }
        if selected {
            selected_seeds += 1;
        }
    }
    assert!(
        high_accuracy_seeds >= 8,
        "only {high_accuracy_seeds}/10 seeds reached 85% accuracy"
    );
    assert!(
        selected_seeds >= 9,
        "alpha_asym selected in only {selected_seeds}/10 seeds"
    );

    // Null effect: accuracy stays within 50% ± 15 and kappa within ±0.3
    // across seeds. These frozen seeds satisfy the bounds individually, so
    // both the per-seed values and their means are asserted.
    let mut accs = Vec::new();
    let mut kappas = Vec::new();
    for seed in 0..10 {
        let (acc, kappa, _) = run_seed(seed, 1.0);
        println!("  null seed {seed}: accuracy {acc:.1}%, kappa {kappa:.3}");
        assert!(
            (35.0..=65.0).contains(&acc),
            "null seed {seed}: accuracy {acc} escaped 50 ± 15"
        );
        assert!(
            kappa.abs() <= 0.3 + 1e-12,
            "null seed {seed}: kappa {kappa} escaped 0 ± 0.3"
        );
        accs.push(acc);
        kappas.push(kappa);
    }
    let mean_acc = accs.iter().sum::<f64>() / accs.len() as f64;
    let mean_kappa = kappas.iter().sum::<f64>() / kappas.len() as f64;
    println!("  null means: accuracy {mean_acc:.1}%, kappa {mean_kappa:.3}");
    assert!(
        (35.0..=65.0).contains(&mean_acc),
        "null accuracy {mean_acc} escaped 50 ± 15"
    );
    assert!(
        mean_kappa.abs() <= 0.3 + 1e-12,
        "null kappa {mean_kappa} escaped 0 ± 0.3"
    );

    report(
        "criterion 6 (pipeline reproduction)",
        start,
        Duration::from_secs(120),
    );
}

/// Criterion 7 — metric correctness: the constructed 20-prediction example
/// reproduces the hand-computed values; perfect and constant predictors hit
/// their closed forms.
#[test]
fn criterion_7_metric_correctness() {
    let start = Instant::now();

    // TP=7 (p=0.8), FN=3 (p=0.4), TN=8 (p=0.1), FP=2 (p=0.7).
    let mut pred = Vec::new();
    let mut probs = Vec::new();
    let mut truth = Vec::new();
    let mut push = |n: usize, t: Label, p: Label, prob: f64| {
        for _ in 0..n {
            truth.push(t);
            pred.push(p);
            probs.push(prob);
        }
    };
    push(7, Label::Stress, Label::Stress, 0.8);
    push(3, Label::Stress, Label::Control, 0.4);
    push(8, Label::Control, Label::Control, 0.1);
    push(2, Label::Control, Label::Stress, 0.7);
    let m = metrics(&pred, &probs, &truth).unwrap();
    assert_eq!(m.accuracy_pct, 75.0);
    assert_eq!(m.kappa, 0.5);
    assert!((m.f_measure - (0.5 * 14.0 / 19.0 + 0.5 * 16.0 / 21.0)).abs() < 1e-12);
    assert!((m.mae - 0.27).abs() < 1e-12);
    assert!((m.rmae - 0.121f64.sqrt()).abs() < 1e-12);

    // Perfect predictor.
    let truth: Vec<Label> = (0..10)
        .map(|i| if i < 5 { Label::Stress } else { Label::Control })
        .collect();
    let probs: Vec<f64> = truth
        .iter()
        .map(|&t| if t == Label::Stress { 1.0 } else { 0.0 })
        .collect();
    let m = metrics(&truth.clone(), &probs, &truth).unwrap();
    assert_eq!(
        (m.accuracy_pct, m.kappa, m.f_measure, m.mae, m.rmae),
        (100.0, 1.0, 1.0, 0.0, 0.0)
    );

    // Constant predictor on a balanced set: kappa exactly 0.
    let pred = vec![Label::Control; 10];
    let probs = vec![0.5; 10];
    let m = metrics(&pred, &probs, &truth).unwrap();
    assert_eq!(m.kappa, 0.0);
    assert!(!m.kappa_degenerate);
    assert_eq!(m.mae, 0.5);
    assert_eq!(m.rmae, 0.5);

    report(
        "criterion 7 (metric correctness)",
        start,
        Duration::from_secs(1),
    );
}

/// Criterion 8 — determinism: two end-to-end `run` invocations with the
/// same configuration and seeds produce bitwise-identical artifact
/// directories.
#[test]
fn criterion_8_run_determinism() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_eegstress");

    let run = |out: &std::path::Path| {
        let status = std::process::Command::new(bin)
            .args([
                "run",
                "--synth-seed",
                "11",
                "--cv-seed",
                "7",
                "--train-seed",
                "13",
            ])
            .arg("--out")
            .arg(out)
            .status()
            .expect("spawning eegstress");
        assert!(status.success(), "run failed");
    };
    let dir_a = tmp.path().join("a");
    let dir_b = tmp.path().join("b");
    run(&dir_a);
    run(&dir_b);

    let mut names_a: Vec<String> = std::fs::read_dir(&dir_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names_a.sort();
    let mut names_b: Vec<String> = std::fs::read_dir(&dir_b)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names_b.sort();
    assert_eq!(names_a, names_b);
    assert!(!names_a.is_empty());
    for name in &names_a {
        let a = std::fs::read(dir_a.join(name)).unwrap();
        let b = std::fs::read(dir_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
    println!(
        "  {} artifacts byte-identical: {}",
        names_a.len(),
        names_a.join(", ")
    );

    report(
        "criterion 8 (run determinism)",
        start,
        Duration::from_secs(120),
    );
}

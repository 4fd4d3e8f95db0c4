//! End-to-end pipeline runs on synthetic cohorts: generation → offset
//! removal → feature extraction → labelling → selection → cross-validation.

use eegstress::classify::{ClassifierKind, ClassifierSpec};
use eegstress::evaluate::{cross_validate, make_folds, DesignMatrix};
use eegstress::features::{build_feature_vector, FeatureConfig, FeatureVector};
use eegstress::ingest::ExpertLabel;
use eegstress::labeling::{
    assemble_dataset, label_by_expert, label_by_pss, pss_thresholds, score_pss, LabelMethod,
    PssScore, SdConvention,
};
use eegstress::preprocess::remove_baseline_offset;
use eegstress::selection::{select_features, TTestVariant};
use eegstress::synth::{generate_cohort, CohortSpec};

fn extract_features(spec: &CohortSpec) -> (Vec<FeatureVector>, eegstress::ingest::SubjectManifest) {
    let (recordings, manifest) = generate_cohort(spec).unwrap();
    let features = recordings
        .iter()
        .map(|rec| {
            let clean = remove_baseline_offset(rec);
            build_feature_vector(&clean, &FeatureConfig::default()).unwrap()
        })
        .collect();
    (features, manifest)
}

#[test]
fn thirty_three_subjects_yield_45_features_each() {
    let spec = CohortSpec {
        n_stress: 10,
        n_control: 10,
        n_neutral: 13,
        duration_s: 16.0,
        ..CohortSpec::default()
    };
    let (features, manifest) = extract_features(&spec);
    assert_eq!(features.len(), 33);
    let expected_names: Vec<String> = eegstress::features::feature_names(
        &eegstress::ingest::DEFAULT_MONTAGE
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>(),
    );
    for fv in &features {
        assert_eq!(fv.len(), 45);
        let names: Vec<&str> = fv.names().collect();
        assert_eq!(
            names,
            expected_names
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
        );
        assert!(fv.values().all(|v| v.is_finite()));
    }
    assert_eq!(manifest.entries.len(), 33);
}

#[test]
fn injected_alpha_effect_is_selected_and_classified() {
    let spec = CohortSpec {
        n_stress: 8,
        n_control: 8,
        n_neutral: 0,
        duration_s: 16.0,
        asymmetry_effect: 2.0,
        noise_sd_uv: 1.5,
        seed: 42,
        ..CohortSpec::default()
    };
    let (features, manifest) = extract_features(&spec);

    // Expert labelling path.
    let outcomes = label_by_expert(&manifest);
    let dataset = assemble_dataset(LabelMethod::Expert, &outcomes, &features);
    assert_eq!(dataset.rows.len(), 16);

    // The injected alpha-asymmetry difference must be picked up by the
    // t-test at the 0.05 level.
    let (selected, table) = select_features(&dataset, 0.05, TTestVariant::Welch).unwrap();
    assert_eq!(table.len(), 45);
    assert!(
        selected.iter().any(|name| name == "alpha_asym"),
        "selected: {selected:?}"
    );

    // And a linear SVM on alpha_asym alone should separate the groups.
    let dm = DesignMatrix::from_dataset(&dataset, &["alpha_asym".to_string()]).unwrap();
    let plan = make_folds(&dataset, 8, 7, true).unwrap();
    let spec = ClassifierSpec::with_defaults(ClassifierKind::Svm, 1);
    let report = cross_validate(&spec, &dm, &plan).unwrap();
    assert!(
        report.metrics.accuracy_pct >= 85.0,
        "accuracy {}",
        report.metrics.accuracy_pct
    );
    assert_eq!(report.confusion.total(), 16);
}

#[test]
fn pss_and_expert_paths_agree_on_generated_cohorts() {
    let spec = CohortSpec {
        n_stress: 6,
        n_control: 6,
        n_neutral: 5,
        duration_s: 16.0,
        seed: 3,
        ..CohortSpec::default()
    };
    let (features, manifest) = extract_features(&spec);

    let scores: Vec<PssScore> = manifest
        .entries
        .iter()
        .map(|e| PssScore {
            subject_id: e.subject_id.clone(),
            total: score_pss(&e.pss_items.unwrap()),
        })
        .collect();
    let thresholds = pss_thresholds(&scores, SdConvention::Sample).unwrap();
    let pss_outcomes = label_by_pss(&scores, &thresholds);
    let pss_ds = assemble_dataset(LabelMethod::PssThreshold, &pss_outcomes, &features);

    let expert_outcomes = label_by_expert(&manifest);
    let expert_ds = assemble_dataset(LabelMethod::Expert, &expert_outcomes, &features);

    // The generator draws PSS totals consistent with the expert labels, so
    // the two labelled datasets coincide row for row on this cohort.
    assert_eq!(pss_ds.rows.len(), expert_ds.rows.len());
    for (a, b) in pss_ds.rows.iter().zip(&expert_ds.rows) {
        assert_eq!(a.subject_id, b.subject_id);
        assert_eq!(a.label, b.label);
    }
    assert_eq!(pss_ds.excluded.len(), 5);
    assert_eq!(expert_ds.excluded.len(), 5);
}

#[test]
fn all_five_classifiers_run_on_a_synthetic_cohort() {
    let spec = CohortSpec {
        n_stress: 6,
        n_control: 6,
        n_neutral: 0,
        duration_s: 16.0,
        asymmetry_effect: 2.0,
        noise_sd_uv: 1.0,
        seed: 9,
        ..CohortSpec::default()
    };
    let (features, manifest) = extract_features(&spec);
    let outcomes = label_by_expert(&manifest);
    let dataset = assemble_dataset(LabelMethod::Expert, &outcomes, &features);
    let dm = DesignMatrix::from_dataset(&dataset, &["alpha_asym".to_string()]).unwrap();
    let plan = make_folds(&dataset, 6, 2, true).unwrap();
    for kind in ClassifierKind::ALL {
        let spec = ClassifierSpec::with_defaults(kind, 11);
        let report = cross_validate(&spec, &dm, &plan).unwrap();
        assert_eq!(report.confusion.total(), 12, "{kind:?}");
        assert!(report.metrics.accuracy_pct >= 50.0, "{kind:?} below chance");
        let m = report.metrics;
        assert!((0.0..=100.0).contains(&m.accuracy_pct));
        assert!(m.kappa <= 1.0);
        assert!((0.0..=1.0).contains(&m.f_measure));
        assert!(m.mae >= 0.0 && m.rmae >= 0.0);
    }
}

#[test]
fn stress_subjects_separate_from_controls_in_alpha_asym() {
    let spec = CohortSpec {
        n_stress: 5,
        n_control: 5,
        n_neutral: 0,
        duration_s: 16.0,
        asymmetry_effect: 2.0,
        noise_sd_uv: 0.5,
        seed: 21,
        ..CohortSpec::default()
    };
    let (features, manifest) = extract_features(&spec);
    for (fv, entry) in features.iter().zip(&manifest.entries) {
        let aa = fv.get("alpha_asym").unwrap();
        match entry.expert_label {
            ExpertLabel::Stress => assert!(aa > 0.5, "{}: α_a = {aa}", entry.subject_id),
            _ => assert!(aa.abs() < 0.5, "{}: α_a = {aa}", entry.subject_id),
        }
    }
    // Band powers on the right side quadruple for stress subjects.
    let stress_alpha = features[0].get("alpha_AF4").unwrap();
    let control_alpha = features[manifest
        .entries
        .iter()
        .position(|e| e.expert_label == ExpertLabel::Control)
        .unwrap()]
    .get("alpha_AF4")
    .unwrap();
    let ratio = stress_alpha / control_alpha;
    assert!((ratio - 4.0).abs() < 0.5, "power ratio {ratio}");
}

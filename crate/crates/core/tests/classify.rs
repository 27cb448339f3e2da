mod common;

use common::zoo;
use finsler::classify::{classify, Label};
use finsler::config::Tolerances;
use finsler::sampling::{SamplePlan, YMode};
use finsler::{CurvatureEngine, VolumeForm};
use serde_json::{json, Value};

fn labels(name: &str, params: Value, plan: &SamplePlan) -> Vec<Label> {
    let engine = CurvatureEngine::new(zoo(name, params), VolumeForm::busemann_hausdorff());
    classify(&engine, plan, &Tolerances::default()).unwrap().labels.into_iter().collect()
}

#[test]
fn berwald_metrics_get_every_label() {
    for (name, params) in [
        ("euclidean", json!({})),
        ("riemannian_warped", json!({"n": 3})),
        ("randers_const", json!({})),
        ("randers_parallel", json!({})),
        ("alpha_beta_parallel3", json!({})),
    ] {
        let got = labels(name, params, &SamplePlan::default());
        assert_eq!(got, Label::ALL.to_vec(), "{name}");
    }
}

#[test]
fn funk_is_isotropic_but_not_landsberg() {
    for n in [2, 3] {
        let got = labels("funk", json!({"n": n}), &SamplePlan::default());
        assert_eq!(got, vec![Label::IsotropicE, Label::WeakIsotropicS], "n={n}");
    }
}

#[test]
fn generic_randers_has_no_label() {
    for n in [2, 3] {
        let got = labels("randers_generic", json!({"n": n}), &SamplePlan::default());
        assert!(got.is_empty(), "n={n}: {got:?}");
    }
}

#[test]
fn labels_do_not_depend_on_the_length_of_y() {
    let scaled = SamplePlan {
        y_mode: YMode::Scaled,
        ..SamplePlan::default()
    };
    for (name, params) in [("funk", json!({})), ("randers_generic", json!({})), ("minkowski_quartic", json!({}))] {
        assert_eq!(
            labels(name, params.clone(), &SamplePlan::default()),
            labels(name, params, &scaled),
            "{name}"
        );
    }
}

#[test]
fn result_serializes_with_residuals() {
    let engine = CurvatureEngine::new(zoo("funk", json!({})), VolumeForm::busemann_hausdorff());
    let r = classify(&engine, &SamplePlan::default(), &Tolerances::default()).unwrap();
    assert!(r.has(Label::IsotropicE));
    assert_eq!(r.residuals.len(), Label::ALL.len());
    let v: Value = serde_json::to_value(&r).unwrap();
    assert!(v["labels"].is_array());
    assert!(!r.note.is_empty());
}

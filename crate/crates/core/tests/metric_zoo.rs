mod common;

use common::{max_abs, zoo, zoo_fixtures};
use finsler::config::RunConfig;
use finsler::metric::{fundamental_tensor, validate, FailureKind};
use finsler::sampling::SamplePlan;
use finsler::zoo::catalog;
use finsler::{CurvatureEngine, FinslerError, MetricSpec64, PointOnTM64, VolumeForm};
use serde_json::json;

fn point(x: &[f64], y: &[f64]) -> PointOnTM64 {
    PointOnTM64::new(x.to_vec(), y.to_vec()).unwrap()
}

#[test]
fn randers_constant_form_values() {
    let m = zoo("randers_const", json!({"b": [0.5, 0.0]}));
    let p = point(&[0.1, -0.2], &[1.0, 0.0]);
    assert!((m.eval(&p.x, &p.y).unwrap() - 1.5).abs() < 1e-14);
    let g = fundamental_tensor(&m, &p).unwrap();
    for (i, row) in [[2.25, 0.0], [0.0, 1.5]].iter().enumerate() {
        for j in 0..2 {
            assert!((g.g[i][j] - row[j]).abs() < 1e-12, "g[{i}][{j}] = {}", g.g[i][j]);
        }
    }
    assert!((g.detg - 3.375).abs() < 1e-12);
}

#[test]
fn every_catalog_entry_builds() {
    for z in catalog() {
        let m: MetricSpec64 = finsler::zoo::from_name(z.name, &Default::default()).unwrap();
        assert!(m.dim() >= 2, "{}", z.name);
    }
}

#[test]
fn unknown_zoo_name_is_a_config_error() {
    let err = finsler::zoo::from_name::<f64>("no_such_metric", &Default::default()).unwrap_err();
    assert!(matches!(err, FinslerError::Config(_)), "{err:?}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn zoo_samples_validate() {
    for (name, params) in zoo_fixtures() {
        let m = zoo(name, params);
        let pts: Vec<_> = SamplePlan::default()
            .draw(&m, &|_| true)
            .unwrap()
            .into_iter()
            .flat_map(|f| f.points)
            .collect();
        let v = validate(&m, &pts);
        assert!(v.passed, "{name}: {:?}", v.first_failure());
    }
}

#[test]
fn randers_with_long_form_is_not_strongly_convex() {
    let cfg = RunConfig::from_json(
        r#"{"metric": {"alpha_beta": {"a": [["1","0"],["0","1"]], "b": ["1.2","0"]}}}"#,
    )
    .unwrap();
    let m: MetricSpec64 = cfg.metric.build_unchecked().unwrap();
    let pts: Vec<_> = cfg
        .samples
        .draw(&m, &|_| true)
        .unwrap()
        .into_iter()
        .flat_map(|f| f.points)
        .collect();
    let v = validate(&m, &pts);
    assert!(!v.passed);
    assert!(v.has(FailureKind::NotStronglyConvex));
    assert!(cfg.metric.build::<f64>().is_err());
}

#[test]
fn funk_rejects_points_outside_the_ball() {
    let m = zoo("funk", json!({}));
    assert!(m.in_domain(&[0.3, 0.4]));
    assert!(!m.in_domain(&[0.8, 0.8]));
    let engine = CurvatureEngine::new(m, VolumeForm::busemann_hausdorff());
    let err = engine.geometry(&point(&[0.8, 0.8], &[1.0, 0.0])).unwrap_err();
    assert!(matches!(err, FinslerError::Domain { .. }), "{err:?}");
}

#[test]
fn zero_direction_is_rejected() {
    assert!(PointOnTM64::new(vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
}

#[test]
fn riemannian_metrics_have_vanishing_cartan_tensor() {
    for (name, params) in [("euclidean", json!({"n": 3})), ("riemannian_warped", json!({}))] {
        let engine = CurvatureEngine::new(zoo(name, params), VolumeForm::busemann_hausdorff());
        for fs in SamplePlan::default().draw(&engine.metric, &|_| true).unwrap() {
            for p in &fs.points {
                let g = engine.geometry(p).unwrap();
                assert!(max_abs(g.cartan.iter().flatten().flatten().copied()) < 1e-12, "{name}");
            }
        }
    }
}

#[test]
fn warped_spray_matches_christoffel_symbols() {
    // a = diag(exp(2x1), 1): Gamma^1_11 = 1, Gamma^2_11 = 0, G^i = Gamma^i_jk y^j y^k / 2
    let m = zoo("riemannian_warped", json!({}));
    let engine = CurvatureEngine::new(m, VolumeForm::busemann_hausdorff());
    let p = point(&[0.2, 0.1], &[0.7, -0.4]);
    let g = engine.geometry(&p).unwrap();
    assert!((g.spray[0] - 0.5 * 0.49).abs() < 1e-12, "{:?}", g.spray);
    assert!(g.spray[1].abs() < 1e-12);
}

mod common;

use finsler::{CurvatureEngine, PointOnTM, VolumeForm};

#[test]
fn single_precision_engine_runs() {
    let m = finsler::zoo::from_name::<f32>("funk", &Default::default()).unwrap();
    let engine = CurvatureEngine::new(m, VolumeForm::busemann_hausdorff());
    let p = PointOnTM::new(vec![0.2f32, -0.1], vec![0.6, 0.8]).unwrap();
    let b = engine.bundle(&p).unwrap();
    assert!((b.s_curvature.s_tilde - 1.5).abs() < 1e-3, "{}", b.s_curvature.s_tilde);
    assert!((b.geometry.berwald_scalar - 1.5).abs() < 1e-2, "{}", b.geometry.berwald_scalar);
}

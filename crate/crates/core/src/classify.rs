//! Metric classification from sampled curvature.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{FinslerError, Result};
use crate::metric::{max_abs_matrix, max_abs_t3, max_abs_t4};
use crate::sampling::SamplePlan;
use crate::spray::CurvatureEngine;
use crate::volume::fit_weak_isotropic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Berwald,
    Landsberg,
    WeakLandsberg,
    VanishingE,
    VanishingBerwaldScalar,
    /// `E = e/(n-1) h` with `e` constant along every sampled fiber.
    IsotropicE,
    WeakIsotropicS,
}

impl Label {
    pub const ALL: [Label; 7] = [
        Label::Berwald,
        Label::Landsberg,
        Label::WeakLandsberg,
        Label::VanishingE,
        Label::VanishingBerwaldScalar,
        Label::IsotropicE,
        Label::WeakIsotropicS,
    ];
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub algebraic: f64,
    pub quadrature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub metric: String,
    pub volume: String,
    pub labels: Vec<Label>,
    /// Largest scale-relative residual seen for each label's defining quantity.
    pub residuals: BTreeMap<Label, f64>,
    pub samples: usize,
    pub thresholds: Thresholds,
    /// Isotropy is certified only along sampled fibers.
    pub note: String,
}

impl ClassificationResult {
    pub fn has(&self, l: Label) -> bool {
        self.labels.contains(&l)
    }
}

/// Degree-0 normaliser: `1 + max|g_ij|`.
fn scale(g: &[Vec<f64>]) -> f64 {
    1.0 + max_abs_matrix(g)
}

pub fn classify(engine: &CurvatureEngine<f64>, plan: &SamplePlan, tol: &Tolerances) -> Result<ClassificationResult> {
    let fibers = plan.draw(&engine.metric, &|_| true)?;
    let mut worst: BTreeMap<Label, f64> = Label::ALL.iter().map(|&l| (l, 0.0)).collect();
    let mut bump = |l: Label, v: f64| {
        let w = worst.get_mut(&l).expect("all labels present");
        *w = if v.is_nan() { f64::INFINITY } else { w.max(v) };
    };
    let mut samples = 0;
    for fs in &fibers {
        let ls = engine.log_sigma(&fs.x)?;
        let mut e_range = (f64::INFINITY, f64::NEG_INFINITY);
        let mut s_samples = Vec::with_capacity(fs.points.len());
        let mut s_scale = 0.0f64;
        for p in &fs.points {
            // normalise onto the indicatrix so every measure is scale-free
            let f = engine.metric.eval(&p.x, &p.y)?;
            let p = p.scaled(1.0 / f);
            let b = engine.bundle_with(&p, &ls)?;
            let g = &b.geometry;
            let c = scale(&g.g);
            bump(Label::Berwald, max_abs_t4(&g.berwald) / c);
            bump(Label::Landsberg, max_abs_t3(&g.landsberg) / c);
            bump(Label::WeakLandsberg, g.mean_landsberg.iter().fold(0.0f64, |m, v| m.max(v.abs())) / c);
            bump(Label::VanishingE, max_abs_matrix(&g.mean_berwald) / c);
            bump(Label::VanishingBerwaldScalar, g.berwald_scalar.abs() / c);
            bump(Label::IsotropicE, g.isotropy_residual() / c);
            e_range = (e_range.0.min(g.berwald_scalar), e_range.1.max(g.berwald_scalar));
            s_scale = s_scale.max(b.s_curvature.s.abs());
            s_samples.push(b.s_curvature);
            samples += 1;
        }
        bump(Label::IsotropicE, (e_range.1 - e_range.0) / (1.0 + e_range.1.abs().max(e_range.0.abs())));
        let fit = fit_weak_isotropic(&engine.metric, &s_samples)?;
        bump(Label::WeakIsotropicS, fit.residual / (1.0 + s_scale));
    }
    let limit = |l: Label| match l {
        Label::WeakIsotropicS => tol.quadrature,
        _ => tol.algebraic,
    };
    let mut labels: Vec<Label> = Label::ALL
        .iter()
        .copied()
        .filter(|&l| worst[&l] < limit(l))
        .collect();
    // monotone closure of the implication chain
    let closure = [
        (Label::Berwald, Label::Landsberg),
        (Label::Landsberg, Label::WeakLandsberg),
        (Label::Berwald, Label::VanishingE),
        (Label::VanishingE, Label::VanishingBerwaldScalar),
        (Label::VanishingE, Label::IsotropicE),
    ];
    for _ in 0..closure.len() {
        for (a, b) in closure {
            if labels.contains(&a) && !labels.contains(&b) {
                labels.push(b);
            }
        }
    }
    labels.sort();
    if labels.contains(&Label::VanishingBerwaldScalar) && !labels.contains(&Label::VanishingE) {
        return Err(FinslerError::Inconsistency(format!(
            "e vanishes on all samples (max {:.3e}) but E does not (max {:.3e}); check tolerances",
            worst[&Label::VanishingBerwaldScalar],
            worst[&Label::VanishingE]
        )));
    }
    Ok(ClassificationResult {
        metric: engine.metric.label(),
        volume: engine.volume.label(),
        labels,
        residuals: worst,
        samples,
        thresholds: Thresholds {
            algebraic: tol.algebraic,
            quadrature: tol.quadrature,
        },
        note: "isotropy of E is certified along sampled fibers only".into(),
    })
}


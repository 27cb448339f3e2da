#![allow(dead_code)]

pub mod oracle;

use finsler::config::{MetricConfig, RunConfig};
use finsler::MetricSpec64;
use serde_json::{json, Value};

/// Every catalog fixture the suites iterate over.
pub fn zoo_fixtures() -> Vec<(&'static str, Value)> {
    vec![
        ("euclidean", json!({})),
        ("riemannian_warped", json!({})),
        ("minkowski_quartic", json!({})),
        ("randers_const", json!({})),
        ("randers_parallel", json!({})),
        ("randers_parallel3", json!({})),
        ("randers_generic", json!({})),
        ("randers_generic", json!({"n": 3})),
        ("alpha_beta_quadratic", json!({})),
        ("alpha_beta_parallel3", json!({})),
        ("funk", json!({})),
        ("funk", json!({"n": 3})),
    ]
}

/// Fixtures whose spray is affine in y.
pub fn berwald_fixtures() -> Vec<(&'static str, Value)> {
    vec![
        ("euclidean", json!({})),
        ("euclidean", json!({"n": 3})),
        ("riemannian_warped", json!({})),
        ("riemannian_warped", json!({"n": 3})),
        ("minkowski_quartic", json!({})),
        ("minkowski_quartic", json!({"n": 3})),
        ("randers_const", json!({})),
        ("randers_parallel", json!({})),
        ("randers_parallel3", json!({})),
        ("alpha_beta_quadratic", json!({})),
        ("alpha_beta_parallel3", json!({})),
    ]
}

pub fn zoo(name: &str, params: Value) -> MetricSpec64 {
    finsler::zoo::from_name(name, params.as_object().expect("object")).expect("zoo metric")
}

pub fn config(name: &str, params: Value) -> RunConfig {
    RunConfig::new(MetricConfig::zoo_with(name, params))
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

//! JSON run configuration shared by the CLI and the verification suite.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{FinslerError, Result};
use crate::metric::MetricSpec;
use crate::sampling::SamplePlan;
use crate::scalar::Real;
use crate::volume::VolumeForm;
use crate::zoo::{self, AlphaBetaMetric, AlphaBetaSpec, OneFormSpec, PhiSpec, RiemannSpec};

/// `a_ij(x)`, `b_i(x)` and `phi(s)` as expressions; `phi` defaults to the
/// Randers profile `1 + s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaBetaConfig {
    pub a: Vec<Vec<String>>,
    pub b: Vec<String>,
    #[serde(default = "default_phi")]
    pub phi: String,
}

fn default_phi() -> String {
    "1 + s".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricConfig {
    AlphaBeta { alpha_beta: AlphaBetaConfig },
    Zoo {
        zoo: String,
        #[serde(flatten)]
        params: Map<String, Value>,
    },
}

impl MetricConfig {
    pub fn zoo(name: &str) -> Self {
        MetricConfig::Zoo {
            zoo: name.into(),
            params: Map::new(),
        }
    }

    pub fn zoo_with(name: &str, params: Value) -> Self {
        MetricConfig::Zoo {
            zoo: name.into(),
            params: params.as_object().cloned().unwrap_or_default(),
        }
    }

    fn alpha_beta_spec<T: Real>(c: &AlphaBetaConfig) -> Result<AlphaBetaSpec<T>> {
        let n = c.b.len();
        if c.a.len() != n || c.a.iter().any(|r| r.len() != n) {
            return Err(FinslerError::Config(format!(
                "alpha_beta: a must be {n}x{n} to match b"
            )));
        }
        Ok(AlphaBetaSpec {
            alpha: RiemannSpec::from_exprs(&c.a)?,
            beta: OneFormSpec::from_exprs(&c.b)?,
            phi: PhiSpec::from_expr(&c.phi)?,
        })
    }

    /// Builds the metric and probes it for strong convexity.
    pub fn build<T: Real>(&self) -> Result<MetricSpec<T>> {
        match self {
            MetricConfig::Zoo { zoo, params } => zoo::from_name(zoo, params),
            MetricConfig::AlphaBeta { alpha_beta } => {
                zoo::build_alpha_beta(Self::alpha_beta_spec(alpha_beta)?, "alpha_beta")
            }
        }
    }

    /// Builds user-specified metrics without the construction probe, so that
    /// `validate` can report exactly where they fail.
    pub fn build_unchecked<T: Real>(&self) -> Result<MetricSpec<T>> {
        match self {
            MetricConfig::Zoo { .. } => self.build(),
            MetricConfig::AlphaBeta { alpha_beta } => Ok(MetricSpec::new(AlphaBetaMetric::new(
                Self::alpha_beta_spec(alpha_beta)?,
                "alpha_beta",
            )?)),
        }
    }
}

/// Per-identity tolerances and classification thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub mean_berwald_dual: f64,
    pub vertical_distortion: f64,
    pub e_isotropy: f64,
    pub chern_berwald: f64,
    pub homogeneity: f64,
    pub fiber_laplace: f64,
    pub fiber_schrodinger: f64,
    /// Vanishing threshold for purely algebraic quantities.
    pub algebraic: f64,
    /// Threshold for quantities that pass through the volume quadrature.
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            mean_berwald_dual: 1e-6,
            vertical_distortion: 1e-8,
            e_isotropy: 1e-5,
            chern_berwald: 1e-8,
            homogeneity: 1e-7,
            fiber_laplace: 1e-4,
            fiber_schrodinger: 1e-6,
            algebraic: 1e-7,
            quadrature: 1e-4,
        }
    }
}

fn default_volume() -> String {
    "bh".into()
}

fn default_fiber_nodes() -> usize {
    256
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricConfig,
    /// `"bh"`, `"ht"` or `"custom:<expr>"`.
    #[serde(default = "default_volume")]
    pub volume: String,
    /// Sphere quadrature resolution for the volume form.
    #[serde(default)]
    pub volume_resolution: Option<usize>,
    #[serde(default)]
    pub samples: SamplePlan,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Nodes on the indicatrix for the fiber identities (n = 2).
    #[serde(default = "default_fiber_nodes")]
    pub fiber_nodes: usize,
    /// Number of random one-forms for the Schroedinger-type family.
    #[serde(default = "default_xi_count")]
    pub xi_count: usize,
}

fn default_xi_count() -> usize {
    8
}

impl RunConfig {
    pub fn new(metric: MetricConfig) -> Self {
        RunConfig {
            metric,
            volume: default_volume(),
            volume_resolution: None,
            samples: SamplePlan::default(),
            tolerances: Tolerances::default(),
            fiber_nodes: default_fiber_nodes(),
            xi_count: default_xi_count(),
        }
    }

    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| FinslerError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| FinslerError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&src)
    }

    pub fn volume_form<T: Real>(&self) -> Result<VolumeForm<T>> {
        let mut v: VolumeForm<T> = self.volume.parse()?;
        v.resolution = self.volume_resolution;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_zoo_with_params() {
        let c = RunConfig::from_json(r#"{"metric": {"zoo": "randers_const", "b": [0.2, 0.1]}, "samples": {"seed": 7}}"#)
            .unwrap();
        assert_eq!(c.samples.seed, 7);
        assert_eq!(c.samples.count, 10);
        let m = c.metric.build::<f64>().unwrap();
        assert!((m.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap() - 1.2).abs() < 1e-15);
    }

    #[test]
    fn parses_alpha_beta() {
        let c = RunConfig::from_json(
            r#"{"metric": {"alpha_beta": {"a": [["1","0"],["0","1"]], "b": ["0.5", "0"]}}, "volume": "ht"}"#,
        )
        .unwrap();
        let m = c.metric.build::<f64>().unwrap();
        assert!((m.eval(&[0.3, 0.0], &[1.0, 0.0]).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(c.volume_form::<f64>().unwrap().label(), "ht");
    }

    #[test]
    fn rejects_unknown_fields_and_volumes() {
        assert!(RunConfig::from_json(r#"{"metric": {"zoo": "funk"}, "bogus": 1}"#).is_err());
        let c = RunConfig::from_json(r#"{"metric": {"zoo": "funk"}, "volume": "xyz"}"#).unwrap();
        assert!(matches!(c.volume_form::<f64>(), Err(FinslerError::Config(_))));
    }

    #[test]
    fn round_trips() {
        let c = RunConfig::new(MetricConfig::zoo_with("funk", serde_json::json!({"n": 3})));
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&s).unwrap(), c);
    }
}

//! Numerical Finsler geometry.
//!
//! The crate computes the standard curvature quantities of a Finsler metric
//! `F(x, y)` (fundamental tensor, Cartan tensor, spray, Berwald, Landsberg,
//! mean Berwald and S-curvature) pointwise, using exact truncated Taylor
//! arithmetic ([`jets`]) rather than finite differences. On top of that it
//! provides fiber analysis of two-dimensional indicatrices, metric
//! classification and a reproducible verification suite.
//!
//! All numerical code is generic over a scalar `T: Real` (`f32` or `f64`);
//! the `*64` aliases below are what the CLI and the verification layer use.

pub mod classify;
pub mod config;
pub mod error;
pub mod expr;
pub mod indicatrix;
pub mod jets;
pub mod linalg;
pub mod metric;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod spray;
pub mod verify;
pub mod volume;
pub mod zoo;

pub use error::{FinslerError, Result};
pub use jets::{Jet, JetSpace, MultiIndex};
pub use metric::{FinslerMetric, FundamentalTensor, MetricSpec, PointOnTM};
pub use scalar::Real;
pub use spray::{CurvatureBundle, CurvatureEngine, EngineOptions};
pub use volume::{SCurvatureSample, VolumeForm, VolumeKind};

pub type Jet64 = Jet<f64>;
pub type Jet32 = Jet<f32>;
pub type MetricSpec64 = MetricSpec<f64>;
pub type PointOnTM64 = PointOnTM<f64>;
pub type VolumeForm64 = VolumeForm<f64>;
pub type CurvatureBundle64 = CurvatureBundle<f64>;
pub type CurvatureEngine64 = CurvatureEngine<f64>;

//! Finsler metrics and the tensors built from `F^2` alone: fundamental
//! tensor, Cartan tensor, mean Cartan torsion and angular metric.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::jets::{Jet, JetSpace};
use crate::linalg::{invert_with_det, symmetric_eigenvalues, Matrix};
use crate::scalar::{max_abs, Real};

pub type Tensor3<T> = Vec<Vec<Vec<T>>>;
pub type Tensor4<T> = Vec<Vec<Vec<Vec<T>>>>;

/// Minimum Euclidean length of a fiber vector.
pub const MIN_Y_NORM: f64 = 1e-8;
/// Relative eigenvalue floor for strong convexity.
pub const CONVEXITY_FLOOR: f64 = 1e-10;

/// A Finsler function evaluated on jets.
///
/// `eval` receives `x` and `y` as jets over a common variable set and must
/// return `F(x, y)`, positively 1-homogeneous in `y`.
pub trait FinslerMetric<T: Real>: Send + Sync {
    fn dim(&self) -> usize;
    fn label(&self) -> String;
    fn eval(&self, x: &[Jet<T>], y: &[Jet<T>]) -> Result<Jet<T>>;
    /// Base-domain predicate; `y != 0` is checked separately.
    fn in_domain(&self, _x: &[T]) -> bool {
        true
    }
}

/// Shared handle to a metric; cheap to clone, immutable.
#[derive(Clone)]
pub struct MetricSpec<T> {
    inner: Arc<dyn FinslerMetric<T>>,
}

impl<T: Real> fmt::Debug for MetricSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetricSpec({}, n={})", self.label(), self.dim())
    }
}

impl<T: Real> MetricSpec<T> {
    pub fn new(metric: impl FinslerMetric<T> + 'static) -> Self {
        MetricSpec {
            inner: Arc::new(metric),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn label(&self) -> String {
        self.inner.label()
    }

    pub fn in_domain(&self, x: &[T]) -> bool {
        x.len() == self.dim() && self.inner.in_domain(x)
    }

    pub fn eval_jets(&self, x: &[Jet<T>], y: &[Jet<T>]) -> Result<Jet<T>> {
        self.inner.eval(x, y)
    }

    /// Plain evaluation of `F(x, y)`.
    pub fn eval(&self, x: &[T], y: &[T]) -> Result<T> {
        let n = self.dim();
        let space = JetSpace::get(2 * n, 0);
        let xs: Vec<_> = x.iter().map(|&v| Jet::constant(&space, v)).collect();
        let ys: Vec<_> = y.iter().map(|&v| Jet::constant(&space, v)).collect();
        Ok(self.inner.eval(&xs, &ys)?.value())
    }

    /// `F` as a jet in the `2n` variables `(x, y)` around `p`, truncated at `order`.
    /// Variable `i` is `x^i`, variable `n + i` is `y^i`.
    pub fn jet_at(&self, p: &PointOnTM<T>, order: usize) -> Result<Jet<T>> {
        self.check_point(p)?;
        let (xs, ys) = lift_point(p, order);
        let f = self.inner.eval(&xs, &ys)?;
        if !(f.value() > T::zero()) {
            return Err(FinslerError::domain(
                "metric",
                format!("F = {:e} is not positive at {p}", f.value().as_f64()),
            ));
        }
        Ok(f)
    }

    pub(crate) fn check_point(&self, p: &PointOnTM<T>) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(FinslerError::Config(format!(
                "point of dimension {} for a metric of dimension {}",
                p.dim(),
                self.dim()
            )));
        }
        if !self.inner.in_domain(&p.x) {
            return Err(FinslerError::domain(
                "metric",
                format!("x outside the domain of {}", self.label()),
            ));
        }
        Ok(())
    }
}

/// A point `(x, y)` of the slit tangent bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointOnTM<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Real> PointOnTM<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(FinslerError::Config(format!(
                "x has length {} but y has length {}",
                x.len(),
                y.len()
            )));
        }
        let norm = y.iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
        if !(norm >= T::lit(MIN_Y_NORM)) {
            return Err(FinslerError::domain("point", "|y| below 1e-8"));
        }
        Ok(PointOnTM { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn with_y(&self, y: Vec<T>) -> Result<Self> {
        PointOnTM::new(self.x.clone(), y)
    }

    pub fn scaled(&self, lambda: T) -> Self {
        PointOnTM {
            x: self.x.clone(),
            y: self.y.iter().map(|&v| v * lambda).collect(),
        }
    }
}

impl<T: Real> fmt::Display for PointOnTM<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x={:?} y={:?}", self.x, self.y)
    }
}

pub(crate) fn lift_point<T: Real>(p: &PointOnTM<T>, order: usize) -> (Vec<Jet<T>>, Vec<Jet<T>>) {
    let n = p.dim();
    let space = JetSpace::get(2 * n, order);
    let xs = (0..n).map(|i| Jet::variable(&space, i, p.x[i])).collect();
    let ys = (0..n).map(|i| Jet::variable(&space, n + i, p.y[i])).collect();
    (xs, ys)
}

/// `g_ij`, its inverse and determinant at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalTensor<T> {
    pub g: Matrix<T>,
    pub ginv: Matrix<T>,
    pub detg: T,
}

/// `(1/2) d^2 F^2 / dy^i dy^j` as jets, two orders below `f2`.
pub(crate) fn fundamental_jets<T: Real>(f2: &Jet<T>, n: usize) -> Result<Matrix<Jet<T>>> {
    let mut g = vec![Vec::with_capacity(n); n];
    for i in 0..n {
        let di = f2.derivative(n + i)?;
        for j in 0..n {
            g[i].push(di.derivative(n + j)?.scale(T::lit(0.5)));
        }
    }
    Ok(g)
}

pub(crate) fn values<T: Real>(m: &[Vec<Jet<T>>]) -> Matrix<T> {
    m.iter().map(|r| r.iter().map(Jet::value).collect()).collect()
}

/// Checks positive definiteness and the Euler identity `g(y, y) = F^2`.
pub(crate) fn check_fundamental<T: Real>(g: &Matrix<T>, y: &[T], f: T) -> Result<()> {
    let n = g.len();
    let trace = (0..n).fold(T::zero(), |s, i| s + g[i][i]);
    let ev = symmetric_eigenvalues(g);
    if !(ev[0] > T::lit(CONVEXITY_FLOOR) * trace.abs()) {
        return Err(FinslerError::NotStronglyConvex {
            min_eigenvalue: ev[0].as_f64(),
        });
    }
    let gyy = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .fold(T::zero(), |s, (i, j)| s + g[i][j] * y[i] * y[j]);
    if (gyy - f * f).abs() > T::tol(1e-10) * f * f {
        return Err(FinslerError::Inconsistency(format!(
            "Euler identity g(y,y) = F^2 violated: {:e} vs {:e}",
            gyy.as_f64(),
            (f * f).as_f64()
        )));
    }
    Ok(())
}

impl<T: Real> FundamentalTensor<T> {
    pub(crate) fn from_matrix(g: Matrix<T>, y: &[T], f: T) -> Result<Self> {
        check_fundamental(&g, y, f)?;
        let (ginv, detg) = invert_with_det(&g)?;
        Ok(FundamentalTensor { g, ginv, detg })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    /// `y_i = g_ij y^j`.
    pub fn lower(&self, y: &[T]) -> Vec<T> {
        crate::linalg::mat_vec(&self.g, y)
    }
}

/// Fiber-only tensors at one point.
#[derive(Clone, Debug)]
pub(crate) struct FiberTensors<T> {
    pub f: T,
    pub fundamental: FundamentalTensor<T>,
    pub cartan: Tensor3<T>,
    pub mean_cartan: Vec<T>,
    pub angular: Matrix<T>,
}

impl<T: Real> FiberTensors<T> {
    /// From the jet of `F` (order >= 3) at `p`.
    pub fn from_jet(f: &Jet<T>, p: &PointOnTM<T>) -> Result<Self> {
        let gj = fundamental_jets(&f.square(), p.dim())?;
        Self::from_g_jets(f.value(), &gj, p)
    }

    /// From the jets of `g_ij` (order >= 1) and the value of `F`.
    pub fn from_g_jets(fval: T, gj: &[Vec<Jet<T>>], p: &PointOnTM<T>) -> Result<Self> {
        let n = p.dim();
        let fundamental = FundamentalTensor::from_matrix(values(gj), &p.y, fval)?;
        let quarter_f = fval * T::lit(0.25);
        let mut cartan = vec![vec![vec![T::zero(); n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    // 2 g_ij,k = F^2_{y^i y^j y^k}
                    let d3 = gj[i][j].partial_vars(&[n + k])? * T::lit(2.0);
                    cartan[i][j][k] = quarter_f * d3;
                }
            }
        }
        let mean_cartan = contract_mean_cartan(&fundamental.ginv, &cartan, fval);
        let angular = angular_from(&fundamental, &p.y, fval);
        Ok(FiberTensors {
            f: fval,
            fundamental,
            cartan,
            mean_cartan,
            angular,
        })
    }
}

fn contract_mean_cartan<T: Real>(ginv: &Matrix<T>, a: &Tensor3<T>, f: T) -> Vec<T> {
    let n = ginv.len();
    (0..n)
        .map(|k| {
            let mut s = T::zero();
            for i in 0..n {
                for j in 0..n {
                    s = s + ginv[i][j] * a[i][j][k];
                }
            }
            s / f
        })
        .collect()
}

fn angular_from<T: Real>(ft: &FundamentalTensor<T>, y: &[T], f: T) -> Matrix<T> {
    let n = y.len();
    let yl = ft.lower(y);
    let f2 = f * f;
    (0..n)
        .map(|i| (0..n).map(|j| ft.g[i][j] - yl[i] * yl[j] / f2).collect())
        .collect()
}

/// `g_ij = (1/2) [F^2]_{y^i y^j}` with inverse and determinant.
pub fn fundamental_tensor<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<FundamentalTensor<T>> {
    let f = m.jet_at(p, 2)?;
    let gj = fundamental_jets(&f.square(), p.dim())?;
    FundamentalTensor::from_matrix(values(&gj), &p.y, f.value())
}

/// `A_ijk = (1/4) F [F^2]_{y^i y^j y^k}`.
pub fn cartan_tensor<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<Tensor3<T>> {
    Ok(FiberTensors::from_jet(&m.jet_at(p, 3)?, p)?.cartan)
}

/// Mean Cartan torsion `C_k = g^ij A_ijk / F` and `I_k = F C_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanCartan<T> {
    pub c: Vec<T>,
    pub i: Vec<T>,
}

pub fn mean_cartan<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<MeanCartan<T>> {
    let ft = FiberTensors::from_jet(&m.jet_at(p, 3)?, p)?;
    let i = ft.mean_cartan.iter().map(|&c| c * ft.f).collect();
    Ok(MeanCartan {
        c: ft.mean_cartan,
        i,
    })
}

/// `h_ij = g_ij - y_i y_j / F^2`.
pub fn angular_metric<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<Matrix<T>> {
    let f = m.jet_at(p, 2)?;
    let gj = fundamental_jets(&f.square(), p.dim())?;
    let ft = FundamentalTensor::from_matrix(values(&gj), &p.y, f.value())?;
    Ok(angular_from(&ft, &p.y, f.value()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Domain,
    NonPositive,
    NotStronglyConvex,
    Homogeneity,
    Evaluation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationFailure {
    pub sample: usize,
    pub kind: FailureKind,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub metric: String,
    pub samples: usize,
    pub passed: bool,
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn first_failure(&self) -> Option<&ValidationFailure> {
        self.failures.first()
    }

    pub fn has(&self, kind: FailureKind) -> bool {
        self.failures.iter().any(|f| f.kind == kind)
    }
}

/// Checks domain, strong convexity, positivity and homogeneity at each
/// sample. Never fails: problems are collected in the report.
pub fn validate<T: Real>(m: &MetricSpec<T>, samples: &[PointOnTM<T>]) -> ValidationReport {
    let mut failures = Vec::new();
    for (idx, p) in samples.iter().enumerate() {
        let mut push = |kind, detail: String| {
            failures.push(ValidationFailure {
                sample: idx,
                kind,
                detail,
            })
        };
        if p.dim() != m.dim() || !m.in_domain(&p.x) {
            push(FailureKind::Domain, format!("{p} outside the base domain"));
            continue;
        }
        let (xs, ys) = lift_point(p, 2);
        let f2 = match m.eval_jets(&xs, &ys) {
            Ok(f) => f.square(),
            Err(e) => {
                let kind = match e {
                    FinslerError::Domain { .. } => FailureKind::Domain,
                    _ => FailureKind::Evaluation,
                };
                push(kind, e.to_string());
                continue;
            }
        };
        let fval = match m.eval(&p.x, &p.y) {
            Ok(v) => v,
            Err(e) => {
                push(FailureKind::Evaluation, e.to_string());
                continue;
            }
        };
        match fundamental_jets(&f2, p.dim()) {
            Ok(gj) => {
                let g = values(&gj);
                let n = g.len();
                let trace = (0..n).fold(T::zero(), |s, i| s + g[i][i]);
                let ev = symmetric_eigenvalues(&g);
                if !(ev[0] > T::lit(CONVEXITY_FLOOR) * trace.abs()) {
                    push(
                        FailureKind::NotStronglyConvex,
                        format!("min eigenvalue {:e} at {p}", ev[0].as_f64()),
                    );
                }
            }
            Err(e) => push(FailureKind::Evaluation, e.to_string()),
        }
        if !(fval > T::zero()) {
            push(
                FailureKind::NonPositive,
                format!("F = {:e} at {p}", fval.as_f64()),
            );
            continue;
        }
        for lambda in [0.5, 2.0] {
            let l = T::lit(lambda);
            let q = p.scaled(l);
            match m.eval(&q.x, &q.y) {
                Ok(fl) if (fl - l * fval).abs() <= T::tol(1e-10) * l * fval.abs() => {}
                Ok(fl) => push(
                    FailureKind::Homogeneity,
                    format!(
                        "F(x, {lambda} y) = {:e}, expected {:e}",
                        fl.as_f64(),
                        (l * fval).as_f64()
                    ),
                ),
                Err(e) => push(FailureKind::Evaluation, e.to_string()),
            }
        }
    }
    ValidationReport {
        metric: m.label(),
        samples: samples.len(),
        passed: failures.is_empty(),
        failures,
    }
}

pub(crate) fn max_abs_matrix<T: Real>(m: &[Vec<T>]) -> T {
    max_abs(m.iter().flatten().copied())
}

pub(crate) fn max_abs_t3<T: Real>(t: &Tensor3<T>) -> T {
    max_abs(t.iter().flatten().flatten().copied())
}

pub(crate) fn max_abs_t4<T: Real>(t: &Tensor4<T>) -> T {
    max_abs(t.iter().flatten().flatten().flatten().copied())
}

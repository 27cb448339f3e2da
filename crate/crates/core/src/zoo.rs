//! Metric families: Riemannian, Minkowski norms, Randers and general
//! `(alpha, beta)`-metrics, and the Funk metric of the unit ball.

use std::sync::Arc;

use serde_json::{Map, Value};

use crate::error::{FinslerError, Result};
use crate::expr::{coord_index, Expr};
use crate::jets::{sum, Jet, JetSpace};
use crate::linalg::{dot, invert_with_det, Matrix};
use crate::metric::{validate, FinslerMetric, MetricSpec, PointOnTM};
use crate::sampling::fiber_directions;
use crate::scalar::Real;

/// A jet-liftable scalar field of the base coordinates.
pub type Field<T> = Arc<dyn Fn(&[Jet<T>]) -> Result<Jet<T>> + Send + Sync>;

fn constant_field<T: Real>(v: f64) -> Field<T> {
    Arc::new(move |x: &[Jet<T>]| Ok(Jet::constant(x[0].space(), T::lit(v))))
}

fn expr_field<T: Real>(src: &str, n: usize) -> Result<Field<T>> {
    let e = Expr::parse(src)?;
    for v in e.variables() {
        if coord_index(&v, n).is_none() {
            return Err(FinslerError::Config(format!(
                "unknown variable '{v}' in '{src}' (expected x1..x{n})"
            )));
        }
    }
    Ok(Arc::new(move |x: &[Jet<T>]| e.eval_coords(x)))
}

fn plain_coords<T: Real>(x: &[T]) -> Vec<Jet<T>> {
    let space = JetSpace::get(x.len(), 0);
    x.iter().map(|&v| Jet::constant(&space, v)).collect()
}

/// Symmetric positive-definite matrix field `a_ij(x)`.
#[derive(Clone)]
pub struct RiemannSpec<T> {
    entries: Vec<Vec<Field<T>>>,
}

impl<T: Real> RiemannSpec<T> {
    pub fn euclidean(n: usize) -> Self {
        let m: Matrix<f64> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::constant(&m)
    }

    pub fn constant(a: &Matrix<f64>) -> Self {
        RiemannSpec {
            entries: a
                .iter()
                .map(|r| r.iter().map(|&v| constant_field(v)).collect())
                .collect(),
        }
    }

    /// Entries given by closures; only the upper triangle is used.
    pub fn from_fields(entries: Vec<Vec<Field<T>>>) -> Self {
        RiemannSpec { entries }
    }

    pub fn from_exprs(a: &[Vec<String>]) -> Result<Self> {
        let n = a.len();
        let entries = a
            .iter()
            .map(|row| {
                if row.len() != n {
                    return Err(FinslerError::Config("matrix field must be square".into()));
                }
                row.iter().map(|s| expr_field(s, n)).collect()
            })
            .collect::<Result<_>>()?;
        Ok(RiemannSpec { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn eval(&self, x: &[Jet<T>]) -> Result<Matrix<Jet<T>>> {
        let n = self.dim();
        let mut out: Matrix<Jet<T>> = vec![Vec::with_capacity(n); n];
        for i in 0..n {
            for j in 0..n {
                let v = if j >= i {
                    (self.entries[i][j])(x)?
                } else {
                    out[j][i].clone()
                };
                out[i].push(v);
            }
        }
        Ok(out)
    }

    pub fn eval_values(&self, x: &[T]) -> Result<Matrix<T>> {
        Ok(self
            .eval(&plain_coords(x))?
            .iter()
            .map(|r| r.iter().map(Jet::value).collect())
            .collect())
    }
}

/// Covector field `b_i(x)`.
#[derive(Clone)]
pub struct OneFormSpec<T> {
    entries: Vec<Field<T>>,
}

impl<T: Real> OneFormSpec<T> {
    pub fn zero(n: usize) -> Self {
        Self::constant(&vec![0.0; n])
    }

    pub fn constant(b: &[f64]) -> Self {
        OneFormSpec {
            entries: b.iter().map(|&v| constant_field(v)).collect(),
        }
    }

    pub fn from_fields(entries: Vec<Field<T>>) -> Self {
        OneFormSpec { entries }
    }

    pub fn from_exprs(b: &[String]) -> Result<Self> {
        let n = b.len();
        Ok(OneFormSpec {
            entries: b.iter().map(|s| expr_field(s, n)).collect::<Result<_>>()?,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn eval(&self, x: &[Jet<T>]) -> Result<Vec<Jet<T>>> {
        self.entries.iter().map(|f| f(x)).collect()
    }

    pub fn eval_values(&self, x: &[T]) -> Result<Vec<T>> {
        Ok(self.eval(&plain_coords(x))?.iter().map(Jet::value).collect())
    }
}

/// The profile `phi(s)` of an `(alpha, beta)`-metric.
#[derive(Clone)]
pub struct PhiSpec<T> {
    f: Arc<dyn Fn(&Jet<T>) -> Result<Jet<T>> + Send + Sync>,
    label: String,
    /// Largest admissible `||beta||_alpha` (strict), if known.
    max_beta_norm: Option<f64>,
}

impl<T: Real> PhiSpec<T> {
    /// `phi(s) = 1 + s`.
    pub fn randers() -> Self {
        PhiSpec {
            f: Arc::new(|s: &Jet<T>| Ok(s.clone() + T::one())),
            label: "1+s".into(),
            max_beta_norm: Some(1.0 - 1e-6),
        }
    }

    /// `phi(s) = 1 + k s^2`, strongly convex while `k ||beta||^2 < 1`.
    pub fn quadratic(k: f64) -> Self {
        PhiSpec {
            f: Arc::new(move |s: &Jet<T>| Ok(s.square().scale(T::lit(k)) + T::one())),
            label: format!("1+{k}s^2"),
            max_beta_norm: Some((1.0 / k).sqrt() * (1.0 - 1e-6)),
        }
    }

    pub fn from_expr(src: &str) -> Result<Self> {
        let e = Expr::parse(src)?;
        for v in e.variables() {
            if v != "s" {
                return Err(FinslerError::Config(format!(
                    "phi may only use the variable s, found '{v}'"
                )));
            }
        }
        Ok(PhiSpec {
            f: Arc::new(move |s: &Jet<T>| e.eval(s, &|name| (name == "s").then(|| s.clone()))),
            label: src.to_string(),
            max_beta_norm: None,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_max_beta_norm(mut self, bound: Option<f64>) -> Self {
        self.max_beta_norm = bound;
        self
    }

    pub fn eval(&self, s: &Jet<T>) -> Result<Jet<T>> {
        (self.f)(s)
    }
}

#[derive(Clone)]
pub struct AlphaBetaSpec<T> {
    pub alpha: RiemannSpec<T>,
    pub beta: OneFormSpec<T>,
    pub phi: PhiSpec<T>,
}

/// `||beta||_alpha(x) = sqrt(a^ij b_i b_j)`.
pub fn beta_norm<T: Real>(spec: &AlphaBetaSpec<T>, x: &[T]) -> Result<T> {
    let a = spec.alpha.eval_values(x)?;
    let b = spec.beta.eval_values(x)?;
    let (ainv, _) = invert_with_det(&a)?;
    Ok(dot(&crate::linalg::mat_vec(&ainv, &b), &b).sqrt())
}

fn quadratic_form<T: Real>(a: &Matrix<Jet<T>>, y: &[Jet<T>]) -> Jet<T> {
    let n = y.len();
    sum((0..n).flat_map(|i| {
        (0..n).map(move |j| (i, j))
    }).map(|(i, j)| &a[i][j] * &y[i] * &y[j]))
    .expect("nonempty")
}

/// `F = alpha * phi(beta / alpha)`.
#[derive(Clone)]
pub struct AlphaBetaMetric<T> {
    spec: AlphaBetaSpec<T>,
    label: String,
}

impl<T: Real> AlphaBetaMetric<T> {
    pub fn new(spec: AlphaBetaSpec<T>, label: impl Into<String>) -> Result<Self> {
        if spec.alpha.dim() != spec.beta.dim() {
            return Err(FinslerError::Construction(
                "alpha and beta have different dimensions".into(),
            ));
        }
        Ok(AlphaBetaMetric {
            spec,
            label: label.into(),
        })
    }

    pub fn spec(&self) -> &AlphaBetaSpec<T> {
        &self.spec
    }
}

impl<T: Real> FinslerMetric<T> for AlphaBetaMetric<T> {
    fn dim(&self) -> usize {
        self.spec.alpha.dim()
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn eval(&self, x: &[Jet<T>], y: &[Jet<T>]) -> Result<Jet<T>> {
        let a = self.spec.alpha.eval(x)?;
        let b = self.spec.beta.eval(x)?;
        let alpha = quadratic_form(&a, y).sqrt()?;
        let beta = sum(b.iter().zip(y).map(|(bi, yi)| bi * yi)).expect("nonempty");
        let s = beta.checked_div(&alpha)?;
        Ok(&alpha * &self.spec.phi.eval(&s)?)
    }

    fn in_domain(&self, x: &[T]) -> bool {
        match self.spec.phi.max_beta_norm {
            Some(bound) => beta_norm(&self.spec, x).map_or(false, |b| b.as_f64() < bound),
            None => true,
        }
    }
}

/// `F = sqrt(a_ij(x) y^i y^j)`.
#[derive(Clone)]
pub struct RiemannianMetric<T> {
    alpha: RiemannSpec<T>,
    label: String,
}

impl<T: Real> FinslerMetric<T> for RiemannianMetric<T> {
    fn dim(&self) -> usize {
        self.alpha.dim()
    }
    fn label(&self) -> String {
        self.label.clone()
    }
    fn eval(&self, x: &[Jet<T>], y: &[Jet<T>]) -> Result<Jet<T>> {
        quadratic_form(&self.alpha.eval(x)?, y).sqrt()
    }
}

type NormFn<T> = Arc<dyn Fn(&[Jet<T>]) -> Result<Jet<T>> + Send + Sync>;

/// An `x`-independent norm.
#[derive(Clone)]
pub struct MinkowskiNorm<T> {
    n: usize,
    norm: NormFn<T>,
    label: String,
}

impl<T: Real> MinkowskiNorm<T> {
    pub fn new(n: usize, label: impl Into<String>, norm: NormFn<T>) -> Self {
        MinkowskiNorm {
            n,
            norm,
            label: label.into(),
        }
    }

    /// `F = ((y.y)^2 + k sum y_i^4)^(1/4)`.
    pub fn quartic(n: usize, k: f64) -> Self {
        let norm: NormFn<T> = Arc::new(move |y: &[Jet<T>]| {
            let r2 = sum(y.iter().map(|v| v.square())).expect("nonempty");
            let q = sum(y.iter().map(|v| v.square().square())).expect("nonempty");
            (r2.square() + q.scale(T::lit(k))).powf(T::lit(0.25))
        });
        MinkowskiNorm::new(n, format!("minkowski_quartic(n={n},k={k})"), norm)
    }
}

impl<T: Real> FinslerMetric<T> for MinkowskiNorm<T> {
    fn dim(&self) -> usize {
        self.n
    }
    fn label(&self) -> String {
        self.label.clone()
    }
    fn eval(&self, _x: &[Jet<T>], y: &[Jet<T>]) -> Result<Jet<T>> {
        (self.norm)(y)
    }
}

/// Funk metric of the Euclidean unit ball,
/// `F = (sqrt((1-|x|^2)|y|^2 + <x,y>^2) + <x,y>) / (1-|x|^2)`.
#[derive(Clone, Copy, Debug)]
pub struct Funk {
    pub n: usize,
}

impl<T: Real> FinslerMetric<T> for Funk {
    fn dim(&self) -> usize {
        self.n
    }
    fn label(&self) -> String {
        format!("funk(n={})", self.n)
    }
    fn eval(&self, x: &[Jet<T>], y: &[Jet<T>]) -> Result<Jet<T>> {
        let xx = sum(x.iter().map(|v| v.square())).expect("nonempty");
        let yy = sum(y.iter().map(|v| v.square())).expect("nonempty");
        let xy = sum(x.iter().zip(y).map(|(a, b)| a * b)).expect("nonempty");
        let w = -xx + T::one();
        if !(w.value() > T::zero()) {
            return Err(FinslerError::domain("funk", "|x| >= 1"));
        }
        let root = (&w * &yy + xy.square()).sqrt()?;
        (root + xy).checked_div(&w)
    }
    fn in_domain(&self, x: &[T]) -> bool {
        x.iter().fold(T::zero(), |s, &v| s + v * v) < T::one()
    }
}

/// Probes a freshly built metric at `x0` along a few fiber directions.
fn probe<T: Real>(m: MetricSpec<T>, x0: &[T]) -> Result<MetricSpec<T>> {
    if !m.in_domain(x0) {
        return Err(FinslerError::Construction(format!(
            "{}: probe point {:?} outside the domain",
            m.label(),
            x0
        )));
    }
    let samples: Vec<PointOnTM<T>> = fiber_directions::<T>(m.dim(), 8, 0.137)
        .into_iter()
        .map(|y| PointOnTM::new(x0.to_vec(), y))
        .collect::<Result<_>>()?;
    let report = validate(&m, &samples);
    match report.first_failure() {
        None => Ok(m),
        Some(f) => Err(FinslerError::Construction(format!(
            "{}: {:?} ({})",
            m.label(),
            f.kind,
            f.detail
        ))),
    }
}

fn origin<T: Real>(n: usize) -> Vec<T> {
    vec![T::zero(); n]
}

pub fn build_riemannian<T: Real>(a: RiemannSpec<T>, label: &str) -> Result<MetricSpec<T>> {
    let n = a.dim();
    probe(
        MetricSpec::new(RiemannianMetric {
            alpha: a,
            label: label.to_string(),
        }),
        &origin(n),
    )
}

pub fn build_minkowski<T: Real>(norm: MinkowskiNorm<T>) -> Result<MetricSpec<T>> {
    let n = norm.n;
    probe(MetricSpec::new(norm), &origin(n))
}

pub fn build_alpha_beta<T: Real>(spec: AlphaBetaSpec<T>, label: &str) -> Result<MetricSpec<T>> {
    let n = spec.alpha.dim();
    probe(MetricSpec::new(AlphaBetaMetric::new(spec, label)?), &origin(n))
}

pub fn build_randers<T: Real>(a: RiemannSpec<T>, b: OneFormSpec<T>, label: &str) -> Result<MetricSpec<T>> {
    build_alpha_beta(
        AlphaBetaSpec {
            alpha: a,
            beta: b,
            phi: PhiSpec::randers(),
        },
        label,
    )
}

pub fn build_funk<T: Real>(n: usize) -> Result<MetricSpec<T>> {
    if n < 2 {
        return Err(FinslerError::Construction("dimension must be >= 2".into()));
    }
    probe(MetricSpec::new(Funk { n }), &origin(n))
}

/// Klein-model `alpha` and `beta` with `F_funk = alpha + beta`.
pub fn funk_as_randers<T: Real>(n: usize) -> AlphaBetaSpec<T> {
    let w = move |x: &[Jet<T>]| -> Jet<T> { -sum(x.iter().map(|v| v.square())).expect("nonempty") + T::one() };
    let entries = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let f: Field<T> = Arc::new(move |x: &[Jet<T>]| {
                        let wv = w(x);
                        let mut num = &x[i] * &x[j];
                        if i == j {
                            num = num + &wv;
                        }
                        num.checked_div(&wv.square())
                    });
                    f
                })
                .collect()
        })
        .collect();
    let beta = (0..n)
        .map(|i| {
            let f: Field<T> = Arc::new(move |x: &[Jet<T>]| x[i].checked_div(&w(x)));
            f
        })
        .collect();
    AlphaBetaSpec {
        alpha: RiemannSpec::from_fields(entries),
        beta: OneFormSpec::from_fields(beta),
        phi: PhiSpec::randers(),
    }
}

fn exp_field<T: Real>(var: usize, c: f64) -> Field<T> {
    Arc::new(move |x: &[Jet<T>]| x[var].scale(T::lit(c)).exp())
}

/// `a = diag(exp(2 c x1), 1, ..., 1)`.
pub fn warped<T: Real>(n: usize, c: f64) -> RiemannSpec<T> {
    let entries = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i, j) {
                    (0, 0) => exp_field(0, 2.0 * c),
                    (i, j) if i == j => constant_field(1.0),
                    _ => constant_field(0.0),
                })
                .collect()
        })
        .collect();
    RiemannSpec::from_fields(entries)
}

/// Conformally flat `a = exp(2 x1) (dx1^2 + dx2^2)` with the parallel form
/// `b = c d(exp(x1) cos x2)`.
pub fn conformal_parallel_pair<T: Real>(c: f64) -> (RiemannSpec<T>, OneFormSpec<T>) {
    let e2: Field<T> = exp_field(0, 2.0);
    let a = RiemannSpec::from_fields(vec![
        vec![e2.clone(), constant_field(0.0)],
        vec![constant_field(0.0), e2],
    ]);
    let b1: Field<T> = Arc::new(move |x: &[Jet<T>]| Ok(&x[0].exp()? * &x[1].cos() * T::lit(c)));
    let b2: Field<T> = Arc::new(move |x: &[Jet<T>]| Ok(-(&x[0].exp()? * &x[1].sin() * T::lit(c))));
    (a, OneFormSpec::from_fields(vec![b1, b2]))
}

/// `a = dx1^2 + exp(2 x1) dx2^2 + dx3^2` (hyperbolic plane times a line)
/// with the parallel form `b = c dx3`.
pub fn hyperbolic_line_pair<T: Real>(c: f64) -> (RiemannSpec<T>, OneFormSpec<T>) {
    let z = || constant_field::<T>(0.0);
    let one = || constant_field::<T>(1.0);
    let a = RiemannSpec::from_fields(vec![
        vec![one(), z(), z()],
        vec![z(), exp_field(0, 2.0), z()],
        vec![z(), z(), one()],
    ]);
    (a, OneFormSpec::constant(&[0.0, 0.0, c]))
}

/// A non-closed form with non-constant length on flat space.
pub fn generic_form<T: Real>(n: usize, eps: f64) -> Result<OneFormSpec<T>> {
    let scale = |s: &str| format!("{eps}*({s})");
    let b: Vec<String> = match n {
        2 => vec![scale("0.3*x2 + 0.1*x1^2"), scale("-0.2*x1")],
        3 => vec![
            scale("0.3*x2"),
            scale("-0.2*x3 + 0.1*x1^2"),
            scale("0.25*x1"),
        ],
        _ => {
            return Err(FinslerError::Config(
                "randers_generic is defined for n = 2, 3".into(),
            ))
        }
    };
    OneFormSpec::from_exprs(&b)
}

/// One row of the named catalog.
#[derive(Clone, Debug)]
pub struct ZooInfo {
    pub name: &'static str,
    pub params: &'static str,
    pub summary: &'static str,
}

pub fn catalog() -> Vec<ZooInfo> {
    vec![
        ZooInfo { name: "euclidean", params: "n=2", summary: "F = |y|" },
        ZooInfo { name: "riemannian_warped", params: "n=2, c=1", summary: "a = diag(exp(2 c x1), 1, ...)" },
        ZooInfo { name: "minkowski_quartic", params: "n=2, k=0.3", summary: "F = ((y.y)^2 + k sum y_i^4)^(1/4)" },
        ZooInfo { name: "randers_const", params: "b=[0.5,0]", summary: "|y| + <b,y>, constant b (Minkowski)" },
        ZooInfo { name: "randers_parallel", params: "c=0.5", summary: "conformally flat alpha, parallel beta (Berwald, n=2)" },
        ZooInfo { name: "randers_parallel3", params: "c=0.5", summary: "H^2 x R alpha, beta = c dx3 (Berwald, n=3)" },
        ZooInfo { name: "randers_generic", params: "n=2, eps=1", summary: "Euclidean alpha, non-closed beta" },
        ZooInfo { name: "alpha_beta_quadratic", params: "b=[0.3,0,0.2], k=0.5", summary: "phi = 1 + k s^2, constant beta (Minkowski)" },
        ZooInfo { name: "alpha_beta_parallel3", params: "c=0.5, k=0.5", summary: "phi = 1 + k s^2 on H^2 x R, beta = c dx3 (Berwald)" },
        ZooInfo { name: "funk", params: "n=2", summary: "Funk metric of the unit ball" },
    ]
}

fn param_f64(p: &Map<String, Value>, key: &str, default: f64) -> Result<f64> {
    match p.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| FinslerError::Config(format!("parameter '{key}' must be a number"))),
    }
}

fn param_usize(p: &Map<String, Value>, key: &str, default: usize) -> Result<usize> {
    match p.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_u64()
            .map(|u| u as usize)
            .ok_or_else(|| FinslerError::Config(format!("parameter '{key}' must be a positive integer"))),
    }
}

fn param_vec(p: &Map<String, Value>, key: &str, default: &[f64]) -> Result<Vec<f64>> {
    match p.get(key) {
        None => Ok(default.to_vec()),
        Some(Value::Array(a)) => a
            .iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| FinslerError::Config(format!("parameter '{key}' must be numeric")))
            })
            .collect(),
        Some(_) => Err(FinslerError::Config(format!("parameter '{key}' must be an array"))),
    }
}

fn check_dim(n: usize) -> Result<usize> {
    if n < 2 {
        Err(FinslerError::Config("dimension n must be >= 2".into()))
    } else {
        Ok(n)
    }
}

/// Builds a catalog entry from its name and JSON parameters.
pub fn from_name<T: Real>(name: &str, params: &Map<String, Value>) -> Result<MetricSpec<T>> {
    match name {
        "euclidean" => {
            let n = check_dim(param_usize(params, "n", 2)?)?;
            build_riemannian(RiemannSpec::euclidean(n), &format!("euclidean(n={n})"))
        }
        "riemannian_warped" => {
            let n = check_dim(param_usize(params, "n", 2)?)?;
            let c = param_f64(params, "c", 1.0)?;
            build_riemannian(warped(n, c), &format!("riemannian_warped(n={n},c={c})"))
        }
        "minkowski_quartic" => {
            let n = check_dim(param_usize(params, "n", 2)?)?;
            let k = param_f64(params, "k", 0.3)?;
            build_minkowski(MinkowskiNorm::quartic(n, k))
        }
        "randers_const" => {
            let b = param_vec(params, "b", &[0.5, 0.0])?;
            let n = check_dim(b.len())?;
            build_randers(
                RiemannSpec::euclidean(n),
                OneFormSpec::constant(&b),
                &format!("randers_const(b={b:?})"),
            )
        }
        "randers_parallel" => {
            let c = param_f64(params, "c", 0.5)?;
            let (a, b) = conformal_parallel_pair(c);
            build_randers(a, b, &format!("randers_parallel(c={c})"))
        }
        "randers_parallel3" => {
            let c = param_f64(params, "c", 0.5)?;
            let (a, b) = hyperbolic_line_pair(c);
            build_randers(a, b, &format!("randers_parallel3(c={c})"))
        }
        "randers_generic" => {
            let n = param_usize(params, "n", 2)?;
            let eps = param_f64(params, "eps", 1.0)?;
            build_randers(
                RiemannSpec::euclidean(n),
                generic_form(n, eps)?,
                &format!("randers_generic(n={n},eps={eps})"),
            )
        }
        "alpha_beta_quadratic" => {
            let b = param_vec(params, "b", &[0.3, 0.0, 0.2])?;
            let k = param_f64(params, "k", 0.5)?;
            let n = check_dim(b.len())?;
            build_alpha_beta(
                AlphaBetaSpec {
                    alpha: RiemannSpec::euclidean(n),
                    beta: OneFormSpec::constant(&b),
                    phi: PhiSpec::quadratic(k),
                },
                &format!("alpha_beta_quadratic(b={b:?},k={k})"),
            )
        }
        "alpha_beta_parallel3" => {
            let c = param_f64(params, "c", 0.5)?;
            let k = param_f64(params, "k", 0.5)?;
            let (alpha, beta) = hyperbolic_line_pair(c);
            build_alpha_beta(
                AlphaBetaSpec {
                    alpha,
                    beta,
                    phi: PhiSpec::quadratic(k),
                },
                &format!("alpha_beta_parallel3(c={c},k={k})"),
            )
        }
        "funk" => build_funk(check_dim(param_usize(params, "n", 2)?)?),
        other => Err(FinslerError::Config(format!(
            "unknown zoo entry '{other}' (see `zoo list`)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(v: Value) -> Map<String, Value> {
        v.as_object().cloned().unwrap_or_default()
    }

    #[test]
    fn randers_value() {
        let m: MetricSpec<f64> = from_name("randers_const", &params(serde_json::json!({"b": [0.5, 0.0]}))).unwrap();
        assert!((m.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn funk_values() {
        let m: MetricSpec<f64> = build_funk(2).unwrap();
        assert!((m.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((m.eval(&[0.5, 0.0], &[1.0, 0.0]).unwrap() - 2.0).abs() < 1e-14);
        assert!(!m.in_domain(&[1.5, 0.0]));
    }

    #[test]
    fn beta_norms() {
        let spec = AlphaBetaSpec::<f64> {
            alpha: RiemannSpec::euclidean(2),
            beta: OneFormSpec::constant(&[0.5, 0.0]),
            phi: PhiSpec::randers(),
        };
        for x in [[0.0, 0.0], [0.3, -0.7], [2.0, 1.0]] {
            assert!((beta_norm(&spec, &x).unwrap() - 0.5).abs() < 1e-15);
        }
        let spec = AlphaBetaSpec::<f64> {
            alpha: RiemannSpec::constant(&vec![vec![4.0, 0.0], vec![0.0, 1.0]]),
            beta: OneFormSpec::constant(&[1.0, 0.0]),
            phi: PhiSpec::randers(),
        };
        let b = beta_norm(&spec, &[0.0, 0.0]).unwrap();
        assert!((b * b - 0.25).abs() < 1e-15);
    }

    #[test]
    fn parallel_forms_have_constant_length() {
        let (a, b) = conformal_parallel_pair::<f64>(0.5);
        let spec = AlphaBetaSpec { alpha: a, beta: b, phi: PhiSpec::randers() };
        for x in [[0.0, 0.0], [0.4, -0.3], [-0.6, 0.9]] {
            assert!((beta_norm(&spec, &x).unwrap() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn generic_form_length_varies() {
        let spec = AlphaBetaSpec::<f64> {
            alpha: RiemannSpec::euclidean(2),
            beta: generic_form(2, 1.0).unwrap(),
            phi: PhiSpec::randers(),
        };
        let norms: Vec<f64> = [[0.1, 0.2], [0.5, -0.4], [-0.3, 0.6]]
            .iter()
            .map(|x| beta_norm(&spec, x).unwrap())
            .collect();
        assert!(norms.windows(2).any(|w| (w[0] - w[1]).abs() > 1e-3));
    }

    #[test]
    fn funk_is_randers() {
        let funk: MetricSpec<f64> = build_funk(3).unwrap();
        let randers = MetricSpec::new(AlphaBetaMetric::new(funk_as_randers(3), "klein").unwrap());
        for (x, y) in [
            ([0.1, -0.2, 0.3], [1.0, 0.5, -0.2]),
            ([0.6, 0.1, 0.0], [-0.3, 0.2, 0.9]),
            ([-0.4, 0.4, 0.4], [0.0, 1.0, 0.0]),
        ] {
            let a = funk.eval(&x, &y).unwrap();
            let b = randers.eval(&x, &y).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn construction_rejects_non_convex_randers() {
        let r = build_randers::<f64>(
            RiemannSpec::euclidean(2),
            OneFormSpec::constant(&[1.2, 0.0]),
            "bad",
        );
        assert!(matches!(r, Err(FinslerError::Construction(_))));
    }

    #[test]
    fn catalog_entries_build() {
        for info in catalog() {
            let m: Result<MetricSpec<f64>> = from_name(info.name, &Map::new());
            assert!(m.is_ok(), "{}: {:?}", info.name, m.err());
        }
        assert!(from_name::<f64>("nope", &Map::new()).is_err());
    }

    #[test]
    fn phi_expression() {
        let phi = PhiSpec::<f64>::from_expr("1 + s + 0.1*s^2").unwrap();
        let s = Jet::lift(&[0.5], 0, 1);
        let v = phi.eval(&s).unwrap();
        assert!((v.value() - 1.525).abs() < 1e-15);
        assert!(PhiSpec::<f64>::from_expr("x1 + s").is_err());
    }
}

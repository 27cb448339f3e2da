//! Volume forms, distortion and S-curvature.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::expr::Expr;
use crate::jets::{Jet, JetSpace};
use crate::linalg::{invert_with_det, least_squares};
use crate::metric::{fundamental_jets, MetricSpec, PointOnTM};
use crate::quadrature::{sphere_rule, unit_ball_volume};
use crate::scalar::Real;
use crate::spray::{CurvatureEngine, SprayJets, FULL_ORDER};

#[derive(Clone, Debug, PartialEq)]
pub enum VolumeKind {
    BusemannHausdorff,
    HolmesThompson,
    /// `sigma(x)` given as an expression in `x1..xn`.
    Custom(Expr),
}

/// A base volume form `sigma(x) dx`. `scale` multiplies `sigma`; it only
/// shifts the distortion by a constant and leaves `S` unchanged.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeForm<T> {
    pub kind: VolumeKind,
    pub scale: T,
    /// Sphere quadrature resolution; `None` picks a default per dimension.
    pub resolution: Option<usize>,
}

impl<T: Real> VolumeForm<T> {
    pub fn busemann_hausdorff() -> Self {
        Self::of(VolumeKind::BusemannHausdorff)
    }

    pub fn holmes_thompson() -> Self {
        Self::of(VolumeKind::HolmesThompson)
    }

    pub fn custom(expr: &str) -> Result<Self> {
        Ok(Self::of(VolumeKind::Custom(Expr::parse(expr)?)))
    }

    fn of(kind: VolumeKind) -> Self {
        VolumeForm {
            kind,
            scale: T::one(),
            resolution: None,
        }
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = Some(resolution);
        self
    }

    pub fn with_scale(mut self, scale: T) -> Self {
        self.scale = scale;
        self
    }

    pub fn resolution_for(&self, n: usize) -> usize {
        self.resolution.unwrap_or(match (&self.kind, n) {
            (_, 2) => 256,
            (VolumeKind::HolmesThompson, _) => 24,
            _ => 64,
        })
    }

    /// `sigma(x)`.
    pub fn sigma(&self, m: &MetricSpec<T>, x: &[T]) -> Result<T> {
        Ok(self.log_sigma_jet(m, x, 0)?.value().exp())
    }

    /// `ln sigma` as a jet of the given order in the `2n` variables `(x, y)`
    /// (constant in `y`).
    pub fn log_sigma_jet(&self, m: &MetricSpec<T>, x: &[T], order: usize) -> Result<Jet<T>> {
        let n = m.dim();
        if x.len() != n {
            return Err(FinslerError::Config(format!(
                "base point of dimension {} for a metric of dimension {n}",
                x.len()
            )));
        }
        if !m.in_domain(x) {
            return Err(FinslerError::domain("volume", format!("x={x:?} outside the metric domain")));
        }
        let full = JetSpace::get(2 * n, order);
        let ls = match &self.kind {
            VolumeKind::BusemannHausdorff => {
                let xs = Jet::lift_all(x, order);
                let map: Vec<usize> = (0..n).collect();
                bh_log_sigma(m, &xs, self.resolution_for(n))?.embed(&full, &map)
            }
            VolumeKind::HolmesThompson => ht_log_sigma(m, x, order, self.resolution_for(n))?,
            VolumeKind::Custom(e) => {
                let xs: Vec<Jet<T>> = (0..n).map(|i| Jet::variable(&full, i, x[i])).collect();
                let s = e.eval_coords(&xs)?;
                if !(s.value() > T::zero()) {
                    return Err(FinslerError::domain(
                        "volume",
                        format!("sigma = {:e} is not positive at x={x:?}", s.value().as_f64()),
                    ));
                }
                s.ln()?
            }
        };
        Ok(ls + self.scale.ln())
    }

    pub fn label(&self) -> String {
        match &self.kind {
            VolumeKind::BusemannHausdorff => "bh".into(),
            VolumeKind::HolmesThompson => "ht".into(),
            VolumeKind::Custom(e) => format!("custom:{e}"),
        }
    }
}

impl<T: Real> fmt::Display for VolumeForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl<T: Real> FromStr for VolumeForm<T> {
    type Err = FinslerError;

    /// `"bh"`, `"ht"` or `"custom:<expr in x1..xn>"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "bh" | "busemann-hausdorff" => Ok(Self::busemann_hausdorff()),
            "ht" | "holmes-thompson" => Ok(Self::holmes_thompson()),
            _ => match s.strip_prefix("custom:") {
                Some(e) => Self::custom(e),
                None => Err(FinslerError::Config(format!("unknown volume form '{s}'"))),
            },
        }
    }
}

fn node_f<T: Real>(m: &MetricSpec<T>, xs: &[Jet<T>], dir: &[T]) -> Result<Jet<T>> {
    let space = xs[0].space();
    let ys: Vec<Jet<T>> = dir.iter().map(|&v| Jet::constant(space, v)).collect();
    let f = m.eval_jets(xs, &ys)?;
    if !(f.value() > T::zero()) || !f.is_finite() {
        return Err(FinslerError::Quadrature(format!(
            "F = {:e} at direction {dir:?}",
            f.value().as_f64()
        )));
    }
    Ok(f)
}

/// `ln sigma_BH` with `sigma_BH = omega_n / vol{F(x, .) <= 1}` on the jets `xs`.
fn bh_log_sigma<T: Real>(m: &MetricSpec<T>, xs: &[Jet<T>], resolution: usize) -> Result<Jet<T>> {
    let n = xs.len();
    let rule = sphere_rule::<T>(n, resolution)?;
    let mut acc = Jet::zero(xs[0].space());
    for (dir, &w) in rule.nodes.iter().zip(&rule.weights) {
        let f = node_f(m, xs, dir)?;
        acc = acc + f.powi(-(n as i32))?.scale(w);
    }
    let vol = acc.scale(T::lit(1.0 / n as f64));
    Ok(-vol.ln()? + T::lit(unit_ball_volume(n).ln()))
}

/// `ln sigma_HT` with `sigma_HT = (1/omega_n) int_{F <= 1} det g dy`.
fn ht_log_sigma<T: Real>(m: &MetricSpec<T>, x: &[T], order: usize, resolution: usize) -> Result<Jet<T>> {
    let n = x.len();
    let rule = sphere_rule::<T>(n, resolution)?;
    let space = JetSpace::get(2 * n, order + 2);
    let xs: Vec<Jet<T>> = (0..n).map(|i| Jet::variable(&space, i, x[i])).collect();
    let mut acc = Jet::zero(&JetSpace::get(2 * n, order));
    for (dir, &w) in rule.nodes.iter().zip(&rule.weights) {
        let ys: Vec<Jet<T>> = (0..n).map(|i| Jet::variable(&space, n + i, dir[i])).collect();
        let f = m.eval_jets(&xs, &ys)?;
        if !(f.value() > T::zero()) {
            return Err(FinslerError::Quadrature(format!("F not positive at direction {dir:?}")));
        }
        let g = fundamental_jets(&f.square(), n)?;
        let (_, det) = invert_with_det(&g)?;
        let term = det * f.truncate(order).powi(-(n as i32))?;
        acc = acc + term.restrict(|v| v < n).scale(w);
    }
    let vol = acc.scale(T::lit(1.0 / n as f64));
    Ok(vol.ln()? - T::lit(unit_ball_volume(n).ln()))
}

/// Busemann-Hausdorff density at `x`.
pub fn bh_sigma<T: Real>(m: &MetricSpec<T>, x: &[T], resolution: usize) -> Result<T> {
    VolumeForm::busemann_hausdorff()
        .with_resolution(resolution)
        .sigma(m, x)
}

/// Holmes-Thompson density at `x`.
pub fn ht_sigma<T: Real>(m: &MetricSpec<T>, x: &[T], resolution: usize) -> Result<T> {
    VolumeForm::holmes_thompson()
        .with_resolution(resolution)
        .sigma(m, x)
}

/// Distortion, S-curvature and its vertical derivatives at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SCurvatureSample<T> {
    pub point: PointOnTM<T>,
    /// `tau = ln(sqrt(det g) / sigma)`.
    pub tau: T,
    pub s: T,
    /// `S / F`.
    pub s_tilde: T,
    pub grad_s_y: Vec<T>,
    pub hess_s_y: Vec<Vec<T>>,
}

/// `S = y^m dtau/dx^m - 2 G^m dtau/dy^m`, from jets of order 5.
pub(crate) fn s_curvature_from_jets<T: Real>(
    sj: &SprayJets<T>,
    p: &PointOnTM<T>,
    log_sigma: &Jet<T>,
) -> Result<(SCurvatureSample<T>, Vec<T>)> {
    let n = sj.n;
    debug_assert!(sj.f.order() >= FULL_ORDER);
    let tau = sj.detg.ln()?.scale(T::lit(0.5)) - log_sigma;
    let mut s = Jet::zero(&JetSpace::get(2 * n, tau.order().saturating_sub(1)));
    for mm in 0..n {
        let ym = Jet::variable(s.space(), n + mm, p.y[mm]);
        s = s + ym * tau.derivative(mm)?;
        s = s - (&sj.spray[mm] * &tau.derivative(n + mm)?).scale(T::lit(2.0));
    }
    let fval = sj.f.value();
    let grad_s_y = (0..n).map(|i| s.partial_vars(&[n + i])).collect::<Result<_>>()?;
    let hess_s_y = (0..n)
        .map(|i| (0..n).map(|j| s.partial_vars(&[n + i, n + j])).collect())
        .collect::<Result<_>>()?;
    let dtau = (0..n).map(|k| tau.partial_vars(&[n + k])).collect::<Result<_>>()?;
    Ok((
        SCurvatureSample {
            point: p.clone(),
            tau: tau.value(),
            s: s.value(),
            s_tilde: s.value() / fval,
            grad_s_y,
            hess_s_y,
        },
        dtau,
    ))
}

/// `tau(x, y)`.
pub fn distortion<T: Real>(m: &MetricSpec<T>, vf: &VolumeForm<T>, p: &PointOnTM<T>) -> Result<T> {
    Ok(s_curvature(m, vf, p)?.tau)
}

pub fn s_curvature<T: Real>(
    m: &MetricSpec<T>,
    vf: &VolumeForm<T>,
    p: &PointOnTM<T>,
) -> Result<SCurvatureSample<T>> {
    let engine = CurvatureEngine::new(m.clone(), vf.clone());
    Ok(engine.s_on_fiber(&p.x, std::slice::from_ref(&p.y))?.remove(0))
}

/// `E_ij` computed as `F S_{y^i y^j}`.
pub fn e_from_s<T: Real>(m: &MetricSpec<T>, vf: &VolumeForm<T>, p: &PointOnTM<T>) -> Result<Vec<Vec<T>>> {
    let s = s_curvature(m, vf, p)?;
    let f = m.eval(&p.x, &p.y)?;
    Ok(s.hess_s_y
        .iter()
        .map(|r| r.iter().map(|&v| f * v).collect())
        .collect())
}

/// `max_k |dtau/dy^k - C_k|`, the vertical differential of the distortion
/// against the mean Cartan form.
pub fn dv_tau_check<T: Real>(m: &MetricSpec<T>, vf: &VolumeForm<T>, p: &PointOnTM<T>) -> Result<T> {
    let b = CurvatureEngine::new(m.clone(), vf.clone()).bundle(p)?;
    Ok(b.dtau_dy
        .iter()
        .zip(&b.geometry.mean_cartan)
        .fold(T::zero(), |w, (a, c)| w.max((*a - *c).abs())))
}

/// Least-squares fit `S = c F + xi_i y^i` over a fiber.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakIsotropicFit<T> {
    pub c: T,
    pub xi: Vec<T>,
    /// Largest absolute residual over the fitted samples.
    pub residual: T,
}

/// Fits from precomputed samples on one fiber.
pub fn fit_weak_isotropic<T: Real>(
    m: &MetricSpec<T>,
    samples: &[SCurvatureSample<T>],
) -> Result<WeakIsotropicFit<T>> {
    let Some(first) = samples.first() else {
        return Err(FinslerError::Rank("no samples to fit".into()));
    };
    let n = first.point.dim();
    if samples.len() < n + 1 {
        return Err(FinslerError::Rank(format!(
            "{} fiber samples cannot determine {} unknowns",
            samples.len(),
            n + 1
        )));
    }
    let mut rows = Vec::with_capacity(samples.len());
    let mut rhs = Vec::with_capacity(samples.len());
    for s in samples {
        let f = m.eval(&s.point.x, &s.point.y)?;
        let mut row = vec![f];
        row.extend_from_slice(&s.point.y);
        rows.push(row);
        rhs.push(s.s);
    }
    let sol = least_squares(&rows, &rhs)?;
    let residual = rows.iter().zip(&rhs).fold(T::zero(), |w, (r, &b)| {
        let fit = r.iter().zip(&sol).fold(T::zero(), |a, (u, v)| a + *u * *v);
        w.max((fit - b).abs())
    });
    Ok(WeakIsotropicFit {
        c: sol[0],
        xi: sol[1..].to_vec(),
        residual,
    })
}

/// Samples `S` at the fiber points `ys` over `x` and fits `c`, `xi`.
pub fn weak_isotropic_fit<T: Real>(
    m: &MetricSpec<T>,
    vf: &VolumeForm<T>,
    x: &[T],
    ys: &[Vec<T>],
) -> Result<WeakIsotropicFit<T>> {
    let engine = CurvatureEngine::new(m.clone(), vf.clone());
    fit_weak_isotropic(m, &engine.s_on_fiber(x, ys)?)
}

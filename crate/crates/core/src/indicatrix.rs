//! The indicatrix of a 2-dimensional metric as a closed curve, with spectral
//! differentiation along it and the fiber identities for `S~ = S/F`.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::metric::{MetricSpec, PointOnTM};
use crate::scalar::Real;
use crate::spray::CurvatureEngine;

/// Relative size of the upper half of the spectrum of `r(theta)` above which
/// the curve counts as under-resolved.
pub const SPECTRAL_TAIL_LIMIT: f64 = 1e-8;

/// Nodal description of `{F(x, .) = 1}` on `N` equispaced angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Indicatrix<T> {
    pub x: Vec<T>,
    pub theta: Vec<T>,
    /// `y(theta) = r(theta) (cos theta, sin theta)`, `r = 1/F`.
    pub y: Vec<[T; 2]>,
    pub ydot: Vec<[T; 2]>,
    /// `g_ij(y) ydot^i ydot^j`.
    pub gdot: Vec<T>,
    /// Relative spectral tail of `r`.
    pub tail: T,
}

/// `df/dtheta` for a periodic nodal function, via the FFT.
pub fn spectral_derivative<T: Real>(f: &[T]) -> Vec<T> {
    let n = f.len();
    let mut planner = FftPlanner::<T>::new();
    let mut buf: Vec<Complex<T>> = f.iter().map(|&v| Complex::new(v, T::zero())).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = if 2 * k < n {
            k as f64
        } else if 2 * k == n {
            0.0
        } else {
            k as f64 - n as f64
        };
        *c = Complex::new(-c.im, c.re) * T::lit(kk);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let inv = T::lit(1.0 / n as f64);
    buf.iter().map(|c| c.re * inv).collect()
}

/// Largest Fourier mode in the upper half of the band relative to the largest mode.
pub fn spectral_tail<T: Real>(f: &[T]) -> T {
    let n = f.len();
    let mut buf: Vec<Complex<T>> = f.iter().map(|&v| Complex::new(v, T::zero())).collect();
    FftPlanner::<T>::new().plan_fft_forward(n).process(&mut buf);
    let mag = |k: usize| buf[k].norm();
    let peak = (0..n).map(mag).fold(T::zero(), T::max);
    let tail = (0..n)
        .filter(|&k| k.min(n - k) >= n / 4)
        .map(mag)
        .fold(T::zero(), T::max);
    if peak > T::zero() {
        tail / peak
    } else {
        T::zero()
    }
}

fn require_plane<T: Real>(m: &MetricSpec<T>) -> Result<()> {
    if m.dim() != 2 {
        return Err(FinslerError::Config(format!(
            "fiber identities are implemented for n = 2 (got n = {})",
            m.dim()
        )));
    }
    Ok(())
}

/// Samples the indicatrix over `x` at `nodes` angles. Fails with a
/// resolution error when the radius function is not resolved.
pub fn parametrize<T: Real>(m: &MetricSpec<T>, x: &[T], nodes: usize) -> Result<Indicatrix<T>> {
    parametrize_with(m, x, nodes, SPECTRAL_TAIL_LIMIT)
}

/// As [`parametrize`] with a custom tail limit (`f64::INFINITY` disables the check).
pub fn parametrize_with<T: Real>(m: &MetricSpec<T>, x: &[T], nodes: usize, tail_limit: f64) -> Result<Indicatrix<T>> {
    require_plane(m)?;
    if nodes < 8 || !nodes.is_multiple_of(2) {
        return Err(FinslerError::Config(format!("node count must be even and >= 8 (got {nodes})")));
    }
    let mut ind = Indicatrix {
        x: x.to_vec(),
        theta: Vec::with_capacity(nodes),
        y: Vec::with_capacity(nodes),
        ydot: Vec::with_capacity(nodes),
        gdot: Vec::with_capacity(nodes),
        tail: T::zero(),
    };
    let mut radius = Vec::with_capacity(nodes);
    for k in 0..nodes {
        let th = T::TAU() * T::lit(k as f64 / nodes as f64);
        let u = [th.cos(), th.sin()];
        let du = [-u[1], u[0]];
        let p = PointOnTM::new(x.to_vec(), u.to_vec())?;
        let f = m.jet_at(&p, 2)?;
        let fv = f.value();
        let fy = [f.partial_vars(&[2])?, f.partial_vars(&[3])?];
        let r = fv.recip();
        // d/dtheta (u / F(u)) = u'/F - u (F_y . u') / F^2
        let fdu = fy[0] * du[0] + fy[1] * du[1];
        let ydot = [du[0] * r - u[0] * fdu * r * r, du[1] * r - u[1] * fdu * r * r];
        // g is 0-homogeneous, so g(y) = g(u)
        let half = T::lit(0.5);
        let f2 = f.square();
        let g = |i: usize, j: usize| f2.partial_vars(&[2 + i, 2 + j]).map(|v| v * half);
        let gd = g(0, 0)? * ydot[0] * ydot[0]
            + T::lit(2.0) * g(0, 1)? * ydot[0] * ydot[1]
            + g(1, 1)? * ydot[1] * ydot[1];
        ind.theta.push(th);
        ind.y.push([u[0] * r, u[1] * r]);
        ind.ydot.push(ydot);
        ind.gdot.push(gd);
        radius.push(r);
    }
    ind.tail = spectral_tail(&radius);
    if !(ind.tail.as_f64() <= tail_limit) {
        return Err(FinslerError::Resolution {
            tail: ind.tail.as_f64(),
            limit: tail_limit,
        });
    }
    Ok(ind)
}

impl<T: Real> Indicatrix<T> {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// `Delta f = gdot^{-1/2} d/dtheta (gdot^{-1/2} df/dtheta)`.
    pub fn laplacian(&self, f: &[T]) -> Vec<T> {
        let df = spectral_derivative(f);
        let inner: Vec<T> = df.iter().zip(&self.gdot).map(|(&d, &g)| d / g.sqrt()).collect();
        spectral_derivative(&inner)
            .iter()
            .zip(&self.gdot)
            .map(|(&d, &g)| d / g.sqrt())
            .collect()
    }

    /// `gdot(a, b) = gdot^{-1} a' b'` for the differentials of two nodal functions.
    pub fn pairing(&self, a: &[T], b: &[T]) -> Vec<T> {
        let da = spectral_derivative(a);
        let db = spectral_derivative(b);
        (0..self.len()).map(|k| da[k] * db[k] / self.gdot[k]).collect()
    }
}

/// Pointwise residuals of a fiber identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberResidual<T> {
    pub x: Vec<T>,
    pub nodes: usize,
    pub max_residual: T,
    pub theta: Vec<T>,
    pub residuals: Vec<T>,
}

impl<T: Real> FiberResidual<T> {
    fn new(ind: &Indicatrix<T>, residuals: Vec<T>) -> Self {
        FiberResidual {
            x: ind.x.clone(),
            nodes: ind.len(),
            max_residual: residuals.iter().fold(T::zero(), |w, r| w.max(r.abs())),
            theta: ind.theta.clone(),
            residuals,
        }
    }
}

/// `tau` on the nodes, up to the additive constant `-ln sigma(x)`.
fn nodal_tau<T: Real>(m: &MetricSpec<T>, ind: &Indicatrix<T>) -> Result<Vec<T>> {
    ind.y
        .iter()
        .map(|y| {
            let p = PointOnTM::new(ind.x.clone(), y.to_vec())?;
            let ft = crate::metric::fundamental_tensor(m, &p)?;
            Ok(ft.detg.ln() * T::lit(0.5))
        })
        .collect()
}

/// Residual of `Delta S~ + gdot(eta, d S~) + (n - 1) S~ - e` on the indicatrix.
pub fn verify_laplace1<T: Real>(engine: &CurvatureEngine<T>, x: &[T], nodes: usize) -> Result<FiberResidual<T>> {
    laplace1_on(engine, &parametrize(&engine.metric, x, nodes)?)
}

/// [`verify_laplace1`] on an already sampled indicatrix.
pub fn laplace1_on<T: Real>(engine: &CurvatureEngine<T>, ind: &Indicatrix<T>) -> Result<FiberResidual<T>> {
    let x = &ind.x;
    let nodes = ind.len();
    let ls = engine.log_sigma(x)?;
    let mut s_tilde = Vec::with_capacity(nodes);
    let mut e = Vec::with_capacity(nodes);
    let mut tau = Vec::with_capacity(nodes);
    for y in &ind.y {
        let p = PointOnTM::new(x.to_vec(), y.to_vec())?;
        let b = engine.bundle_with(&p, &ls)?;
        s_tilde.push(b.s_curvature.s_tilde);
        e.push(b.geometry.berwald_scalar);
        tau.push(b.s_curvature.tau);
    }
    let lap = ind.laplacian(&s_tilde);
    let pair = ind.pairing(&tau, &s_tilde);
    let res = (0..nodes).map(|k| lap[k] + pair[k] + s_tilde[k] - e[k]).collect();
    Ok(FiberResidual::new(ind, res))
}

/// Residual of `Delta f + gdot(eta, d f) + (n - 1) f` for `f = xi . y` on the
/// indicatrix, one entry per `xi`.
pub fn verify_schrodinger_family<T: Real>(
    m: &MetricSpec<T>,
    x: &[T],
    xis: &[Vec<T>],
    nodes: usize,
) -> Result<Vec<FiberResidual<T>>> {
    let ind = parametrize(m, x, nodes)?;
    let tau = nodal_tau(m, &ind)?;
    xis.iter()
        .map(|xi| {
            if xi.len() != 2 {
                return Err(FinslerError::Config("xi must have 2 components".into()));
            }
            let f: Vec<T> = ind.y.iter().map(|y| xi[0] * y[0] + xi[1] * y[1]).collect();
            let lap = ind.laplacian(&f);
            let pair = ind.pairing(&tau, &f);
            let res = (0..nodes).map(|k| lap[k] + pair[k] + f[k]).collect();
            Ok(FiberResidual::new(&ind, res))
        })
        .collect()
}


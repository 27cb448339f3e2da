//! Spray, nonlinear connection, Berwald curvature and its traces, Landsberg
//! curvature and the Chern connection, all in natural coordinates.
//!
//! Everything is derived from one jet of `F` in the `2n` variables `(x, y)`.
//! Order 5 is enough for every quantity: the spray needs `F^2` to order 2
//! (one `x`- and one `y`-derivative) and the inverse fundamental tensor, and
//! the Berwald curvature takes three more `y`-derivatives of the spray.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::jets::Jet;
use crate::linalg::{invert_with_det, Matrix};
use crate::metric::{
    fundamental_jets, FiberTensors, MetricSpec, PointOnTM, Tensor3, Tensor4,
};
use crate::scalar::Real;
use crate::volume::{SCurvatureSample, VolumeForm};

/// Jet order that supports every quantity in [`CurvatureBundle`].
pub const FULL_ORDER: usize = 5;

/// Knobs for the verification layer. `mean_berwald_scale` multiplies `E`
/// (and hence `e`) after it is computed; anything other than 1 is a
/// deliberately injected fault used to check that the identities notice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineOptions {
    pub mean_berwald_scale: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            mean_berwald_scale: 1.0,
        }
    }
}

/// Jets shared by all spray-level quantities at one point.
pub(crate) struct SprayJets<T> {
    pub n: usize,
    pub f: Jet<T>,
    pub g: Matrix<Jet<T>>,
    pub detg: Jet<T>,
    pub spray: Vec<Jet<T>>,
}

impl<T: Real> SprayJets<T> {
    /// `G^i = (1/4) g^il ([F^2]_{x^k y^l} y^k - [F^2]_{x^l})`, order `order - 2`.
    pub fn at(m: &MetricSpec<T>, p: &PointOnTM<T>, order: usize) -> Result<Self> {
        let n = p.dim();
        let f = m.jet_at(p, order)?;
        let f2 = f.square();
        let g = fundamental_jets(&f2, n)?;
        let (ginv, detg) = invert_with_det(&g)?;
        let space = f.space().clone();
        let ys: Vec<Jet<T>> = (0..n).map(|i| Jet::variable(&space, n + i, p.y[i])).collect();
        let dx: Vec<Jet<T>> = (0..n).map(|k| f2.derivative(k)).collect::<Result<_>>()?;
        let rhs: Vec<Jet<T>> = (0..n)
            .map(|l| {
                let mut acc = -&dx[l];
                for k in 0..n {
                    acc = acc + dx[k].derivative(n + l)? * &ys[k];
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        let quarter = T::lit(0.25);
        let spray = (0..n)
            .map(|i| {
                let mut acc = &ginv[i][0] * &rhs[0];
                for l in 1..n {
                    acc = acc + &ginv[i][l] * &rhs[l];
                }
                acc.scale(quarter)
            })
            .collect();
        Ok(SprayJets {
            n,
            f,
            g,
            detg,
            spray,
        })
    }
}

/// Volume-independent curvature data at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SprayGeometry<T> {
    pub point: PointOnTM<T>,
    pub f: T,
    pub g: Matrix<T>,
    pub ginv: Matrix<T>,
    pub detg: T,
    pub cartan: Tensor3<T>,
    pub mean_cartan: Vec<T>,
    pub angular: Matrix<T>,
    /// `G^i`.
    pub spray: Vec<T>,
    /// `N^i_j = dG^i/dy^j`, indexed `[i][j]`.
    pub nonlinear: Matrix<T>,
    /// Berwald connection `G^i_jk = d^2 G^i / dy^j dy^k`, indexed `[i][j][k]`.
    pub berwald_connection: Tensor3<T>,
    /// `B^i_jkl = d^3 G^i / dy^j dy^k dy^l`, indexed `[i][j][k][l]`.
    pub berwald: Tensor4<T>,
    /// Chern connection `Gamma^i_jk`, indexed `[i][j][k]`.
    pub chern: Tensor3<T>,
    /// `L_jkl = -1/2 y_i B^i_jkl`.
    pub landsberg: Tensor3<T>,
    /// `J_k = g^jl L_jkl`.
    pub mean_landsberg: Vec<T>,
    /// `E_ij = F B^m_mij`.
    pub mean_berwald: Matrix<T>,
    /// `e = g^ij E_ij`.
    pub berwald_scalar: T,
}

fn tensor3<T: Real>(n: usize, f: impl Fn(usize, usize, usize) -> Result<T>) -> Result<Tensor3<T>> {
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| f(i, j, k)).collect()).collect())
        .collect()
}

impl<T: Real> SprayGeometry<T> {
    pub(crate) fn from_jets(sj: &SprayJets<T>, p: &PointOnTM<T>, opts: &EngineOptions) -> Result<Self> {
        let n = sj.n;
        let ft = FiberTensors::from_g_jets(sj.f.value(), &sj.g, p)?;
        let fval = ft.f;
        let g = ft.fundamental.g.clone();
        let ginv = ft.fundamental.ginv.clone();
        let yv = |j: usize| n + j;

        let spray: Vec<T> = sj.spray.iter().map(Jet::value).collect();
        let nonlinear: Matrix<T> = (0..n)
            .map(|i| (0..n).map(|j| sj.spray[i].partial_vars(&[yv(j)])).collect())
            .collect::<Result<_>>()?;
        let berwald_connection = tensor3(n, |i, j, k| sj.spray[i].partial_vars(&[yv(j), yv(k)]))?;
        let berwald: Tensor4<T> = (0..n)
            .map(|i| tensor3(n, |j, k, l| sj.spray[i].partial_vars(&[yv(j), yv(k), yv(l)])))
            .collect::<Result<_>>()?;

        // delta_k g_ab = dg_ab/dx^k - N^m_k dg_ab/dy^m
        let mut delta_g = vec![vec![vec![T::zero(); n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                let gab = &sj.g[a][b];
                for k in 0..n {
                    let mut v = gab.partial_vars(&[k])?;
                    for mm in 0..n {
                        v = v - nonlinear[mm][k] * gab.partial_vars(&[yv(mm)])?;
                    }
                    delta_g[a][b][k] = v;
                }
            }
        }
        let half = T::lit(0.5);
        let chern = tensor3(n, |i, j, k| {
            let mut s = T::zero();
            for l in 0..n {
                s = s + ginv[i][l] * (delta_g[l][j][k] + delta_g[l][k][j] - delta_g[j][k][l]);
            }
            Ok(half * s)
        })?;

        let ylow = ft.fundamental.lower(&p.y);
        let landsberg = tensor3(n, |j, k, l| {
            let s = (0..n).fold(T::zero(), |s, i| s + ylow[i] * berwald[i][j][k][l]);
            Ok(-half * s)
        })?;
        let mean_landsberg = (0..n)
            .map(|k| {
                let mut s = T::zero();
                for j in 0..n {
                    for l in 0..n {
                        s = s + ginv[j][l] * landsberg[j][k][l];
                    }
                }
                s
            })
            .collect();
        let scale = T::lit(opts.mean_berwald_scale);
        let mean_berwald: Matrix<T> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let tr = (0..n).fold(T::zero(), |s, m| s + berwald[m][m][i][j]);
                        scale * fval * tr
                    })
                    .collect()
            })
            .collect();
        let berwald_scalar = trace_with(&ginv, &mean_berwald);

        Ok(SprayGeometry {
            point: p.clone(),
            f: fval,
            g,
            ginv,
            detg: ft.fundamental.detg,
            cartan: ft.cartan,
            mean_cartan: ft.mean_cartan,
            angular: ft.angular,
            spray,
            nonlinear,
            berwald_connection,
            berwald,
            chern,
            landsberg,
            mean_landsberg,
            mean_berwald,
            berwald_scalar,
        })
    }

    pub fn at(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<Self> {
        Self::at_with(m, p, &EngineOptions::default())
    }

    pub fn at_with(m: &MetricSpec<T>, p: &PointOnTM<T>, opts: &EngineOptions) -> Result<Self> {
        let sj = SprayJets::at(m, p, FULL_ORDER)?;
        Self::from_jets(&sj, p, opts)
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    /// `max |G^i_jk - Gamma^i_jk - g^im L_mjk|`.
    pub fn relation_residual(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lift = (0..n).fold(T::zero(), |s, m| s + self.ginv[i][m] * self.landsberg[m][j][k]);
                    let r = self.berwald_connection[i][j][k] - self.chern[i][j][k] - lift;
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }

    /// `max |E_ij - e/(n-1) h_ij|`.
    pub fn isotropy_residual(&self) -> T {
        let n = self.dim();
        let c = self.berwald_scalar / T::lit((n - 1) as f64);
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.mean_berwald[i][j] - c * self.angular[i][j]).abs());
            }
        }
        worst
    }
}

pub(crate) fn trace_with<T: Real>(ginv: &Matrix<T>, m: &Matrix<T>) -> T {
    let n = m.len();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            s = s + ginv[i][j] * m[i][j];
        }
    }
    s
}

/// All curvature data at a point, including the volume-dependent part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBundle<T> {
    #[serde(flatten)]
    pub geometry: SprayGeometry<T>,
    pub s_curvature: SCurvatureSample<T>,
    /// `E_ij = F S_{y^i y^j}`.
    pub mean_berwald_from_s: Matrix<T>,
    /// `d tau / dy^k`.
    pub dtau_dy: Vec<T>,
}

/// A metric together with a volume form.
#[derive(Clone, Debug)]
pub struct CurvatureEngine<T: Real> {
    pub metric: MetricSpec<T>,
    pub volume: VolumeForm<T>,
    pub options: EngineOptions,
}

impl<T: Real> CurvatureEngine<T> {
    pub fn new(metric: MetricSpec<T>, volume: VolumeForm<T>) -> Self {
        CurvatureEngine {
            metric,
            volume,
            options: EngineOptions::default(),
        }
    }

    pub fn with_options(mut self, options: EngineOptions) -> Self {
        self.options = options;
        self
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// `ln sigma` around `x` as a jet in the `2n` point variables (order 3).
    pub fn log_sigma(&self, x: &[T]) -> Result<Jet<T>> {
        self.volume.log_sigma_jet(&self.metric, x, 3)
    }

    pub fn geometry(&self, p: &PointOnTM<T>) -> Result<SprayGeometry<T>> {
        SprayGeometry::at_with(&self.metric, p, &self.options)
    }

    pub fn bundle(&self, p: &PointOnTM<T>) -> Result<CurvatureBundle<T>> {
        let ls = self.log_sigma(&p.x)?;
        self.bundle_with(p, &ls)
    }

    /// As [`bundle`](Self::bundle) with a precomputed `ln sigma` jet for `p.x`.
    pub fn bundle_with(&self, p: &PointOnTM<T>, log_sigma: &Jet<T>) -> Result<CurvatureBundle<T>> {
        let sj = SprayJets::at(&self.metric, p, FULL_ORDER)?;
        let geometry = SprayGeometry::from_jets(&sj, p, &self.options)?;
        let (s_curvature, dtau_dy) = crate::volume::s_curvature_from_jets(&sj, p, log_sigma)?;
        let f = geometry.f;
        let mean_berwald_from_s = s_curvature
            .hess_s_y
            .iter()
            .map(|r| r.iter().map(|&v| f * v).collect())
            .collect();
        Ok(CurvatureBundle {
            geometry,
            s_curvature,
            mean_berwald_from_s,
            dtau_dy,
        })
    }

    /// `S` only, at several fiber points sharing the base point `x`.
    pub fn s_on_fiber(&self, x: &[T], ys: &[Vec<T>]) -> Result<Vec<SCurvatureSample<T>>> {
        let ls = self.log_sigma(x)?;
        ys.iter()
            .map(|y| {
                let p = PointOnTM::new(x.to_vec(), y.clone())?;
                let sj = SprayJets::at(&self.metric, &p, FULL_ORDER)?;
                Ok(crate::volume::s_curvature_from_jets(&sj, &p, &ls)?.0)
            })
            .collect()
    }
}

/// `G^i` at a point.
pub fn spray<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<Vec<T>> {
    Ok(SprayJets::at(m, p, 2)?.spray.iter().map(Jet::value).collect())
}

/// `N^i_j = dG^i/dy^j`.
pub fn nonlinear_connection<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<Matrix<T>> {
    let sj = SprayJets::at(m, p, 3)?;
    let n = p.dim();
    (0..n)
        .map(|i| (0..n).map(|j| sj.spray[i].partial_vars(&[n + j])).collect())
        .collect()
}

pub fn berwald_curvature<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<Tensor4<T>> {
    Ok(SprayGeometry::at(m, p)?.berwald)
}

pub fn landsberg<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<Tensor3<T>> {
    Ok(SprayGeometry::at(m, p)?.landsberg)
}

pub fn mean_landsberg<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<Vec<T>> {
    Ok(SprayGeometry::at(m, p)?.mean_landsberg)
}

pub fn mean_berwald<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<Matrix<T>> {
    Ok(SprayGeometry::at(m, p)?.mean_berwald)
}

pub fn berwald_scalar<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<T> {
    Ok(SprayGeometry::at(m, p)?.berwald_scalar)
}

/// Chern connection coefficients; only needs order 3.
pub fn chern_connection<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<Tensor3<T>> {
    Ok(SprayGeometry::at(m, p)?.chern)
}

pub fn relation_check<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<T> {
    Ok(SprayGeometry::at(m, p)?.relation_residual())
}

pub fn isotropy_residual<T: Real>(m: &MetricSpec<T>, p: &PointOnTM<T>) -> Result<T> {
    Ok(SprayGeometry::at(m, p)?.isotropy_residual())
}

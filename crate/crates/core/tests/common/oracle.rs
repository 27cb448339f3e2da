//! Finite-difference and quadrature reference values that use only plain
//! `f64` evaluations of `F`, never jet coefficients.

use finsler::{CurvatureEngine, MetricSpec64, PointOnTM64};

pub type Func<'a> = &'a dyn Fn(&[f64]) -> f64;

/// Mixed partial `d^k f / dp_{v1} ... dp_{vk}` by nested central differences,
/// each level Richardson-extrapolated once.
pub fn partial(f: Func, p: &[f64], vars: &[usize], h: f64) -> f64 {
    match vars.split_first() {
        None => f(p),
        Some((&v, rest)) => {
            let central = |h: f64| {
                let mut a = p.to_vec();
                let mut b = p.to_vec();
                a[v] += h;
                b[v] -= h;
                (partial(f, &a, rest, h) - partial(f, &b, rest, h)) / (2.0 * h)
            };
            (4.0 * central(h / 2.0) - central(h)) / 3.0
        }
    }
}

/// `|a - b| <= tol (1 + max|b|)` elementwise; returns the worst scaled error.
pub fn mismatch(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = 1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs() / scale))
}

pub fn invert(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&p, &q| a[p][c].abs().total_cmp(&a[q][c].abs())).unwrap();
        a.swap(c, piv);
        let d = a[c][c];
        for v in a[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                for k in 0..2 * n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn det(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => unimplemented!("oracle determinant for n <= 3"),
    }
}

fn xy(p: &PointOnTM64) -> Vec<f64> {
    p.x.iter().chain(&p.y).copied().collect()
}

/// `F^2` as a function of the concatenated `(x, y)`.
pub fn f2_of(m: &MetricSpec64) -> impl Fn(&[f64]) -> f64 + '_ {
    let n = m.dim();
    move |v: &[f64]| m.eval(&v[..n], &v[n..]).expect("F").powi(2)
}

pub fn fundamental(m: &MetricSpec64, p: &PointOnTM64) -> Vec<Vec<f64>> {
    let n = p.dim();
    let f2 = f2_of(m);
    let v = xy(p);
    (0..n)
        .map(|i| (0..n).map(|j| 0.5 * partial(&f2, &v, &[n + i, n + j], 1e-3)).collect())
        .collect()
}

pub fn cartan(m: &MetricSpec64, p: &PointOnTM64) -> Vec<f64> {
    let n = p.dim();
    let f2 = f2_of(m);
    let v = xy(p);
    let f = m.eval(&p.x, &p.y).unwrap();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.push(0.25 * f * partial(&f2, &v, &[n + i, n + j, n + k], 1e-2));
            }
        }
    }
    out
}

/// `G^i = 1/4 g^il ([F^2]_{x^k y^l} y^k - [F^2]_{x^l})`.
pub fn spray(m: &MetricSpec64, p: &PointOnTM64) -> Vec<f64> {
    let n = p.dim();
    let f2 = f2_of(m);
    let v = xy(p);
    let ginv = invert(&fundamental(m, p));
    let rhs: Vec<f64> = (0..n)
        .map(|l| {
            let mixed: f64 = (0..n).map(|k| partial(&f2, &v, &[k, n + l], 1e-3) * p.y[k]).sum();
            mixed - partial(&f2, &v, &[l], 1e-3)
        })
        .collect();
    (0..n).map(|i| 0.25 * (0..n).map(|l| ginv[i][l] * rhs[l]).sum::<f64>()).collect()
}

/// Busemann-Hausdorff density by an independent product rule
/// (trapezoid on the circle; midpoint in the polar angle for n = 3).
pub fn bh_sigma(m: &MetricSpec64, x: &[f64]) -> f64 {
    let tau = std::f64::consts::TAU;
    let pi = std::f64::consts::PI;
    match x.len() {
        2 => {
            let k = 512;
            let s: f64 = (0..k)
                .map(|i| {
                    let t = tau * i as f64 / k as f64;
                    m.eval(x, &[t.cos(), t.sin()]).unwrap().powi(-2)
                })
                .sum::<f64>()
                * tau
                / k as f64;
            pi / (0.5 * s)
        }
        3 => {
            let (kp, ka) = (240, 240);
            let mut s = 0.0;
            for i in 0..kp {
                let psi = pi * (i as f64 + 0.5) / kp as f64;
                for j in 0..ka {
                    let phi = tau * j as f64 / ka as f64;
                    let u = [psi.sin() * phi.cos(), psi.sin() * phi.sin(), psi.cos()];
                    s += m.eval(x, &u).unwrap().powi(-3) * psi.sin();
                }
            }
            s *= (pi / kp as f64) * (tau / ka as f64);
            (4.0 / 3.0 * pi) / (s / 3.0)
        }
        _ => unimplemented!(),
    }
}

/// Which quantity of a bundle an oracle comparison refers to, and its error.
#[derive(Debug)]
pub struct Check {
    pub name: &'static str,
    pub error: f64,
}

/// Compares every jet-computed tensor at `p` against layered finite
/// differences. Layers: `F^2 -> g, A, G`; engine `G -> N, d^2 G, B`; engine
/// `g, N -> Gamma`; engine `tau -> d tau/dy, S`; engine `S -> F S_yy`. Each
/// layer's input is itself checked by the layer before it.
pub fn compare_all(engine: &CurvatureEngine<f64>, p: &PointOnTM64) -> Vec<Check> {
    let m = &engine.metric;
    let n = p.dim();
    let b = engine.bundle(p).expect("bundle");
    let geo = &b.geometry;
    let f = geo.f;
    let mut out = Vec::new();
    let mut push = |name, a: Vec<f64>, o: Vec<f64>| out.push(Check { name, error: mismatch(&a, &o) });
    let flat2 = |t: &Vec<Vec<f64>>| t.iter().flatten().copied().collect::<Vec<_>>();
    let flat3 = |t: &Vec<Vec<Vec<f64>>>| t.iter().flatten().flatten().copied().collect::<Vec<_>>();

    let g = fundamental(m, p);
    let ginv = invert(&g);
    push("g", flat2(&geo.g), flat2(&g));
    push("det g", vec![geo.detg], vec![det(&g)]);
    let a = cartan(m, p);
    push("cartan", flat3(&geo.cartan), a.clone());
    let c: Vec<f64> = (0..n)
        .map(|k| {
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| ginv[i][j] * a[(i * n + j) * n + k])
                .sum::<f64>()
                / f
        })
        .collect();
    push("mean cartan", geo.mean_cartan.clone(), c.clone());
    let ylow: Vec<f64> = (0..n).map(|i| (0..n).map(|j| g[i][j] * p.y[j]).sum()).collect();
    let h: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| g[i][j] - ylow[i] * ylow[j] / (f * f))
        .collect();
    push("angular", flat2(&geo.angular), h);
    push("spray", geo.spray.clone(), spray(m, p));

    // engine G as a plain function of y
    let gspray = |i: usize| {
        let x = p.x.clone();
        move |y: &[f64]| finsler::spray::spray(m, &PointOnTM64::new(x.clone(), y.to_vec()).unwrap()).unwrap()[i]
    };
    let mut nl = Vec::new();
    let mut gjk = Vec::new();
    let mut bb = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for i in 0..n {
        let gi = gspray(i);
        for j in 0..n {
            nl.push(partial(&gi, &p.y, &[j], 1e-3));
            for k in 0..n {
                gjk.push(partial(&gi, &p.y, &[j, k], 1e-2));
                for l in 0..n {
                    bb[i][j][k][l] = partial(&gi, &p.y, &[j, k, l], 2e-2);
                }
            }
        }
    }
    push("nonlinear", flat2(&geo.nonlinear), nl.clone());
    push("berwald connection", flat3(&geo.berwald_connection), gjk);
    push(
        "berwald",
        geo.berwald.iter().flat_map(flat3).collect(),
        bb.iter().flat_map(|t| t.iter().flatten().flatten().copied()).collect(),
    );

    // Chern connection from engine g (validated above) and engine N
    let gfun = |a: usize, c: usize| {
        move |v: &[f64]| {
            let q = PointOnTM64::new(v[..n].to_vec(), v[n..].to_vec()).unwrap();
            finsler::metric::fundamental_tensor(m, &q).unwrap().g[a][c]
        }
    };
    let v = xy(p);
    let mut dg = vec![vec![vec![0.0; n]; n]; n];
    for a_ in 0..n {
        for c_ in 0..n {
            let gf = gfun(a_, c_);
            for k in 0..n {
                let mut d = partial(&gf, &v, &[k], 1e-3);
                for mm in 0..n {
                    d -= nl[mm * n + k] * partial(&gf, &v, &[n + mm], 1e-3);
                }
                dg[a_][c_][k] = d;
            }
        }
    }
    let mut chern = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                chern.push(
                    0.5 * (0..n)
                        .map(|l| ginv[i][l] * (dg[l][j][k] + dg[l][k][j] - dg[j][k][l]))
                        .sum::<f64>(),
                );
            }
        }
    }
    push("chern", flat3(&geo.chern), chern);

    // L, J, E, e from the finite-difference B
    let mut lt = vec![0.0; n * n * n];
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                lt[(j * n + k) * n + l] = -0.5 * (0..n).map(|i| ylow[i] * bb[i][j][k][l]).sum::<f64>();
            }
        }
    }
    push("landsberg", flat3(&geo.landsberg), lt.clone());
    let jv: Vec<f64> = (0..n)
        .map(|k| {
            (0..n)
                .flat_map(|j| (0..n).map(move |l| (j, l)))
                .map(|(j, l)| ginv[j][l] * lt[(j * n + k) * n + l])
                .sum()
        })
        .collect();
    push("mean landsberg", geo.mean_landsberg.clone(), jv);
    let e: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| f * (0..n).map(|mm| bb[mm][mm][i][j]).sum::<f64>())
        .collect();
    let escal: f64 = (0..n * n).map(|ij| ginv[ij / n][ij % n] * e[ij]).sum();
    push("mean berwald", flat2(&geo.mean_berwald), e);
    push("berwald scalar", vec![geo.berwald_scalar], vec![escal]);

    // distortion against an independent volume density
    let tau_oracle = 0.5 * det(&g).ln() - bh_sigma(m, &p.x).ln();
    push("distortion", vec![b.s_curvature.tau], vec![tau_oracle]);

    // S and its derivatives from engine tau / S at nearby points
    let ls = engine.log_sigma(&p.x).unwrap();
    let tau_y = |y: &[f64]| {
        engine
            .bundle_with(&PointOnTM64::new(p.x.clone(), y.to_vec()).unwrap(), &ls)
            .unwrap()
            .s_curvature
            .tau
    };
    let dtau_y: Vec<f64> = (0..n).map(|k| partial(&tau_y, &p.y, &[k], 1e-3)).collect();
    push("d tau / dy", b.dtau_dy.clone(), dtau_y.clone());
    push("d tau / dy vs mean cartan", dtau_y.clone(), c);
    let h = 1e-3;
    let dtau_x: Vec<f64> = (0..n)
        .map(|k| {
            let at = |s: f64| {
                let mut x = p.x.clone();
                x[k] += s;
                let ls = engine.log_sigma(&x).unwrap();
                engine
                    .bundle_with(&PointOnTM64::new(x, p.y.clone()).unwrap(), &ls)
                    .unwrap()
                    .s_curvature
                    .tau
            };
            let c1 = |h: f64| (at(h) - at(-h)) / (2.0 * h);
            (4.0 * c1(h / 2.0) - c1(h)) / 3.0
        })
        .collect();
    let s_oracle: f64 = (0..n).map(|k| p.y[k] * dtau_x[k] - 2.0 * geo.spray[k] * dtau_y[k]).sum();
    push("S", vec![b.s_curvature.s], vec![s_oracle]);
    let s_y = |y: &[f64]| {
        engine
            .bundle_with(&PointOnTM64::new(p.x.clone(), y.to_vec()).unwrap(), &ls)
            .unwrap()
            .s_curvature
            .s
    };
    let grad: Vec<f64> = (0..n).map(|i| partial(&s_y, &p.y, &[i], 1e-3)).collect();
    push("S_y", b.s_curvature.grad_s_y.clone(), grad);
    let fsyy: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| f * partial(&s_y, &p.y, &[i, j], 1e-2))
        .collect();
    push("F S_yy", flat2(&b.mean_berwald_from_s), fsyy);
    out
}

/// Closed-form Funk metric of the unit disk and an S-curvature pipeline
/// built only from it, quadrature and finite differences.
pub mod funk {
    use super::{invert, partial};

    pub fn f(x: &[f64], y: &[f64]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let xy = x[0] * y[0] + x[1] * y[1];
        let yy = y[0] * y[0] + y[1] * y[1];
        (((1.0 - r2) * yy + xy * xy).sqrt() + xy) / (1.0 - r2)
    }

    /// `det g = (F/alpha)^3 det a` for a Randers metric `alpha + beta` in n = 2,
    /// with the Klein `alpha` (det a = (1 - |x|^2)^-3).
    pub fn det_g(x: &[f64], y: &[f64]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let xy = x[0] * y[0] + x[1] * y[1];
        let yy = y[0] * y[0] + y[1] * y[1];
        let alpha = ((1.0 - r2) * yy + xy * xy).sqrt() / (1.0 - r2);
        (f(x, y) / alpha).powi(3) / (1.0 - r2).powi(3)
    }

    pub fn sigma(x: &[f64]) -> f64 {
        let k = 512;
        let tau = std::f64::consts::TAU;
        let s: f64 = (0..k)
            .map(|i| {
                let t = tau * i as f64 / k as f64;
                f(x, &[t.cos(), t.sin()]).powi(-2)
            })
            .sum::<f64>()
            * tau
            / k as f64;
        std::f64::consts::PI / (0.5 * s)
    }

    pub fn tau(x: &[f64], y: &[f64]) -> f64 {
        0.5 * det_g(x, y).ln() - sigma(x).ln()
    }

    fn f2(v: &[f64]) -> f64 {
        f(&v[..2], &v[2..]).powi(2)
    }

    pub fn g(x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
        let v = [x[0], x[1], y[0], y[1]];
        (0..2)
            .map(|i| (0..2).map(|j| 0.5 * partial(&f2, &v, &[2 + i, 2 + j], 1e-3)).collect())
            .collect()
    }

    pub fn spray(x: &[f64], y: &[f64]) -> [f64; 2] {
        let v = [x[0], x[1], y[0], y[1]];
        let ginv = invert(&g(x, y));
        let rhs: Vec<f64> = (0..2)
            .map(|l| {
                (0..2).map(|k| partial(&f2, &v, &[k, 2 + l], 1e-3) * y[k]).sum::<f64>() - partial(&f2, &v, &[l], 1e-3)
            })
            .collect();
        [
            0.25 * (ginv[0][0] * rhs[0] + ginv[0][1] * rhs[1]),
            0.25 * (ginv[1][0] * rhs[0] + ginv[1][1] * rhs[1]),
        ]
    }

    pub fn s(x: &[f64], y: &[f64]) -> f64 {
        let v = [x[0], x[1], y[0], y[1]];
        let t = |v: &[f64]| tau(&v[..2], &v[2..]);
        let gs = spray(x, y);
        (0..2)
            .map(|k| y[k] * partial(&t, &v, &[k], 1e-3) - 2.0 * gs[k] * partial(&t, &v, &[2 + k], 1e-3))
            .sum()
    }

    /// `e = g^ij F S_{y^i y^j}`.
    pub fn e(x: &[f64], y: &[f64]) -> f64 {
        let sy = |w: &[f64]| s(x, w);
        let ginv = invert(&g(x, y));
        let fv = f(x, y);
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                acc += ginv[i][j] * fv * partial(&sy, y, &[i, j], 2e-2);
            }
        }
        acc
    }
}

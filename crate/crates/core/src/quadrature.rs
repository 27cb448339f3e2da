//! Quadrature rules on the unit sphere `S^{n-1}` for `n = 2, 3`.

use crate::error::{FinslerError, Result};
use crate::scalar::Real;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=m {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            dp = mf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[m - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Nodes on `S^{n-1}` with weights for the surface measure.
#[derive(Clone, Debug)]
pub struct SphereRule<T> {
    pub nodes: Vec<Vec<T>>,
    pub weights: Vec<T>,
}

/// Trapezoid rule in the angle for `n = 2` (`resolution` nodes); for `n = 3`
/// Gauss-Legendre in the polar angle (`resolution` nodes) times the trapezoid
/// rule in the azimuth (`2 * resolution` nodes).
pub fn sphere_rule<T: Real>(n: usize, resolution: usize) -> Result<SphereRule<T>> {
    let tau = std::f64::consts::TAU;
    if resolution < 4 {
        return Err(FinslerError::Quadrature(format!(
            "resolution {resolution} too small"
        )));
    }
    let (nodes, weights): (Vec<Vec<f64>>, Vec<f64>) = match n {
        2 => (0..resolution)
            .map(|k| {
                let t = tau * k as f64 / resolution as f64;
                (vec![t.cos(), t.sin()], tau / resolution as f64)
            })
            .unzip(),
        3 => {
            let (gl, gw) = gauss_legendre(resolution);
            let naz = 2 * resolution;
            let mut nodes = Vec::with_capacity(resolution * naz);
            let mut weights = Vec::with_capacity(resolution * naz);
            for (t, w) in gl.iter().zip(&gw) {
                let psi = std::f64::consts::FRAC_PI_2 * (t + 1.0);
                let (s, c) = psi.sin_cos();
                let wpsi = w * std::f64::consts::FRAC_PI_2 * s * tau / naz as f64;
                for k in 0..naz {
                    let phi = tau * k as f64 / naz as f64;
                    nodes.push(vec![s * phi.cos(), s * phi.sin(), c]);
                    weights.push(wpsi);
                }
            }
            (nodes, weights)
        }
        _ => {
            return Err(FinslerError::Quadrature(format!(
                "sphere quadrature implemented for n = 2, 3 (got {n})"
            )))
        }
    };
    Ok(SphereRule {
        nodes: nodes
            .into_iter()
            .map(|v| v.into_iter().map(T::lit).collect())
            .collect(),
        weights: weights.into_iter().map(T::lit).collect(),
    })
}

/// Volume of the Euclidean unit `n`-ball.
pub fn unit_ball_volume(n: usize) -> f64 {
    // omega_n = 2 pi / n * omega_{n-2}
    let mut w = if n.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if n.is_multiple_of(2) { 2 } else { 3 };
    while k <= n {
        w *= std::f64::consts::TAU / k as f64;
        k += 2;
    }
    w
}

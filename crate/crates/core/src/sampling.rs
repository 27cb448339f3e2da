//! Deterministic sample plans: seeded base points and low-discrepancy fiber
//! directions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::metric::{MetricSpec, PointOnTM};
use crate::scalar::Real;

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = f64::from(base);
    let mut inv = 1.0 / b;
    let mut r = 0.0;
    while i > 0 {
        r += (i % u64::from(base)) as f64 * inv;
        i /= u64::from(base);
        inv /= b;
    }
    r
}

/// `m` unit vectors spread over `S^{n-1}`; `offset` in `[0, 1)` rotates the set.
///
/// Equispaced angles for `n = 2`, a Fibonacci lattice for `n = 3` and a
/// normalized Halton sequence otherwise.
pub fn fiber_directions<T: Real>(n: usize, m: usize, offset: f64) -> Vec<Vec<T>> {
    let tau = std::f64::consts::TAU;
    let raw: Vec<Vec<f64>> = match n {
        2 => (0..m)
            .map(|k| {
                let t = tau * (k as f64 + offset) / m as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => (0..m)
            .map(|k| {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = tau * ((k as f64 * GOLDEN + offset).fract());
                vec![r * phi.cos(), r * phi.sin(), z]
            })
            .collect(),
        _ => {
            let mut out = Vec::with_capacity(m);
            let mut i = 1u64 + (offset * 1000.0) as u64;
            while out.len() < m {
                let v: Vec<f64> = (0..n)
                    .map(|d| 2.0 * radical_inverse(i, PRIMES[d % PRIMES.len()]) - 1.0)
                    .collect();
                i += 1;
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if norm > 0.1 {
                    out.push(v.iter().map(|a| a / norm).collect());
                }
            }
            out
        }
    };
    raw.into_iter()
        .map(|v| v.into_iter().map(T::lit).collect())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum YMode {
    /// Unit Euclidean directions.
    #[default]
    Unit,
    /// Directions rescaled by a seeded factor in `[0.5, 2]`.
    Scaled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplePlan {
    /// Number of base points.
    #[serde(default = "default_count")]
    pub count: usize,
    /// Fiber directions per base point.
    #[serde(default = "default_fiber")]
    pub fiber: usize,
    #[serde(default)]
    pub seed: u64,
    /// Base points are drawn from `[-x_box, x_box]^n`.
    #[serde(default = "default_box")]
    pub x_box: f64,
    #[serde(default)]
    pub y_mode: YMode,
}

fn default_count() -> usize {
    10
}
fn default_fiber() -> usize {
    5
}
fn default_box() -> f64 {
    0.5
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            count: default_count(),
            fiber: default_fiber(),
            seed: 0,
            x_box: default_box(),
            y_mode: YMode::Unit,
        }
    }
}

/// Sample points sharing one base point.
#[derive(Clone, Debug)]
pub struct FiberSample<T> {
    pub x: Vec<T>,
    pub points: Vec<PointOnTM<T>>,
}

impl SamplePlan {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Draws base points in the metric's domain (and satisfying `guard`) with
    /// their fiber samples.
    pub fn draw<T: Real>(
        &self,
        m: &MetricSpec<T>,
        guard: &dyn Fn(&[f64]) -> bool,
    ) -> Result<Vec<FiberSample<T>>> {
        let n = m.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.count);
        let mut tries = 0usize;
        while out.len() < self.count {
            tries += 1;
            if tries > 1000 * self.count.max(1) {
                return Err(FinslerError::Config(format!(
                    "no admissible base points for {} in box {}",
                    m.label(),
                    self.x_box
                )));
            }
            let xf: Vec<f64> = (0..n)
                .map(|_| rng.gen_range(-self.x_box..=self.x_box))
                .collect();
            let x: Vec<T> = xf.iter().map(|&v| T::lit(v)).collect();
            if !guard(&xf) || !m.in_domain(&x) {
                continue;
            }
            let offset: f64 = rng.gen();
            let points = fiber_directions::<T>(n, self.fiber, offset)
                .into_iter()
                .map(|y| {
                    let y = match self.y_mode {
                        YMode::Unit => y,
                        YMode::Scaled => {
                            let s = T::lit(rng.gen_range(0.5..=2.0));
                            y.into_iter().map(|v| v * s).collect()
                        }
                    };
                    PointOnTM::new(x.clone(), y)
                })
                .collect::<Result<_>>()?;
            out.push(FiberSample { x, points });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::build_funk;

    #[test]
    fn directions_are_unit() {
        for n in [2, 3, 4] {
            for y in fiber_directions::<f64>(n, 17, 0.3) {
                let norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn plan_is_deterministic_and_in_domain() {
        let m = build_funk::<f64>(2).unwrap();
        let plan = SamplePlan {
            count: 6,
            x_box: 0.99,
            seed: 42,
            ..SamplePlan::default()
        };
        let guard = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt() < 0.9;
        let a = plan.draw(&m, &guard).unwrap();
        let b = plan.draw(&m, &guard).unwrap();
        assert_eq!(a.len(), 6);
        for (fa, fb) in a.iter().zip(&b) {
            assert_eq!(fa.x, fb.x);
            assert_eq!(fa.points, fb.points);
            assert!(guard(&fa.x));
        }
    }
}

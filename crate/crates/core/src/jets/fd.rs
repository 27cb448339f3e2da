//! Central finite differences, kept independent of the jet arithmetic so they
//! can serve as a cross-check oracle.

use crate::jets::MultiIndex;
use crate::scalar::Real;

pub const FD_DEFAULT_STEP: f64 = 1e-3;

fn binomial(k: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * f64::from(k - i) / f64::from(i + 1))
}

/// Tensor-product central difference of order `idx` with spacing `h`.
fn central<T: Real>(f: &dyn Fn(&[T]) -> T, point: &[T], idx: &MultiIndex, h: T) -> T {
    let active: Vec<(usize, u32)> = idx
        .exponents()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(v, &e)| (v, e))
        .collect();
    let mut counters = vec![0u32; active.len()];
    let mut total = T::zero();
    let mut x = point.to_vec();
    loop {
        let mut weight = 1.0;
        for (slot, &(v, k)) in active.iter().enumerate() {
            let j = counters[slot];
            weight *= binomial(k, j) * if j.is_multiple_of(2) { 1.0 } else { -1.0 };
            let offset = T::lit(f64::from(k) / 2.0 - f64::from(j));
            x[v] = point[v] + offset * h;
        }
        total = total + T::lit(weight) * f(&x);

        let mut slot = 0;
        loop {
            if slot == active.len() {
                let denom = h.powi(idx.degree() as i32);
                return total / denom;
            }
            counters[slot] += 1;
            if counters[slot] <= active[slot].1 {
                break;
            }
            counters[slot] = 0;
            slot += 1;
        }
    }
}

/// Estimate of the mixed partial `d^|idx| f / du^idx` at `point`.
///
/// Central differences with spacing `step` and `step / 2`, combined by one
/// level of Richardson extrapolation (truncation error `O(step^4)`). A
/// degree-zero index returns `f(point)` exactly.
pub fn fd_oracle<T: Real>(f: &dyn Fn(&[T]) -> T, point: &[T], idx: &MultiIndex, step: T) -> T {
    if idx.degree() == 0 {
        return f(point);
    }
    let coarse = central(f, point, idx, step);
    let fine = central(f, point, idx, step / T::lit(2.0));
    (T::lit(4.0) * fine - coarse) / T::lit(3.0)
}

pub fn fd_oracle_default<T: Real>(f: &dyn Fn(&[T]) -> T, point: &[T], idx: &MultiIndex) -> T {
    fd_oracle(f, point, idx, T::lit(FD_DEFAULT_STEP))
}

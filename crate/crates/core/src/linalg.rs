//! Small dense linear algebra, generic over plain scalars and jets.

use crate::error::{FinslerError, Result};
use crate::jets::Jet;
use crate::scalar::Real;

pub type Matrix<T> = Vec<Vec<T>>;

/// The operations Gauss-Jordan elimination needs.
pub trait FieldElem: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    /// Magnitude used for pivot selection.
    fn magnitude(&self) -> f64;
    /// Exactly zero, including all derivative coefficients for jets.
    fn is_zero(&self) -> bool;
}

impl<T: Real> FieldElem for T {
    fn zero_like(&self) -> Self {
        T::zero()
    }
    fn one_like(&self) -> Self {
        T::one()
    }
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        Ok(*self / *o)
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn magnitude(&self) -> f64 {
        self.abs().as_f64()
    }
    fn is_zero(&self) -> bool {
        *self == T::zero()
    }
}

impl<T: Real> FieldElem for Jet<T> {
    fn zero_like(&self) -> Self {
        Jet::zero(self.space())
    }
    fn one_like(&self) -> Self {
        Jet::constant(self.space(), T::one())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        self.checked_div(o)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn magnitude(&self) -> f64 {
        self.value().abs().as_f64()
    }
    fn is_zero(&self) -> bool {
        self.coeffs().iter().all(|c| *c == T::zero())
    }
}

/// Inverse and determinant by Gauss-Jordan elimination with partial pivoting.
pub fn invert_with_det<S: FieldElem>(m: &[Vec<S>]) -> Result<(Matrix<S>, S)> {
    let n = m.len();
    if n == 0 {
        return Err(FinslerError::Rank("empty matrix".into()));
    }
    let scale = m
        .iter()
        .flat_map(|r| r.iter().map(|v| v.magnitude()))
        .fold(0.0, f64::max);
    let one = m[0][0].one_like();
    let zero = m[0][0].zero_like();
    let mut a: Matrix<S> = m.to_vec();
    let mut inv: Matrix<S> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();
    let mut det = one.clone();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| a[p][col].magnitude().total_cmp(&a[q][col].magnitude()))
            .expect("nonempty range");
        if !(a[piv][col].magnitude() > 1e-14 * scale) {
            return Err(FinslerError::Rank(format!("singular matrix (column {col})")));
        }
        if piv != col {
            a.swap(piv, col);
            inv.swap(piv, col);
            det = det.neg();
        }
        let p = a[col][col].clone();
        det = det.mul(&p);
        for j in 0..n {
            a[col][j] = a[col][j].div(&p)?;
            inv[col][j] = inv[col][j].div(&p)?;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col].clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..n {
                let ta = a[col][j].mul(&factor);
                a[r][j] = a[r][j].sub(&ta);
                let ti = inv[col][j].mul(&factor);
                inv[r][j] = inv[r][j].sub(&ti);
            }
        }
    }
    Ok((inv, det))
}

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
pub fn symmetric_eigenvalues<T: Real>(m: &[Vec<T>]) -> Vec<T> {
    let n = m.len();
    let mut a: Matrix<T> = m.to_vec();
    let two = T::lit(2.0);
    for _sweep in 0..64 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .fold(T::zero(), |s, (i, j)| s + a[i][j] * a[i][j]);
        if off <= T::epsilon() * T::epsilon() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].is_zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (two * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Least-squares solution of `rows * c = rhs` via the normal equations.
pub fn least_squares<T: Real>(rows: &[Vec<T>], rhs: &[T]) -> Result<Vec<T>> {
    let m = rows.first().map(|r| r.len()).unwrap_or(0);
    if m == 0 || rows.len() < m {
        return Err(FinslerError::Rank(format!(
            "{} equations for {m} unknowns",
            rows.len()
        )));
    }
    let mut ata = vec![vec![T::zero(); m]; m];
    let mut atb = vec![T::zero(); m];
    for (r, &b) in rows.iter().zip(rhs) {
        for i in 0..m {
            atb[i] = atb[i] + r[i] * b;
            for j in 0..m {
                ata[i][j] = ata[i][j] + r[i] * r[j];
            }
        }
    }
    let trace = (0..m).fold(T::zero(), |s, i| s + ata[i][i]);
    let ev = symmetric_eigenvalues(&ata);
    if !(ev[0] > T::tol(1e-12) * trace) {
        return Err(FinslerError::Rank(format!(
            "normal matrix nearly singular (min eigenvalue {:e})",
            ev[0].as_f64()
        )));
    }
    let (inv, _) = invert_with_det(&ata)?;
    Ok(mat_vec(&inv, &atb))
}

pub fn mat_vec<T: Real>(m: &[Vec<T>], v: &[T]) -> Vec<T> {
    m.iter()
        .map(|r| r.iter().zip(v).fold(T::zero(), |s, (&a, &b)| s + a * b))
        .collect()
}

pub fn mat_mul<T: Real>(a: &[Vec<T>], b: &[Vec<T>]) -> Matrix<T> {
    let n = b.first().map(|r| r.len()).unwrap_or(0);
    a.iter()
        .map(|r| {
            (0..n)
                .map(|j| r.iter().enumerate().fold(T::zero(), |s, (k, &v)| s + v * b[k][j]))
                .collect()
        })
        .collect()
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let m: Matrix<f64> = vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]];
        let (inv, det) = invert_with_det(&m).unwrap();
        assert!((det - 18.0).abs() < 1e-12);
        let id = mat_mul(&m, &inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[i][j] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_is_rank_error() {
        let m: Matrix<f64> = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(invert_with_det(&m), Err(FinslerError::Rank(_))));
    }

    #[test]
    fn jacobi_eigenvalues() {
        let m: Matrix<f64> = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let ev = symmetric_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jet_matrix_inverse_derivative() {
        // d/dt (1/(1+t)) at t = 0 is -1
        let t: Jet<f64> = Jet::lift(&[0.0], 0, 2);
        let m = vec![vec![t.clone() + 1.0]];
        let (inv, det) = invert_with_det(&m).unwrap();
        assert!((inv[0][0].partial_vars(&[0]).unwrap() + 1.0).abs() < 1e-14);
        assert!((inv[0][0].partial_vars(&[0, 0]).unwrap() - 2.0).abs() < 1e-14);
        assert!((det.partial_vars(&[0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn jet_elimination_keeps_zero_valued_entries() {
        // off-diagonal entry t has value 0 but a nonzero derivative
        let t: Jet<f64> = Jet::lift(&[0.0], 0, 2);
        let one = Jet::constant(t.space(), 1.0);
        let m = vec![vec![one.clone() + 1.0, t.clone()], vec![t.clone(), one.clone()]];
        let (inv, det) = invert_with_det(&m).unwrap();
        // det = 2 - t^2, inv[0][1] = -t / (2 - t^2)
        assert!((det.partial_vars(&[0, 0]).unwrap() + 2.0).abs() < 1e-14);
        assert!((inv[0][1].partial_vars(&[0]).unwrap() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn least_squares_exact_fit() {
        let rows: Matrix<f64> = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let c = least_squares(&rows, &[2.0, 3.0, 5.0]).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] - 3.0).abs() < 1e-12);
        let degenerate = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        assert!(least_squares(&degenerate, &[1.0, 2.0, 3.0]).is_err());
    }
}

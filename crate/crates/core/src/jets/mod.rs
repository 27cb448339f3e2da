//! Truncated multivariate Taylor arithmetic ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients of a scalar function of `nvars`
//! variables up to total degree `order`, densely, in graded-lexicographic
//! order of the exponent vectors. Because the monomials of degree `<= k` form
//! a prefix of those of degree `<= K`, truncating a jet is just truncating its
//! coefficient vector, and jets of different orders over the same variables
//! combine by truncating to the smaller order.
//!
//! Elementary functions are applied by composing their one-variable Taylor
//! series with the nilpotent part of the argument, which is exact up to the
//! truncation order.

mod fd;

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{FinslerError, Result};
use crate::scalar::Real;

pub use fd::{fd_oracle, fd_oracle_default, FD_DEFAULT_STEP};

/// Values below this magnitude are rejected as divisors and log arguments.
pub const DOMAIN_THRESHOLD: f64 = 1e-12;

/// Exponent vector of a monomial, one entry per variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        MultiIndex(e)
    }

    /// Multi-index of the mixed partial `d/dvars[0] d/dvars[1] ...`.
    pub fn from_vars(nvars: usize, vars: &[usize]) -> Self {
        let mut e = vec![0; nvars];
        for &v in vars {
            e[v] += 1;
        }
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// `prod_v (alpha_v)!`, the factor between a mixed partial and its Taylor coefficient.
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&e| (1..=e).map(f64::from).product::<f64>())
            .product()
    }

    fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Monomial layout and multiplication tables for a given `(nvars, order)`.
///
/// Spaces are interned; obtain them with [`JetSpace::get`].
#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    order: usize,
    monomials: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    /// `block_end[d]` = number of monomials of degree `<= d`.
    block_end: Vec<usize>,
    /// `(i, j, k)`: monomial `i` times monomial `j` is monomial `k`.
    products: Vec<(u32, u32, u32)>,
    /// Per variable: `(source, factor)` for each coefficient of the derivative
    /// (which lives in the space of order `order - 1`).
    derivs: Vec<Vec<(u32, u32)>>,
}

fn graded_monomials(nvars: usize, order: usize) -> Vec<MultiIndex> {
    fn of_degree(nvars: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == nvars {
            prefix.push(d);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=d).rev() {
            prefix.push(e);
            of_degree(nvars, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=order as u32 {
        if nvars == 0 {
            if d == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            continue;
        }
        of_degree(nvars, d, &mut Vec::with_capacity(nvars), &mut out);
    }
    out
}

impl JetSpace {
    fn build(nvars: usize, order: usize) -> JetSpace {
        let monomials = graded_monomials(nvars, order);
        let lookup: HashMap<MultiIndex, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let mut block_end = vec![0; order + 1];
        for m in &monomials {
            for slot in block_end.iter_mut().skip(m.degree()) {
                *slot += 1;
            }
        }
        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            let room = order - a.degree();
            for (j, b) in monomials[..block_end[room]].iter().enumerate() {
                let k = lookup[&a.plus(b)];
                products.push((i as u32, j as u32, k as u32));
            }
        }
        let mut derivs = Vec::with_capacity(nvars);
        if order > 0 {
            for v in 0..nvars {
                let unit = MultiIndex::unit(nvars, v);
                let table = monomials[..block_end[order - 1]]
                    .iter()
                    .map(|m| (lookup[&m.plus(&unit)] as u32, m.0[v] + 1))
                    .collect();
                derivs.push(table);
            }
        }
        JetSpace {
            nvars,
            order,
            monomials,
            lookup,
            block_end,
            products,
            derivs,
        }
    }

    /// Interned space for `nvars` variables truncated at total degree `order`.
    pub fn get(nvars: usize, order: usize) -> Arc<JetSpace> {
        static SPACES: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = SPACES.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetSpace::build(nvars, order)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    pub fn index_of(&self, idx: &MultiIndex) -> Option<usize> {
        self.lookup.get(idx).copied()
    }

    fn lower(&self) -> Arc<JetSpace> {
        JetSpace::get(self.nvars, self.order - 1)
    }
}

/// Truncated Taylor expansion of a scalar function around a point.
#[derive(Clone)]
pub struct Jet<T> {
    space: Arc<JetSpace>,
    coeffs: Vec<T>,
}

impl<T: Real> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.space.nvars)
            .field("order", &self.space.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl<T: Real> PartialEq for Jet<T> {
    fn eq(&self, other: &Self) -> bool {
        self.space.nvars == other.space.nvars
            && self.space.order == other.space.order
            && self.coeffs == other.coeffs
    }
}

type Series<T> = Vec<T>;

impl<T: Real> Jet<T> {
    pub fn constant(space: &Arc<JetSpace>, value: T) -> Self {
        let mut coeffs = vec![T::zero(); space.len()];
        coeffs[0] = value;
        Jet {
            space: space.clone(),
            coeffs,
        }
    }

    pub fn zero(space: &Arc<JetSpace>) -> Self {
        Self::constant(space, T::zero())
    }

    /// The coordinate function `u -> u[var]` expanded at `value`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, value: T) -> Self {
        assert!(var < space.nvars, "variable {var} out of range");
        let mut j = Self::constant(space, value);
        if space.order > 0 {
            j.coeffs[1 + var] = T::one();
        }
        j
    }

    /// Jet of the coordinate function `u -> u[var]` at `point`, in
    /// `point.len()` variables truncated at `order`.
    pub fn lift(point: &[T], var: usize, order: usize) -> Self {
        let space = JetSpace::get(point.len(), order);
        Self::variable(&space, var, point[var])
    }

    /// All coordinate functions at `point`.
    pub fn lift_all(point: &[T], order: usize) -> Vec<Self> {
        let space = JetSpace::get(point.len(), order);
        point
            .iter()
            .enumerate()
            .map(|(v, &p)| Self::variable(&space, v, p))
            .collect()
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.space.order
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars
    }

    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Taylor coefficient of the monomial, if it is within the truncation order.
    pub fn coeff(&self, idx: &MultiIndex) -> Option<T> {
        self.space.index_of(idx).map(|i| self.coeffs[i])
    }

    /// Mixed partial derivative `d^|idx| / du^idx` at the expansion point.
    pub fn partial(&self, idx: &MultiIndex) -> Result<T> {
        if idx.degree() > self.space.order {
            return Err(FinslerError::Order {
                requested: idx.degree(),
                max: self.space.order,
            });
        }
        let i = self.space.index_of(idx).ok_or(FinslerError::Order {
            requested: idx.degree(),
            max: self.space.order,
        })?;
        Ok(self.coeffs[i] * T::lit(idx.factorial()))
    }

    /// Mixed partial with respect to the listed variables (repetition allowed).
    pub fn partial_vars(&self, vars: &[usize]) -> Result<T> {
        self.partial(&MultiIndex::from_vars(self.nvars(), vars))
    }

    /// The jet of `du/dvar`, one order lower.
    pub fn derivative(&self, var: usize) -> Result<Self> {
        if self.space.order == 0 {
            return Err(FinslerError::Order {
                requested: 1,
                max: 0,
            });
        }
        let lower = self.space.lower();
        let coeffs = self.space.derivs[var]
            .iter()
            .map(|&(src, fac)| self.coeffs[src as usize] * T::lit(fac as f64))
            .collect();
        Ok(Jet {
            space: lower,
            coeffs,
        })
    }

    /// Derivative with respect to several variables in turn.
    pub fn derivative_vars(&self, vars: &[usize]) -> Result<Self> {
        let mut j = self.clone();
        for &v in vars {
            j = j.derivative(v)?;
        }
        Ok(j)
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.space.order {
            return self.clone();
        }
        let space = JetSpace::get(self.space.nvars, order);
        let coeffs = self.coeffs[..self.space.block_end[order]].to_vec();
        Jet { space, coeffs }
    }

    /// Re-expresses the jet in `target`, mapping variable `v` to `var_map[v]`.
    /// Monomials beyond the target order are dropped.
    pub fn embed(&self, target: &Arc<JetSpace>, var_map: &[usize]) -> Self {
        let mut out = Self::zero(target);
        for (m, &c) in self.space.monomials.iter().zip(&self.coeffs) {
            if m.degree() > target.order {
                break;
            }
            let mut e = vec![0; target.nvars];
            for (v, &ex) in m.0.iter().enumerate() {
                e[var_map[v]] += ex;
            }
            let k = target.lookup[&MultiIndex(e)];
            out.coeffs[k] = out.coeffs[k] + c;
        }
        out
    }

    /// Drops every monomial that involves a variable for which `keep` is false.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut out = self.clone();
        for (m, c) in self.space.monomials.iter().zip(out.coeffs.iter_mut()) {
            if m.0.iter().enumerate().any(|(v, &e)| e > 0 && !keep(v)) {
                *c = T::zero();
            }
        }
        out
    }

    fn common_space(&self, other: &Self) -> Arc<JetSpace> {
        assert_eq!(
            self.space.nvars, other.space.nvars,
            "jets over different variable sets"
        );
        if self.space.order <= other.space.order {
            self.space.clone()
        } else {
            other.space.clone()
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        let space = self.common_space(other);
        let coeffs = self.coeffs[..space.len()]
            .iter()
            .zip(&other.coeffs[..space.len()])
            .map(|(&a, &b)| f(a, b))
            .collect();
        Jet { space, coeffs }
    }

    fn map(&self, f: impl Fn(T) -> T) -> Self {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
        }
    }

    fn product(&self, other: &Self) -> Self {
        let space = self.common_space(other);
        let mut coeffs = vec![T::zero(); space.len()];
        let (a, b) = (&self.coeffs, &other.coeffs);
        for &(i, j, k) in &space.products {
            coeffs[k as usize] = coeffs[k as usize] + a[i as usize] * b[j as usize];
        }
        Jet { space, coeffs }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|c| c * s)
    }

    pub fn square(&self) -> Self {
        self.product(self)
    }

    /// `sum_k series[k] * (self - value)^k`, by Horner's scheme.
    fn compose(&self, series: &[T]) -> Self {
        let mut h = self.clone();
        h.coeffs[0] = T::zero();
        let top = series.len() - 1;
        let mut acc = Jet::constant(&self.space, series[top]);
        for k in (0..top).rev() {
            acc = acc.product(&h);
            acc.coeffs[0] = acc.coeffs[0] + series[k];
        }
        acc
    }

    fn checked(self, op: &str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(FinslerError::domain(op, "non-finite coefficient"))
        }
    }

    fn powf_series(a: T, r: T, order: usize) -> Series<T> {
        let mut s = Vec::with_capacity(order + 1);
        let mut c = a.powf(r);
        s.push(c);
        for k in 1..=order {
            let kk = T::lit(k as f64);
            c = c * (r - kk + T::one()) / (kk * a);
            s.push(c);
        }
        s
    }

    pub fn recip(&self) -> Result<Self> {
        let a = self.value();
        if !(a.abs() > T::lit(DOMAIN_THRESHOLD)) {
            return Err(FinslerError::domain("recip", format!("divisor {a:e}")));
        }
        let mut s = Vec::with_capacity(self.order() + 1);
        let inv = a.recip();
        let mut c = inv;
        for _ in 0..=self.order() {
            s.push(c);
            c = -c * inv;
        }
        self.compose(&s).checked("recip")
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if other.order() == 0 || other.coeffs[1..].iter().all(|c| c.is_zero()) {
            let b = other.value();
            if !(b.abs() > T::lit(DOMAIN_THRESHOLD)) {
                return Err(FinslerError::domain("div", format!("divisor {b:e}")));
            }
            return self.truncate(other.order()).scale(b.recip()).checked("div");
        }
        Ok(self.product(&other.recip()?))
    }

    pub fn sqrt(&self) -> Result<Self> {
        let a = self.value();
        if a < T::zero() || (a.is_zero() && self.order() > 0) || a.is_nan() {
            return Err(FinslerError::domain("sqrt", format!("argument {a:e}")));
        }
        if self.order() == 0 {
            return Ok(self.map(|c| c.sqrt()));
        }
        self.compose(&Self::powf_series(a, T::lit(0.5), self.order()))
            .checked("sqrt")
    }

    /// `self^r` for real `r`; requires a positive value.
    pub fn powf(&self, r: T) -> Result<Self> {
        let a = self.value();
        if !(a > T::zero()) {
            return Err(FinslerError::domain("pow", format!("base {a:e}")));
        }
        self.compose(&Self::powf_series(a, r, self.order()))
            .checked("pow")
    }

    /// Integer power by repeated multiplication; accepts any sign of base
    /// (negative exponents need a nonzero base).
    pub fn powi(&self, n: i32) -> Result<Self> {
        let mut acc = Jet::constant(&self.space, T::one());
        let mut base = self.clone();
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.product(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        if n < 0 {
            acc.recip()
        } else {
            Ok(acc)
        }
    }

    pub fn exp(&self) -> Result<Self> {
        let a = self.value();
        let ea = a.exp();
        let mut s = Vec::with_capacity(self.order() + 1);
        let mut c = ea;
        for k in 0..=self.order() {
            if k > 0 {
                c = c / T::lit(k as f64);
            }
            s.push(c);
        }
        self.compose(&s).checked("exp")
    }

    pub fn ln(&self) -> Result<Self> {
        let a = self.value();
        if !(a > T::lit(DOMAIN_THRESHOLD)) {
            return Err(FinslerError::domain("log", format!("argument {a:e}")));
        }
        let mut s = vec![a.ln()];
        let mut p = T::one();
        for k in 1..=self.order() {
            p = p / a;
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            s.push(sign * p / T::lit(k as f64));
        }
        self.compose(&s).checked("log")
    }

    fn trig(&self, phase: usize) -> Self {
        let a = self.value();
        let half_pi = T::FRAC_PI_2();
        let mut s = Vec::with_capacity(self.order() + 1);
        let mut fact = T::one();
        for k in 0..=self.order() {
            if k > 0 {
                fact = fact * T::lit(k as f64);
            }
            let shift = T::lit((k + phase) as f64) * half_pi;
            s.push((a + shift).sin() / fact);
        }
        self.compose(&s)
    }

    pub fn sin(&self) -> Self {
        self.trig(0)
    }

    pub fn cos(&self) -> Self {
        self.trig(1)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<T: Real> $tr<&Jet<T>> for &Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: &Jet<T>) -> Jet<T> {
                let f: fn(&Jet<T>, &Jet<T>) -> Jet<T> = $body;
                f(self, rhs)
            }
        }
        impl<T: Real> $tr<Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: Jet<T>) -> Jet<T> {
                (&self).$m(&rhs)
            }
        }
        impl<T: Real> $tr<&Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: &Jet<T>) -> Jet<T> {
                (&self).$m(rhs)
            }
        }
        impl<T: Real> $tr<Jet<T>> for &Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: Jet<T>) -> Jet<T> {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.zip_with(b, |x, y| x + y));
binop!(Sub, sub, |a, b| a.zip_with(b, |x, y| x - y));
binop!(Mul, mul, |a, b| a.product(b));

macro_rules! scalar_op {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<T: Real> $tr<T> for &Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: T) -> Jet<T> {
                let f: fn(&Jet<T>, T) -> Jet<T> = $body;
                f(self, rhs)
            }
        }
        impl<T: Real> $tr<T> for Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: T) -> Jet<T> {
                (&self).$m(rhs)
            }
        }
    };
}

scalar_op!(Add, add, |a, s| {
    let mut out = a.clone();
    out.coeffs[0] = out.coeffs[0] + s;
    out
});
scalar_op!(Sub, sub, |a, s| {
    let mut out = a.clone();
    out.coeffs[0] = out.coeffs[0] - s;
    out
});
scalar_op!(Mul, mul, |a, s| a.scale(s));
scalar_op!(Div, div, |a, s| a.scale(s.recip()));

impl<T: Real> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.map(|c| -c)
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        (&self).neg()
    }
}

/// Sum of jets; `None` for an empty iterator.
pub fn sum<T: Real, I: IntoIterator<Item = Jet<T>>>(it: I) -> Option<Jet<T>> {
    it.into_iter().reduce(|a, b| a + b)
}

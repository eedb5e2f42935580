//! The weighted sup-norm space of algebraically decaying sequences, with the
//! symmetric-extension convolution and its a priori estimates.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Arithmetic shared by the float (search) and interval (verification) paths.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn from_f64(x: f64) -> Self;
    /// Floats take the midpoint.
    fn from_interval(x: Interval) -> Self;
    fn abs(self) -> Self;
    /// Encloses `max(self, other)`.
    fn max(self, other: Self) -> Self;
    /// `k^s`, or 1 for `k = 0`.
    fn weight(k: usize, s: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn from_interval(x: Interval) -> Self {
        x.mid()
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn max(self, other: Self) -> Self {
        f64::max(self, other)
    }

    fn weight(k: usize, s: f64) -> Self {
        weight(k, s)
    }
}

impl Scalar for Interval {
    fn zero() -> Self {
        Interval::ZERO
    }

    fn from_f64(x: f64) -> Self {
        Interval::point(x)
    }

    fn from_interval(x: Interval) -> Self {
        x
    }

    fn abs(self) -> Self {
        Interval::abs(self)
    }

    fn max(self, other: Self) -> Self {
        Interval::max(self, other)
    }

    fn weight(k: usize, s: f64) -> Self {
        weight_iv(k, s)
    }
}

/// `ω_k^s` in floating point.
pub fn weight(k: usize, s: f64) -> f64 {
    if k == 0 {
        1.0
    } else if s.fract() == 0.0 && s.abs() < 64.0 {
        (k as f64).powi(s as i32)
    } else {
        (k as f64).powf(s)
    }
}

/// Rigorous enclosure of `ω_k^s`.
///
/// # Panics
///
/// Panics if `k^s` overflows binary64, which no admissible (k, s) does.
pub fn weight_iv(k: usize, s: f64) -> Interval {
    if k == 0 {
        return Interval::ONE;
    }
    Interval::from_int(k as i64)
        .powf(s)
        .and_then(Interval::bounded)
        .expect("weight k^s overflows")
}

/// Finitely supported sequence `(x_0, …, x_{n-1}, 0, 0, …)` with decay rate `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqVector<T> {
    pub coeffs: Vec<T>,
    pub decay: f64,
}

impl<T: Scalar> SeqVector<T> {
    pub fn new(coeffs: Vec<T>, decay: f64) -> Self {
        SeqVector { coeffs, decay }
    }

    pub fn zeros(n: usize, decay: f64) -> Self {
        SeqVector {
            coeffs: vec![T::zero(); n],
            decay,
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `x_k`, zero beyond the support.
    pub fn get(&self, k: usize) -> T {
        self.coeffs.get(k).copied().unwrap_or_else(T::zero)
    }

    /// Symmetric extension `x̃_k = x_{|k|}`.
    pub fn ext(&self, k: i64) -> T {
        self.get(k.unsigned_abs() as usize)
    }

    pub fn norm_s(&self) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (k, &x)| {
                acc.max(x.abs() * T::weight(k, self.decay))
            })
    }

    /// `(x*y)_k` for `0 <= k < len(x) + len(y) - 1`.
    pub fn convolve(&self, other: &SeqVector<T>) -> SeqVector<T> {
        SeqVector {
            coeffs: convolve(&self.coeffs, &other.coeffs),
            decay: self.decay,
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> SeqVector<U> {
        SeqVector {
            coeffs: self.coeffs.iter().map(|&x| f(x)).collect(),
            decay: self.decay,
        }
    }
}

/// Symmetric convolution of two finitely supported sequences.
pub fn convolve<T: Scalar>(x: &[T], y: &[T]) -> Vec<T> {
    if x.is_empty() || y.is_empty() {
        return Vec::new();
    }
    let nx = x.len() as i64;
    let ny = y.len() as i64;
    let len = (nx + ny - 1) as usize;
    let mut out = vec![T::zero(); len];
    for (k, slot) in out.iter_mut().enumerate() {
        let k = k as i64;
        let mut acc = T::zero();
        for k1 in -(nx - 1)..nx {
            let k2 = k - k1;
            if k2.abs() < ny {
                acc = acc + x[k1.unsigned_abs() as usize] * y[k2.unsigned_abs() as usize];
            }
        }
        *slot = acc;
    }
    out
}

/// Estimates `|(x*y)_k| <= α_k^s(n) ‖x‖_s ‖y‖_s / ω_k^s`, valid for `s >= 2`, `n >= 6`.
///
/// The `L`-dependent part is computed once; `get(k)` is constant for `k >= n`.
#[derive(Debug, Clone)]
pub struct AlphaBound {
    s: f64,
    n: usize,
    l: usize,
    base: Interval,
    values: Vec<Interval>,
    tail: Interval,
}

impl AlphaBound {
    pub fn new(s: f64, n: usize, l: usize) -> Result<Self> {
        if s.is_nan() || s < 2.0 || !s.is_finite() {
            return Err(Error::UnsupportedRegime(format!(
                "convolution estimate needs s >= 2 (got {s})"
            )));
        }
        if n < 6 {
            return Err(Error::UnsupportedRegime(format!(
                "convolution estimate needs n >= 6 (got {n})"
            )));
        }
        if l == 0 {
            return Err(Error::Parameter("L must be at least 1".into()));
        }
        let two = Interval::point(2.0);
        let si = Interval::point(s);
        let mut zeta = Interval::ZERO;
        for j in 1..=l {
            zeta += weight_iv(j, s).recip()?;
        }
        // 2/((s-1) L^{s-1}) bounds the tail of 2 Σ l^{-s}
        let l_pow = Interval::from_int(l as i64).powf(s - 1.0)?;
        let base = two * zeta + two.try_div((si - Interval::ONE) * l_pow)?;

        let mut values = Vec::with_capacity(n);
        values.push(Interval::ONE + base);
        for k in 1..n {
            let ks = weight_iv(k, s);
            let mut mid = Interval::ZERO;
            for j in 1..k {
                mid += ks.try_div(weight_iv(j, s) * weight_iv(k - j, s))?;
            }
            values.push(two + base + mid);
        }

        let ni = Interval::from_int(n as i64);
        let ratio = ni.try_div(Interval::from_int(n as i64 - 1))?.powf(s)?;
        let log_term = Interval::point(4.0) * Interval::from_int(n as i64 - 2).ln()?.try_div(ni)?
            + (Interval::pi_squared() - Interval::point(6.0)).try_div(Interval::point(3.0))?;
        let factor = (two.try_div(ni)? + Interval::point(0.5)).powf(s)?;
        let tail = two + base + two * ratio + log_term * factor;

        Ok(AlphaBound {
            s,
            n,
            l,
            base,
            values,
            tail,
        })
    }

    pub fn get(&self, k: usize) -> Interval {
        if k < self.n {
            self.values[k]
        } else {
            self.tail
        }
    }

    /// `2 Σ_{l<=L} l^{-s} + 2/((s-1)L^{s-1})`.
    pub fn base(&self) -> Interval {
        self.base
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }
}

/// One-shot form of [`AlphaBound::get`].
pub fn alpha_bound(k: usize, s: f64, n: usize, l: usize) -> Result<Interval> {
    Ok(AlphaBound::new(s, n, l)?.get(k))
}

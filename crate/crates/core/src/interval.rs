//! Outward-rounded interval arithmetic over `f64`.
//!
//! Every operation is carried out in round-to-nearest. The rounding error of
//! `+`, `−`, `×`, `÷` and `sqrt` is recovered exactly (TwoSum / FMA), and an
//! endpoint moves one ulp outward only when it was rounded the wrong way, so
//! exact results such as `[2, 2] + [3, 3]` stay degenerate. Negation and
//! absolute value are exact.
//!
//! `exp` and `ln` do not call the platform libm: they reduce the argument
//! by multiples of `ln 2` and sum a Taylor (resp. `atanh`) series in interval
//! arithmetic with an explicit remainder term.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("interval result is unbounded")]
    Unbounded,
    #[error("invalid interval endpoints [{lo}, {hi}]")]
    InvalidEndpoints { lo: f64, hi: f64 },
}

/// A closed interval `[lo, hi]` with `f64` endpoints.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

#[inline]
fn down(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        x
    } else {
        x.next_down()
    }
}

#[inline]
fn up(x: f64) -> f64 {
    if x == f64::INFINITY {
        x
    } else {
        x.next_up()
    }
}

// Below this magnitude the error terms of FMA/TwoSum may underflow, so the
// directed-rounding helpers fall back to blind one-ulp inflation.
const TINY: f64 = 1e-280;

/// Rounds a round-to-nearest result `r` down, given the sign of the exact
/// error `exact - r` (or `None` when the error is unknown).
#[inline]
fn round_down(r: f64, err_sign: Option<f64>) -> f64 {
    match err_sign {
        Some(e) if e >= 0.0 => r,
        _ => down(r),
    }
}

#[inline]
fn round_up(r: f64, err_sign: Option<f64>) -> f64 {
    match err_sign {
        Some(e) if e <= 0.0 => r,
        _ => up(r),
    }
}

fn sum_err(a: f64, b: f64, s: f64) -> Option<f64> {
    if !s.is_finite() {
        return None;
    }
    let z = s - a;
    Some((a - (s - z)) + (b - z))
}

fn prod_err(a: f64, b: f64, p: f64) -> Option<f64> {
    if a == 0.0 || b == 0.0 {
        return Some(0.0);
    }
    if !p.is_finite() || p.abs() < TINY {
        return None;
    }
    Some(a.mul_add(b, -p))
}

fn quot_err(a: f64, b: f64, q: f64) -> Option<f64> {
    if a == 0.0 {
        return Some(0.0);
    }
    if !q.is_finite() || q.abs() < TINY || a.abs() < TINY || b.is_infinite() {
        return None;
    }
    // a - q b is exact; the quotient error has the sign of (a - q b) / b
    let r = (-q).mul_add(b, a);
    Some(r * b.signum())
}

fn add_dn(a: f64, b: f64) -> f64 {
    let s = a + b;
    round_down(s, sum_err(a, b, s))
}

fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    round_up(s, sum_err(a, b, s))
}

fn mul_dn(a: f64, b: f64) -> f64 {
    let p = a * b;
    round_down(p, prod_err(a, b, p))
}

fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    round_up(p, prod_err(a, b, p))
}

fn div_dn(a: f64, b: f64) -> f64 {
    let q = a / b;
    round_down(q, quot_err(a, b, q))
}

fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    round_up(q, quot_err(a, b, q))
}

fn sqrt_dn(x: f64) -> f64 {
    let q = x.sqrt();
    if x == 0.0 || x.is_infinite() {
        return q;
    }
    let e = if x < TINY {
        None
    } else {
        Some((-q).mul_add(q, x))
    };
    round_down(q, e).max(0.0)
}

fn sqrt_up(x: f64) -> f64 {
    let q = x.sqrt();
    if x == 0.0 || x.is_infinite() {
        return q;
    }
    let e = if x < TINY {
        None
    } else {
        Some((-q).mul_add(q, x))
    };
    round_up(q, e)
}

// ln 2 = 0.693147180559945309417232121458..., LN_2 is its correctly rounded value.
const LN2: Interval = Interval {
    lo: 0.693_147_180_559_945_2,
    hi: 0.693_147_180_559_945_4,
};

// fdlibm split of ln 2: LN2_HI has 32 significant bits so k * LN2_HI is exact
// for |k| < 2^20, and LN2_LO is ln 2 - LN2_HI rounded to nearest.
#[allow(clippy::excessive_precision)]
const LN2_HI: f64 = 6.931_471_803_691_238_164_90e-01;
const LN2_LO: Interval = Interval {
    lo: 1.908_214_929_270_587_7e-10f64.next_down(),
    hi: 1.908_214_929_270_587_7e-10f64.next_up(),
};

/// Encloses `k * ln 2` to within a few ulps for integral `k`.
fn k_ln2(k: f64) -> Interval {
    Interval::point(k * LN2_HI) + Interval::point(k) * LN2_LO
}

// pi^2 = 9.869604401089358618834490999876...
const PI_SQUARED: Interval = Interval {
    lo: 9.869_604_401_089_356,
    hi: 9.869_604_401_089_36,
};

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Builds `[lo, hi]`; rejects NaN endpoints and `lo > hi`.
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(IntervalError::InvalidEndpoints { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// The degenerate interval `[x, x]`.
    pub const fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Encloses an integer. Exact below 2^53, one ulp wider otherwise.
    pub fn from_int(n: i64) -> Self {
        let x = n as f64;
        if n.unsigned_abs() <= 1 << 53 {
            Interval::point(x)
        } else {
            Interval {
                lo: down(x),
                hi: up(x),
            }
        }
    }

    /// Encloses the rational number `num / den`.
    pub fn ratio(num: i64, den: i64) -> Result<Self, IntervalError> {
        Interval::from_int(num).try_div(Interval::from_int(den))
    }

    /// Smallest interval enclosing both operands.
    pub fn hull(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// `[x - e, x + e]` for `e >= 0`.
    pub fn with_radius(x: f64, e: f64) -> Interval {
        Interval {
            lo: down(x - e),
            hi: up(x + e),
        }
    }

    pub const fn pi_squared() -> Interval {
        PI_SQUARED
    }

    pub const fn ln2() -> Interval {
        LN2
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn mid(self) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            0.5 * self.lo + 0.5 * self.hi
        }
    }

    pub fn width(self) -> f64 {
        up(self.hi - self.lo)
    }

    /// `max(|lo|, |hi|)`.
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value of a member.
    pub fn mig(self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(self) -> bool {
        self.contains(0.0)
    }

    /// `self ⊆ other`.
    pub fn subset_of(self, other: Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn is_strictly_negative(self) -> bool {
        self.hi < 0.0
    }

    pub fn is_strictly_positive(self) -> bool {
        self.lo > 0.0
    }

    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Rejects intervals with an infinite endpoint.
    pub fn bounded(self) -> Result<Interval, IntervalError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(IntervalError::Unbounded)
        }
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Interval {
                lo: 0.0,
                hi: self.mag(),
            }
        }
    }

    /// Pointwise maximum: encloses `max(x, y)` for `x ∈ self`, `y ∈ other`.
    pub fn max(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn min(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    /// Division that reports a divisor containing zero instead of panicking.
    pub fn try_div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.contains_zero() {
            return Err(IntervalError::Domain(
                "division by an interval containing 0",
            ));
        }
        let pairs = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        let lo = pairs
            .iter()
            .map(|&(a, b)| div_dn(a, b))
            .fold(f64::INFINITY, f64::min);
        let hi = pairs
            .iter()
            .map(|&(a, b)| div_up(a, b))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval { lo, hi })
    }

    pub fn recip(self) -> Result<Interval, IntervalError> {
        Interval::ONE.try_div(self)
    }

    pub fn sqr(self) -> Interval {
        let a = self.abs();
        Interval {
            lo: mul_dn(a.lo, a.lo).max(0.0),
            hi: mul_up(a.hi, a.hi),
        }
    }

    pub fn sqrt(self) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::Domain(
                "sqrt of an interval with negative members",
            ));
        }
        Ok(Interval {
            lo: sqrt_dn(self.lo),
            hi: sqrt_up(self.hi),
        })
    }

    /// Integer power; even powers of intervals straddling zero start at 0.
    pub fn powi(self, n: i32) -> Result<Interval, IntervalError> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let n = n as u32;
        if n == 0 {
            return Ok(Interval::ONE);
        }
        let lo_pow = point_powi(self.lo, n);
        let hi_pow = point_powi(self.hi, n);
        if n % 2 == 1 {
            return Ok(Interval {
                lo: lo_pow.lo,
                hi: hi_pow.hi,
            });
        }
        let upper = lo_pow.hi.max(hi_pow.hi);
        if self.contains_zero() {
            Ok(Interval { lo: 0.0, hi: upper })
        } else {
            Ok(Interval {
                lo: lo_pow.lo.min(hi_pow.lo),
                hi: upper,
            })
        }
    }

    pub fn exp(self) -> Result<Interval, IntervalError> {
        let lo = exp_point(self.lo)?.lo;
        let hi = exp_point(self.hi)?.hi;
        Ok(Interval { lo, hi })
    }

    pub fn ln(self) -> Result<Interval, IntervalError> {
        if self.lo <= 0.0 {
            return Err(IntervalError::Domain(
                "ln of an interval with non-positive members",
            ));
        }
        let lo = ln_point(self.lo)?.lo;
        let hi = ln_point(self.hi)?.hi;
        Ok(Interval { lo, hi })
    }

    /// `self^e` for a real exponent. Integral exponents go through [`powi`];
    /// otherwise the base must be nonnegative (and positive if `e < 0`).
    ///
    /// [`powi`]: Interval::powi
    pub fn powf(self, e: f64) -> Result<Interval, IntervalError> {
        if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
            return self.powi(e as i32);
        }
        self.pow(Interval::point(e))
    }

    /// `self^e` for an interval exponent and a nonnegative base.
    pub fn pow(self, e: Interval) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::Domain("real power of a negative base"));
        }
        if self.lo == 0.0 {
            if e.lo <= 0.0 {
                return Err(IntervalError::Domain("non-positive power of zero"));
            }
            let hi = if self.hi == 0.0 {
                0.0
            } else {
                (e * Interval::point(self.hi).ln()?).exp()?.hi
            };
            return Ok(Interval { lo: 0.0, hi });
        }
        (e * self.ln()?).exp()
    }

    /// Multiplies by `2^k` (exact unless the result leaves the normal range).
    fn scale_pow2(self, k: i32) -> Interval {
        let mut out = self;
        let mut k = k;
        while k != 0 {
            let step = k.clamp(-1000, 1000);
            let f = f64::from_bits(((1023 + step) as u64) << 52);
            out = Interval {
                lo: out.lo * f,
                hi: out.hi * f,
            };
            k -= step;
        }
        // subnormal results may have been rounded
        Interval {
            lo: down(out.lo),
            hi: up(out.hi),
        }
    }
}

/// Encloses `x^n` for a point `x` by binary powering of `|x|`.
fn point_powi(x: f64, n: u32) -> Interval {
    let mut base = Interval::point(x.abs());
    let mut acc = Interval::ONE;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        e >>= 1;
        if e > 0 {
            base = base * base;
        }
    }
    // all factors are nonnegative
    acc.lo = acc.lo.max(0.0);
    if x < 0.0 && n % 2 == 1 {
        -acc
    } else {
        acc
    }
}

const EXP_TERMS: usize = 18;

fn exp_point(x: f64) -> Result<Interval, IntervalError> {
    if x.is_nan() {
        return Err(IntervalError::Domain("exp of NaN"));
    }
    if x > 709.0 {
        return Err(IntervalError::Unbounded);
    }
    if x < -745.0 {
        return Ok(Interval {
            lo: 0.0,
            hi: f64::from_bits(1),
        });
    }
    if x == 0.0 {
        return Ok(Interval::ONE);
    }
    let k = (x / std::f64::consts::LN_2).round();
    // x - k * LN2_HI with the rounding errors of both operations kept exactly
    let p = k * LN2_HI;
    let p_err = k.mul_add(LN2_HI, -p);
    let d = x - p;
    let z = d - x;
    let d_err = (x - (d - z)) + (-p - z);
    let r = Interval::point(d) + (Interval::point(d_err) - Interval::point(p_err))
        - Interval::point(k) * LN2_LO;
    // |r| <= 0.35, so the Taylor remainder after EXP_TERMS terms is tiny
    let mut sum = Interval::ONE;
    for n in (1..EXP_TERMS).rev() {
        sum = Interval::ONE + sum * r / Interval::point(n as f64);
    }
    let rmag = r.mag();
    let mut rem = 2.0; // e^{|r|} < 2
    for n in 1..=EXP_TERMS {
        rem = up(up(rem * rmag) / n as f64);
    }
    let series = sum + Interval { lo: -rem, hi: rem };
    let out = series.scale_pow2(k as i32);
    Ok(Interval {
        lo: out.lo.max(0.0),
        hi: out.hi,
    })
}

const LN_TERMS: usize = 16;

fn ln_point(x: f64) -> Result<Interval, IntervalError> {
    if x.is_nan() || x <= 0.0 || !x.is_finite() {
        return Err(IntervalError::Domain(
            "ln of a non-positive or non-finite value",
        ));
    }
    if x == 1.0 {
        return Ok(Interval::ZERO);
    }
    let (mut f, mut e) = frexp(x);
    // f in [0.5, 1): move it to [sqrt(1/2), sqrt(2))
    if f < std::f64::consts::FRAC_1_SQRT_2 {
        f *= 2.0;
        e -= 1;
    }
    // ln f = 2 atanh(t), t = (f - 1) / (f + 1), |t| < 0.172
    let fi = Interval::point(f);
    let t = (fi - Interval::ONE) / (fi + Interval::ONE);
    let t2 = t.sqr();
    let mut sum = Interval::ZERO;
    for j in (0..LN_TERMS).rev() {
        sum = Interval::ONE / Interval::point((2 * j + 1) as f64) + t2 * sum;
    }
    let series = t * sum;
    // remainder: sum_{j >= N} |t|^{2j+1}/(2j+1) <= |t|^{2N+1} / ((2N+1)(1 - t^2))
    let tm = t.mag();
    let mut rem = tm;
    for _ in 0..LN_TERMS {
        rem = up(up(rem * tm) * tm);
    }
    rem = up(rem / ((2 * LN_TERMS + 1) as f64 * 0.97));
    let ln_f = Interval::point(2.0) * (series + Interval { lo: -rem, hi: rem });
    Ok(k_ln2(e as f64) + ln_f)
}

/// Splits a positive finite `x` into `f * 2^e` with `f ∈ [0.5, 1)`.
fn frexp(x: f64) -> (f64, i32) {
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    if exp_bits == 0 {
        // subnormal: normalise first
        let (f, e) = frexp(x * f64::from_bits(((1023 + 64) as u64) << 52));
        return (f, e - 64);
    }
    let e = exp_bits - 1022;
    let f = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (f, e)
}

impl Default for Interval {
    fn default() -> Self {
        Interval::ZERO
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = IntervalError;

    fn try_from(v: [f64; 2]) -> Result<Self, Self::Error> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(iv: Interval) -> Self {
        [iv.lo, iv.hi]
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.6e}, {:.6e}]", self.lo, self.hi)
    }
}

impl PartialOrd for Interval {
    /// Certain ordering only: `Less` iff every member of `self` is below every
    /// member of `other`.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self == other && self.lo == self.hi {
            Some(Ordering::Equal)
        } else if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}

impl Neg for Interval {
    type Output = Interval;

    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_dn(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;

    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_dn(self.lo, -rhs.hi),
            hi: add_up(self.hi, -rhs.lo),
        }
    }
}

impl Mul for Interval {
    type Output = Interval;

    fn mul(self, rhs: Interval) -> Interval {
        if self == Interval::ZERO || rhs == Interval::ZERO {
            return Interval::ZERO;
        }
        let pairs = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        let lo = pairs
            .iter()
            .map(|&(a, b)| mul_dn(a, b))
            .fold(f64::INFINITY, f64::min);
        let hi = pairs
            .iter()
            .map(|&(a, b)| mul_up(a, b))
            .fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }
}

impl Div for Interval {
    type Output = Interval;

    /// # Panics
    ///
    /// Panics if `rhs` contains zero; use [`Interval::try_div`] when the
    /// divisor is not known to be bounded away from zero.
    fn div(self, rhs: Interval) -> Interval {
        self.try_div(rhs)
            .expect("interval division by an interval containing 0")
    }
}

impl AddAssign for Interval {
    fn add_assign(&mut self, rhs: Interval) {
        *self = *self + rhs;
    }
}

impl SubAssign for Interval {
    fn sub_assign(&mut self, rhs: Interval) {
        *self = *self - rhs;
    }
}

impl MulAssign for Interval {
    fn mul_assign(&mut self, rhs: Interval) {
        *self = *self * rhs;
    }
}

impl Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + b)
    }
}

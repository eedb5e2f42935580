//! Problem definitions: coefficient generators, the quadratic map
//! `f_k(x) = λ_k x_{k-1} + μ_k x_k + β_k x_{k+1} + σ (x*x)_k − g_k`, its
//! Jacobian, and a Newton solver for the finite projection.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::pseudoinv::IntervalMatrix;
use crate::seqspace::{convolve, Scalar};
use crate::tridiag::{CoefficientGenerator, TailConstants, TridiagCoeffs};

pub const DEFAULT_NEWTON_TOL: f64 = 1e-14;
pub const DEFAULT_NEWTON_MAX_ITER: usize = 50;

/// Forcing of the built-in example: `g(ξ) = ½ + 3 cos ξ + ½ cos 2ξ`.
pub const EXAMPLE4_G: [f64; 3] = [0.5, 1.5, 0.25];

/// `λ_k = ½(k−1)²`, `μ_k = 1 + 2k²`, `β_k = ½(k+1)²`, with `μ_0 = β_0 = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Example4Coefficients;

impl CoefficientGenerator for Example4Coefficients {
    fn coeffs(&self, k: usize) -> Result<[Interval; 3]> {
        if k == 0 {
            return Ok([Interval::ZERO, Interval::ONE, Interval::ONE]);
        }
        let k = k as i64;
        let half = Interval::point(0.5);
        Ok([
            Interval::from_int((k - 1) * (k - 1)) * half,
            Interval::from_int(1 + 2 * k * k),
            Interval::from_int((k + 1) * (k + 1)) * half,
        ])
    }
}

/// Exact check of the growth and ratio assumptions of the built-in example.
#[derive(Debug, Clone, PartialEq)]
pub struct Example4Certificate {
    pub m: usize,
    /// `δ = delta_num / delta_den = (m+1)² / (4m² + 2)`.
    pub delta_num: u128,
    pub delta_den: u128,
    /// `δ` rounded up to binary64.
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    pub k0: usize,
    pub failures: Vec<String>,
}

impl Example4Certificate {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn constants(&self) -> TailConstants {
        TailConstants {
            s_l: 2.0,
            c1: self.c1,
            c2: self.c2,
            delta: self.delta,
            k0: self.k0,
        }
    }
}

/// Proves the assumptions of the built-in example for every `k`:
///
/// * `k = 0`: `μ_0 = β_0 = 1 <= C2`.
/// * `k >= 1`: `(k−1)² <= 6k²`, `1 + 2k² <= 3k²`, `(k+1)² <= 6k²` and `2k² <= 1 + 2k²`.
/// * `β_k/μ_k = (k+1)²/(2 + 4k²)` has derivative sign `1 − 2k < 0`, so its
///   maximum over `k >= m` is attained at `k = m` and equals `δ`; `λ_k <= β_k`.
/// * `δ < ½` iff `(m+1)² < 2m² + 1` iff `m > 2`.
pub fn assumption_certificate_example4(m: usize) -> Example4Certificate {
    let mm = m as u128;
    let delta_num = (mm + 1) * (mm + 1);
    let delta_den = 4 * mm * mm + 2;
    let mut failures = Vec::new();
    if m < 1 {
        failures.push("the ratio argument needs m >= 1".to_string());
    }
    // 1 - 2k < 0 for all k >= max(m, 1)
    if 2 * mm.max(1) <= 1 {
        failures.push("beta_k/mu_k is not decreasing beyond m".to_string());
    }
    if 2 * delta_num >= delta_den {
        failures.push(format!("delta = {delta_num}/{delta_den} is not below 1/2"));
    }
    Example4Certificate {
        m,
        delta_num,
        delta_den,
        delta: rational_up(delta_num as f64, delta_den as f64),
        c1: 2.0,
        c2: 3.0,
        k0: m,
        failures,
    }
}

/// Smallest binary64 not below `num/den` (both exactly representable, positive).
fn rational_up(num: f64, den: f64) -> f64 {
    let q = num / den;
    // q den - num is exact
    if q.mul_add(den, -num) < 0.0 {
        q.next_up()
    } else {
        q
    }
}

pub fn example4_tridiag(m: usize) -> Result<TridiagCoeffs> {
    let cert = assumption_certificate_example4(m);
    Ok(TridiagCoeffs::new(
        Arc::new(Example4Coefficients),
        cert.constants(),
        cert.passed(),
    ))
}

// ---------------------------------------------------------------------------
// Coefficient expressions in k

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Interval),
    K,
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            s: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, k: usize) -> Result<Interval> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::K => Interval::from_int(k as i64),
            Expr::Neg(e) => -e.eval(k)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval(k)?;
                if let (Op::Pow, Expr::Num(e)) = (op, b.as_ref()) {
                    if e.lo() == e.hi() {
                        return Ok(x.powf(e.lo())?);
                    }
                }
                let y = b.eval(k)?;
                match op {
                    Op::Add => x + y,
                    Op::Sub => x - y,
                    Op::Mul => x * y,
                    Op::Div => x.try_div(y)?,
                    Op::Pow => {
                        if y.lo() == y.hi() {
                            x.powf(y.lo())?
                        } else {
                            x.pow(y)?
                        }
                    }
                }
            }
        })
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::Problem(format!(
            "expression parse error at byte {}: {what}",
            self.pos
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == b'+' { Op::Add } else { Op::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == b'*' { Op::Mul } else { Op::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'k') => {
                self.pos += 1;
                Ok(Expr::K)
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.s.len()
            && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if self.pos < self.s.len() && matches!(self.s[self.pos], b'e' | b'E') {
            self.pos += 1;
            if self.pos < self.s.len() && matches!(self.s[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        decimal_enclosure(text)
            .map(Expr::Num)
            .ok_or_else(|| Error::Problem(format!("invalid number literal '{text}'")))
    }
}

/// Encloses a decimal literal; exact when the value is a binary64 number.
pub fn decimal_enclosure(text: &str) -> Option<Interval> {
    let x: f64 = text.parse().ok()?;
    if !x.is_finite() {
        return None;
    }
    if decimal_is_exact(text, x) {
        Some(Interval::point(x))
    } else {
        Some(Interval::with_radius(x, 0.0))
    }
}

fn decimal_is_exact(text: &str, x: f64) -> bool {
    // value = digits * 10^exp10
    let (mant, exp_part) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()),
        None => (text, Some(0)),
    };
    let Some(mut exp10) = exp_part else {
        return false;
    };
    let mut digits = String::new();
    if let Some(dot) = mant.find('.') {
        digits.push_str(&mant[..dot]);
        let frac = &mant[dot + 1..];
        digits.push_str(frac);
        exp10 -= frac.len() as i32;
    } else {
        digits.push_str(mant);
    }
    let digits = digits.trim_start_matches('0');
    if digits.is_empty() {
        return true;
    }
    let Ok(mut n) = digits.parse::<u128>() else {
        return false;
    };
    while exp10 < 0 && n % 10 == 0 {
        n /= 10;
        exp10 += 1;
    }
    if exp10 >= 0 {
        // integer: exact iff it converts back
        let Some(v) = 10u128
            .checked_pow(exp10 as u32)
            .and_then(|p| n.checked_mul(p))
        else {
            return false;
        };
        return v < (1u128 << 53) && v as f64 == x;
    }
    // n / 10^e = (n / 5^e) / 2^e is dyadic iff 5^e divides n
    let Some(p5) = 5u128.checked_pow((-exp10) as u32) else {
        return false;
    };
    n % p5 == 0 && (n / p5) < (1u128 << 53)
}

#[derive(Debug, Clone)]
pub struct ExprCoefficients {
    pub lambda: Expr,
    pub mu: Expr,
    pub beta: Expr,
    pub mu0: Option<Interval>,
    pub beta0: Option<Interval>,
}

impl CoefficientGenerator for ExprCoefficients {
    fn coeffs(&self, k: usize) -> Result<[Interval; 3]> {
        if k == 0 {
            let mu = match self.mu0 {
                Some(v) => v,
                None => self.mu.eval(0)?,
            };
            let beta = match self.beta0 {
                Some(v) => v,
                None => self.beta.eval(0)?,
            };
            return Ok([Interval::ZERO, mu, beta]);
        }
        Ok([self.lambda.eval(k)?, self.mu.eval(k)?, self.beta.eval(k)?])
    }
}

// ---------------------------------------------------------------------------
// Problem files

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSpec {
    pub lambda: String,
    pub mu: String,
    pub beta: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    pub sigma: f64,
    pub g: Vec<f64>,
    #[serde(rename = "s_L")]
    pub s_l: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub delta: f64,
    pub k0: usize,
    /// The author asserts the assumptions hold for every k beyond the checked range.
    #[serde(default)]
    pub tail_certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ProblemSpec {
    Example4 { sigma: f64 },
    Custom(CustomSpec),
}

impl ProblemSpec {
    pub fn sigma(&self) -> f64 {
        match self {
            ProblemSpec::Example4 { sigma } => *sigma,
            ProblemSpec::Custom(c) => c.sigma,
        }
    }

    pub fn with_sigma(&self, sigma: f64) -> ProblemSpec {
        match self {
            ProblemSpec::Example4 { .. } => ProblemSpec::Example4 { sigma },
            ProblemSpec::Custom(c) => ProblemSpec::Custom(CustomSpec { sigma, ..c.clone() }),
        }
    }
}

/// A quadratic problem with a fixed value of `σ`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    spec: ProblemSpec,
    generator: Arc<dyn CoefficientGenerator>,
    pub sigma: f64,
    pub g: Vec<f64>,
}

impl QuadraticProblem {
    pub fn example4(sigma: f64) -> Self {
        QuadraticProblem {
            spec: ProblemSpec::Example4 { sigma },
            generator: Arc::new(Example4Coefficients),
            sigma,
            g: EXAMPLE4_G.to_vec(),
        }
    }

    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        match spec {
            ProblemSpec::Example4 { sigma } => Ok(Self::example4(*sigma)),
            ProblemSpec::Custom(c) => {
                if !c.sigma.is_finite() || c.g.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Problem("sigma and g must be finite".into()));
                }
                let gen = ExprCoefficients {
                    lambda: Expr::parse(&c.lambda)?,
                    mu: Expr::parse(&c.mu)?,
                    beta: Expr::parse(&c.beta)?,
                    mu0: c.mu0.map(Interval::point),
                    beta0: c.beta0.map(Interval::point),
                };
                Ok(QuadraticProblem {
                    spec: spec.clone(),
                    generator: Arc::new(gen),
                    sigma: c.sigma,
                    g: c.g.clone(),
                })
            }
        }
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn with_sigma(&self, sigma: f64) -> Self {
        QuadraticProblem {
            spec: self.spec.with_sigma(sigma),
            generator: self.generator.clone(),
            sigma,
            g: self.g.clone(),
        }
    }

    /// Tail coefficients and constants for truncation index `m`.
    pub fn tridiag(&self, m: usize) -> Result<TridiagCoeffs> {
        match &self.spec {
            ProblemSpec::Example4 { .. } => example4_tridiag(m),
            ProblemSpec::Custom(c) => Ok(TridiagCoeffs::new(
                self.generator.clone(),
                TailConstants {
                    s_l: c.s_l,
                    c1: c.c1,
                    c2: c.c2,
                    delta: c.delta,
                    k0: c.k0,
                },
                c.tail_certified,
            )),
        }
    }

    pub fn triple(&self, k: usize) -> Result<[Interval; 3]> {
        let mut t = self.generator.coeffs(k)?;
        if k == 0 {
            t[0] = Interval::ZERO;
        }
        Ok(t)
    }

    fn triples(&self, n: usize) -> Result<Vec<[Interval; 3]>> {
        (0..n).map(|k| self.triple(k)).collect()
    }

    pub fn g_at(&self, k: usize) -> f64 {
        self.g.get(k).copied().unwrap_or(0.0)
    }

    fn check_support(&self, x_len: usize, m: usize) -> Result<()> {
        if x_len > m {
            return Err(Error::Parameter(format!(
                "x has {x_len} coefficients but the projection keeps {m}"
            )));
        }
        Ok(())
    }

    /// `(f_k(x))_{k<m}` for `x` supported on `0..m`.
    pub fn f_proj<T: Scalar>(&self, x: &[T], m: usize) -> Result<Vec<T>> {
        self.check_support(x.len(), m)?;
        let mut xp = x.to_vec();
        xp.resize(m, T::zero());
        self.f_rows(&xp, m)
    }

    /// Rows `0..rows` of `f(x)`, treating `x` as zero beyond its support.
    fn f_rows<T: Scalar>(&self, x: &[T], rows: usize) -> Result<Vec<T>> {
        let conv = convolve(x, x);
        let tr = self.triples(rows)?;
        let get = |j: usize| x.get(j).copied().unwrap_or_else(T::zero);
        let sigma = T::from_f64(self.sigma);
        let mut out = Vec::with_capacity(rows);
        for (k, [l, mu, b]) in tr.into_iter().enumerate() {
            let mut v = T::from_interval(mu) * get(k) + T::from_interval(b) * get(k + 1);
            if k > 0 {
                v = T::from_interval(l) * get(k - 1) + v;
            }
            let c = conv.get(k).copied().unwrap_or_else(T::zero);
            v = v + sigma * c - T::from_f64(self.g_at(k));
            out.push(v);
        }
        Ok(out)
    }

    /// Enclosures of `f_k(x̄)` for `0 <= k <= 2m − 2`, where `m = x̄.len()`.
    /// Every later entry vanishes provided `g` is supported below `2m − 1`.
    pub fn f_full_interval(&self, x: &[f64]) -> Result<Vec<Interval>> {
        let m = x.len();
        if m == 0 {
            return Err(Error::Parameter("empty x".into()));
        }
        if self.g.len() > 2 * m - 1 {
            return Err(Error::Problem(format!(
                "forcing has {} coefficients; at most 2m - 1 = {} are supported",
                self.g.len(),
                2 * m - 1
            )));
        }
        let xi: Vec<Interval> = x.iter().map(|&v| Interval::point(v)).collect();
        self.f_rows(&xi, 2 * m - 1)
    }

    /// `∂f_k/∂σ = (x*x)_k` for `k < m`.
    pub fn d_sigma(&self, x: &[f64], m: usize) -> Result<Vec<f64>> {
        self.check_support(x.len(), m)?;
        let mut c = convolve(x, x);
        c.resize(m.max(c.len()), 0.0);
        c.truncate(m);
        Ok(c)
    }

    fn jacobian_entries<T: Scalar>(&self, x: &[T], m: usize) -> Result<Vec<T>> {
        self.check_support(x.len(), m)?;
        let tr = self.triples(m)?;
        let ext = |j: i64| {
            x.get(j.unsigned_abs() as usize)
                .copied()
                .unwrap_or_else(T::zero)
        };
        let two_sigma = T::from_f64(2.0 * self.sigma);
        let mut a = vec![T::zero(); m * m];
        for k in 0..m {
            for j in 0..m {
                let (ki, ji) = (k as i64, j as i64);
                let quad = if j == 0 {
                    two_sigma * ext(ki)
                } else {
                    two_sigma * (ext(ki - ji) + ext(ki + ji))
                };
                let lin = if j + 1 == k {
                    T::from_interval(tr[k][0])
                } else if j == k {
                    T::from_interval(tr[k][1])
                } else if j == k + 1 {
                    T::from_interval(tr[k][2])
                } else {
                    T::zero()
                };
                a[k * m + j] = lin + quad;
            }
        }
        Ok(a)
    }

    /// `Df^{(m)}(x)` in floating point.
    pub fn jacobian(&self, x: &[f64], m: usize) -> Result<DMatrix<f64>> {
        let a = self.jacobian_entries(x, m)?;
        Ok(DMatrix::from_row_slice(m, m, &a))
    }

    /// Rigorous enclosure of `Df^{(m)}(x)`.
    pub fn jacobian_interval(&self, x: &[f64], m: usize) -> Result<IntervalMatrix> {
        let xi: Vec<Interval> = x.iter().map(|&v| Interval::point(v)).collect();
        let a = self.jacobian_entries(&xi, m)?;
        Ok(IntervalMatrix::from_row_major(m, m, a))
    }

    /// Newton's method on the projection `f^{(m)}`, stopping once `‖f‖_∞ <= tol`.
    pub fn newton_solve(
        &self,
        x0: &[f64],
        m: usize,
        tol: f64,
        max_iter: usize,
    ) -> Result<Vec<f64>> {
        self.check_support(x0.len(), m)?;
        let mut x = x0.to_vec();
        x.resize(m, 0.0);
        let mut res = inf_norm(&self.f_proj(&x, m)?);
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::Convergence {
                iterations: 0,
                residual: res,
            });
        }
        for it in 0..max_iter {
            if res <= tol {
                return Ok(x);
            }
            let f = DVector::from_vec(self.f_proj(&x, m)?);
            let jac = self.jacobian(&x, m)?;
            let dx = solve(jac, &f)?;
            for (xi, d) in x.iter_mut().zip(dx.iter()) {
                *xi -= d;
            }
            res = inf_norm(&self.f_proj(&x, m)?);
            if !res.is_finite() {
                return Err(Error::Convergence {
                    iterations: it + 1,
                    residual: res,
                });
            }
        }
        if res <= tol {
            Ok(x)
        } else {
            Err(Error::Convergence {
                iterations: max_iter,
                residual: res,
            })
        }
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a: f64, &b| a.max(b.abs()))
}

/// LU solve; reports `Singular` for a numerically singular matrix.
pub(crate) fn solve(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = a.lu();
    let x = lu.solve(b).ok_or(Error::Singular)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(x)
}

/// Coefficients of `cos ξ` with the symmetric convention: `x_1 = ½`.
pub fn trivial_solution(m: usize) -> Vec<f64> {
    let mut x = vec![0.0; m];
    if m > 1 {
        x[1] = 0.5;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_examples() {
        let c = assumption_certificate_example4(20);
        assert!(c.passed());
        assert_eq!((c.delta_num, c.delta_den), (441, 1602));
        assert!(c.delta >= 441.0 / 1602.0);
        assert!((c.delta - 0.275_281).abs() < 1e-6);
        let c2 = assumption_certificate_example4(2);
        assert!(!c2.passed());
        assert_eq!(c2.delta, 0.5);
        // tight at k = m
        let [_, mu, b] = Example4Coefficients.coeffs(20).unwrap();
        assert_eq!(b.mid() / mu.mid(), 441.0 / 1602.0);
    }

    #[test]
    fn trivial_solution_is_exact() {
        let p = QuadraticProblem::example4(0.0);
        let x = trivial_solution(20);
        assert!(p.f_proj(&x, 20).unwrap().iter().all(|&v| v == 0.0));
        let full = p.f_full_interval(&x).unwrap();
        assert_eq!(full.len(), 39);
        assert!(full.iter().all(|v| v.contains(0.0)));
    }

    #[test]
    fn zero_gives_minus_g() {
        let p = QuadraticProblem::example4(0.7);
        let f = p.f_proj(&[0.0; 8], 8).unwrap();
        assert_eq!(&f[..3], &[-0.5, -1.5, -0.25]);
        assert!(f[3..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_case_is_tridiagonal_product() {
        let p = QuadraticProblem::example4(0.0);
        let x = [0.1, -0.2, 0.3, 0.05, -0.01, 0.002];
        let j = p.jacobian(&x, 6).unwrap();
        let f = p.f_proj(&x, 6).unwrap();
        let xv = DVector::from_row_slice(&x);
        let lin = &j * xv;
        for k in 0..6 {
            assert!((lin[k] - p.g_at(k) - f[k]).abs() < 1e-14);
        }
        // σ = 0 Jacobian is exactly tridiagonal
        for r in 0usize..6 {
            for c in 0..6 {
                if r.abs_diff(c) > 1 {
                    assert_eq!(j[(r, c)], 0.0);
                }
            }
        }
        assert_eq!(j[(0, 0)], 1.0);
        assert_eq!(j[(0, 1)], 1.0);
        assert_eq!(j[(1, 0)], 0.0);
        assert_eq!(j[(2, 1)], 0.5);
    }

    #[test]
    fn jacobian_small_case_by_hand() {
        // m = 3, x = e1(½), σ = 1: entries 2σ(x̃_{k−j} + x̃_{k+j}), 2σx̃_k for j = 0
        let p = QuadraticProblem::example4(1.0);
        let j = p.jacobian(&[0.0, 0.5, 0.0], 3).unwrap();
        assert_eq!(j[(0, 0)], 1.0);
        assert_eq!(j[(0, 1)], 1.0 + 2.0 * (0.5 + 0.5));
        assert_eq!(j[(1, 0)], 2.0 * 0.5);
        assert_eq!(j[(1, 1)], 3.0);
        assert_eq!(j[(1, 2)], 2.0 + 2.0 * 0.5);
        assert_eq!(j[(2, 1)], 0.5 + 2.0 * 0.5);
    }

    #[test]
    fn newton_affine_one_step() {
        let p = QuadraticProblem::example4(0.0);
        let x = p.newton_solve(&[], 20, 1e-14, 1).unwrap();
        assert!((x[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn newton_small_sigma_converges_quadratically() {
        let p = QuadraticProblem::example4(0.05);
        let x0 = trivial_solution(20);
        let mut res = Vec::new();
        for it in 1..=4 {
            match p.newton_solve(&x0, 20, 1e-300, it) {
                Err(Error::Convergence { residual, .. }) => res.push(residual),
                Ok(_) => break,
                Err(e) => panic!("{e}"),
            }
        }
        assert!(res[1] <= 10.0 * res[0] * res[0] + 1e-15);
        let x = p.newton_solve(&x0, 20, 1e-14, 50).unwrap();
        let fi: Vec<Interval> = p
            .f_proj(
                &x.iter().map(|&v| Interval::point(v)).collect::<Vec<_>>(),
                20,
            )
            .unwrap();
        assert!(fi.iter().all(|v| v.mag() <= 1e-13));
    }

    #[test]
    fn newton_zero_tolerance_is_unattainable() {
        let p = QuadraticProblem::example4(0.05);
        assert!(matches!(
            p.newton_solve(&trivial_solution(20), 20, 0.0, 50),
            Err(Error::Convergence { .. })
        ));
    }

    #[test]
    fn expression_parser() {
        let e = Expr::parse("(k-1)^2/2").unwrap();
        assert_eq!(e.eval(5).unwrap(), Interval::point(8.0));
        let e = Expr::parse("1 + 2*k^2").unwrap();
        assert_eq!(e.eval(3).unwrap(), Interval::point(19.0));
        let e = Expr::parse("-k + 0.25 * 4").unwrap();
        assert_eq!(e.eval(3).unwrap(), Interval::point(-2.0));
        let e = Expr::parse("0.1*k").unwrap();
        let v = e.eval(10).unwrap();
        assert!(v.contains(1.0) && v.lo() < v.hi());
        assert!(Expr::parse("k +").is_err());
        assert!(Expr::parse("2 ** k").is_err());
        assert!(Expr::parse("x").is_err());
        assert!(Expr::parse("1/(k-3)").unwrap().eval(3).is_err());
    }

    #[test]
    fn decimal_exactness() {
        assert_eq!(decimal_enclosure("0.5").unwrap(), Interval::point(0.5));
        assert_eq!(decimal_enclosure("2.5e1").unwrap(), Interval::point(25.0));
        assert_eq!(decimal_enclosure("1.250").unwrap(), Interval::point(1.25));
        let t = decimal_enclosure("0.1").unwrap();
        assert!(t.lo() < t.hi());
    }

    #[test]
    fn custom_spec_matches_builtin() {
        let json = r#"{"type":"custom","lambda":"(k-1)^2/2","mu":"1+2*k^2","beta":"(k+1)^2/2",
            "mu0":1,"beta0":1,"sigma":0.3,"g":[0.5,1.5,0.25],"s_L":2,"C1":2,"C2":3,
            "delta":0.2752809,"k0":20,"tail_certified":true}"#;
        let spec: ProblemSpec = serde_json::from_str(json).unwrap();
        let p = QuadraticProblem::from_spec(&spec).unwrap();
        let q = QuadraticProblem::example4(0.3);
        for k in 0..50 {
            assert_eq!(p.triple(k).unwrap(), q.triple(k).unwrap());
        }
        let x = [0.01, 0.49, -0.02, 0.003];
        assert_eq!(p.f_proj(&x, 6).unwrap(), q.f_proj(&x, 6).unwrap());
        let back: ProblemSpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn builtin_spec_json() {
        let spec: ProblemSpec =
            serde_json::from_str(r#"{"type":"example4","sigma":0.25}"#).unwrap();
        assert_eq!(spec, ProblemSpec::Example4 { sigma: 0.25 });
        assert!(serde_json::from_str::<ProblemSpec>(r#"{"type":"nope"}"#).is_err());
    }
}

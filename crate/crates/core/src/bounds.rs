//! Componentwise `Y` and `Z` bounds for the Newton-like operator
//! `T(x) = x − A f(x)` at indices `0..=m+M`, with the `ω^s` decay rule beyond.
//!
//! `Z` is kept as two coefficient vectors: `Z_k(r) = (z1_k + d1_k) r + d2_k r²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::problem::QuadraticProblem;
use crate::pseudoinv::FiniteBlock;
use crate::seqspace::{weight_iv, AlphaBound, SeqVector};
use crate::tridiag::{tail_factors, verify_assumptions, AssumptionReport, MCheck, TailFactors};

/// Computational parameters of a proof.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProofParams {
    pub m: usize,
    #[serde(rename = "M")]
    pub big_m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub s: f64,
}

impl Default for ProofParams {
    fn default() -> Self {
        ProofParams {
            m: 20,
            big_m: 20,
            l: 100,
            s: 2.0,
        }
    }
}

impl ProofParams {
    pub fn validate(&self) -> Result<()> {
        if self.m < 6 {
            return Err(Error::Parameter(format!("need m >= 6, got {}", self.m)));
        }
        if !(self.s >= 2.0 && self.s.is_finite()) {
            return Err(Error::UnsupportedRegime(format!(
                "the convolution estimate needs s >= 2, got {}",
                self.s
            )));
        }
        if self.l == 0 {
            return Err(Error::Parameter("L must be at least 1".into()));
        }
        Ok(())
    }
}

/// Translates between absolute indices and the split `x = (x_F, x_I)`.
///
/// `F = 0..m`; tail offset `k` is absolute index `m + k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexMap {
    pub m: usize,
    pub big_m: usize,
}

impl IndexMap {
    /// Number of explicitly stored indices, `m + M + 1`.
    pub fn len(&self) -> usize {
        self.m + self.big_m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn absolute(&self, offset: usize) -> usize {
        self.m + offset
    }

    /// Tail offset of an absolute index, `None` inside `F`.
    pub fn offset(&self, k: usize) -> Option<usize> {
        k.checked_sub(self.m)
    }

    pub fn last(&self) -> usize {
        self.m + self.big_m
    }
}

/// `Y`, `Z¹/r`, `D¹`, `D²` at indices `0..=m+M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub m: usize,
    #[serde(rename = "M")]
    pub big_m: usize,
    pub s: f64,
    pub s_l: f64,
    pub y: Vec<Interval>,
    pub z1: Vec<Interval>,
    pub d1: Vec<Interval>,
    pub d2: Vec<Interval>,
}

impl BoundSet {
    pub fn index_map(&self) -> IndexMap {
        IndexMap {
            m: self.m,
            big_m: self.big_m,
        }
    }

    /// `ω^s_{m+M} / ω^s_k` for `k > m + M`, 1 otherwise.
    pub fn tail_factor(&self, k: usize) -> Interval {
        let last = self.index_map().last();
        if k <= last {
            Interval::ONE
        } else {
            weight_iv(last, self.s) / weight_iv(k, self.s)
        }
    }

    fn stored(&self, v: &[Interval], k: usize) -> Interval {
        let last = self.index_map().last();
        if k <= last {
            v[k]
        } else {
            v[last] * self.tail_factor(k)
        }
    }

    pub fn y_at(&self, k: usize) -> Interval {
        self.stored(&self.y, k)
    }

    pub fn z1_at(&self, k: usize) -> Interval {
        self.stored(&self.z1, k)
    }

    pub fn d1_at(&self, k: usize) -> Interval {
        self.stored(&self.d1, k)
    }

    pub fn d2_at(&self, k: usize) -> Interval {
        self.stored(&self.d2, k)
    }

    /// `Z_k(r)` for any `k`.
    pub fn z_at(&self, k: usize, r: f64) -> Interval {
        let (lin, quad) = self.z_coeffs(k);
        let r = Interval::point(r);
        lin * r + quad * r.sqr()
    }

    /// `(z1_k + d1_k, d2_k)`.
    pub fn z_coeffs(&self, k: usize) -> (Interval, Interval) {
        (self.z1_at(k) + self.d1_at(k), self.d2_at(k))
    }

    /// `sup_k Y_k ω^s_k` over the stored indices (the tail adds nothing).
    pub fn y_norm(&self) -> Interval {
        self.y
            .iter()
            .enumerate()
            .fold(Interval::ZERO, |acc, (k, &v)| {
                acc.max(v * weight_iv(k, self.s))
            })
    }
}

/// Coefficient table of `Z(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZPolynomial {
    pub linear: Vec<Interval>,
    pub quadratic: Vec<Interval>,
}

pub fn assemble_z(z1: &[Interval], d1: &[Interval], d2: &[Interval]) -> Result<ZPolynomial> {
    if z1.len() != d1.len() || d1.len() != d2.len() {
        return Err(Error::Parameter(
            "Z coefficient vectors differ in length".into(),
        ));
    }
    Ok(ZPolynomial {
        linear: z1.iter().zip(d1).map(|(&a, &b)| a + b).collect(),
        quadratic: d2.to_vec(),
    })
}

/// Enclosures of `f_k(x̄)` for `0 <= k <= 2m − 2`; later entries vanish.
pub fn f_residual(xbar: &[f64], problem: &QuadraticProblem) -> Result<Vec<Interval>> {
    problem.f_full_interval(xbar)
}

fn require_m(factors: &TailFactors, params: &ProofParams, need_a: bool) -> Result<MCheck> {
    let chk = factors.check_m(params.big_m, params.s)?;
    if !chk.ok_y {
        return Err(Error::Parameter(format!(
            "M = {} is below the decay threshold {:.4}",
            params.big_m, chk.required_y
        )));
    }
    if need_a && !chk.ok_a {
        return Err(Error::Parameter(format!(
            "M = {} is below the uniform-bound threshold {:.4}",
            params.big_m, chk.required_a
        )));
    }
    Ok(chk)
}

/// Row `i` of `|A_m|` as intervals.
fn abs_row(block: &FiniteBlock, i: usize) -> Vec<Interval> {
    (0..block.m).map(|j| block.a_abs(i, j)).collect()
}

/// `η|λ_m|/|μ_m|`, the weight of the coupling through `w_I`.
fn coupling(factors: &TailFactors) -> Result<Interval> {
    let m = factors.m;
    Ok((factors.eta * factors.lambda(m)?.abs()).try_div(factors.mu(m)?.abs())?)
}

/// The defect bound `Y`.
pub fn compute_y(
    fres: &[Interval],
    block: &FiniteBlock,
    factors: &TailFactors,
    params: &ProofParams,
) -> Result<Vec<Interval>> {
    require_m(factors, params, false)?;
    let m = params.m;
    if fres.len() != 2 * m - 1 || block.m != m || factors.m != m {
        return Err(Error::Parameter("inconsistent sizes in the Y bound".into()));
    }
    let eta = factors.eta;
    // q_l = |f_{m+l}| / |μ_{m+l}|, l = 0..m-2
    let q: Vec<Interval> = (0..m - 1)
        .map(|l| Ok(fres[m + l].abs().try_div(factors.mu(m + l)?.abs())?))
        .collect::<Result<_>>()?;
    let series: Interval = q
        .iter()
        .enumerate()
        .map(|(l, &ql)| factors.theta_pow(l) * ql)
        .sum();
    let beta = factors.beta(m - 1)?.abs();

    let a_f: Vec<Interval> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| Interval::point(block.a_m[(i, j)]) * fres[j])
                .sum()
        })
        .collect();
    let corr = beta * eta * series;

    let mut y = Vec::with_capacity(m + params.big_m + 1);
    for (i, v) in a_f.iter().enumerate() {
        y.push(v.abs() + corr * block.a_abs(i, m - 1));
    }
    let head = a_f[m - 1].abs() + corr * block.a_abs(m - 1, m - 1);
    let cpl = coupling(factors)?;
    for k in 0..=params.big_m {
        let mut local = Interval::ZERO;
        for (l, &ql) in q.iter().enumerate() {
            local += factors.theta_pow(k.abs_diff(l)) * ql;
        }
        y.push(head * cpl * factors.theta_pow(k) + eta * local);
    }
    Ok(y)
}

/// `Z¹(r)/r`.
pub fn compute_z1(
    block: &FiniteBlock,
    factors: &TailFactors,
    params: &ProofParams,
) -> Result<Vec<Interval>> {
    require_m(factors, params, false)?;
    let m = params.m;
    let s = params.s;
    let w: Vec<Interval> = (0..m)
        .map(|j| weight_iv(j, s).recip())
        .collect::<std::result::Result<_, _>>()?;
    // |β_{m−1}||λ_m| θ^{2L} / (|μ_m| ω_{m−1} (1 − θ²))
    let e = (factors.beta(m - 1)?.abs() * factors.lambda(m)?.abs() * factors.w_tilde_err)
        .try_div(weight_iv(m - 1, s))?;

    let mut z = Vec::with_capacity(m + params.big_m + 1);
    for i in 0..m {
        let res: Interval = block
            .residual
            .row(i)
            .iter()
            .zip(&w)
            .map(|(&a, &b)| a * b)
            .sum();
        z.push(res + e * block.a_abs(i, m - 1));
    }
    let head = z[m - 1];
    let cpl = coupling(factors)?;
    for k in 0..=params.big_m {
        z.push(head * cpl * factors.theta_pow(k));
    }
    Ok(z)
}

/// The vectors `C¹(x̄)` and `C²` on `F`, plus `‖C¹_I‖_s` and `‖C²_I‖_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CBounds {
    pub c1_f: Vec<Interval>,
    pub c2_f: Vec<Interval>,
    /// `2|σ| α^s_m(m) ‖x̄‖_s`.
    pub c1_tail_norm: Interval,
    /// `2|σ| α^s_m(m)`.
    pub c2_tail_norm: Interval,
}

impl CBounds {
    /// `C¹_k` at any absolute index.
    pub fn c1_at(&self, k: usize, s: f64) -> Result<Interval> {
        match self.c1_f.get(k) {
            Some(&v) => Ok(v),
            None => Ok(self.c1_tail_norm.try_div(weight_iv(k, s))?),
        }
    }

    pub fn c2_at(&self, k: usize, s: f64) -> Result<Interval> {
        match self.c2_f.get(k) {
            Some(&v) => Ok(v),
            None => Ok(self.c2_tail_norm.try_div(weight_iv(k, s))?),
        }
    }
}

pub fn compute_c(
    xbar: &[f64],
    sigma: f64,
    alpha: &AlphaBound,
    params: &ProofParams,
) -> Result<CBounds> {
    let m = params.m;
    let s = params.s;
    if xbar.len() > m {
        return Err(Error::Parameter("x̄ is longer than m".into()));
    }
    if alpha.n() != m || alpha.s() != s {
        return Err(Error::Parameter(
            "convolution estimate built for other (s, n)".into(),
        ));
    }
    let two_sigma = Interval::point(2.0) * Interval::point(sigma.abs());
    let x = |l: usize| Interval::point(xbar.get(l).copied().unwrap_or(0.0).abs());

    let mut c1_f = vec![Interval::ZERO; m];
    for (k, slot) in c1_f.iter_mut().enumerate().skip(1) {
        let mut acc = Interval::ZERO;
        for l in m - k..m {
            acc += x(l).try_div(weight_iv(k + l, s))?;
        }
        *slot = two_sigma * acc;
    }
    let c2_f = (0..m)
        .map(|k| Ok((two_sigma * alpha.get(k)).try_div(weight_iv(k, s))?))
        .collect::<Result<Vec<_>>>()?;
    let xv: SeqVector<Interval> =
        SeqVector::new(xbar.iter().map(|&v| Interval::point(v)).collect(), s);
    let c2_tail_norm = two_sigma * alpha.get(m);
    Ok(CBounds {
        c1_f,
        c2_f,
        c1_tail_norm: c2_tail_norm * xv.norm_s(),
        c2_tail_norm,
    })
}

/// `|A| C` for one of the `C` vectors, given `C_F` and `‖C_I‖_s`.
fn d_vector(
    c_f: &[Interval],
    norm: Interval,
    block: &FiniteBlock,
    factors: &TailFactors,
    params: &ProofParams,
) -> Result<Vec<Interval>> {
    let m = params.m;
    let p = params.s + factors.constants.s_l;
    let theta = factors.theta;
    // bound on |(U_I⁻¹ L_I⁻¹ C_I)_0|
    let at0 = (factors.eta * norm.abs()).try_div(
        Interval::point(factors.constants.c1) * (Interval::ONE - theta) * weight_iv(m, p),
    )?;
    let common = factors.beta(m - 1)?.abs() * at0;

    let mut d = Vec::with_capacity(m + params.big_m + 1);
    for i in 0..m {
        let row: Interval = abs_row(block, i)
            .iter()
            .zip(c_f)
            .map(|(&a, &c)| a * c)
            .sum();
        d.push(row + common * block.a_abs(i, m - 1));
    }
    let head = d[m - 1];
    let cpl = coupling(factors)?;
    for k in 0..=params.big_m {
        let uni = factors.bound_uniform(params.big_m, params.s, norm, k)?;
        d.push(head * cpl * factors.theta_pow(k) + uni);
    }
    Ok(d)
}

/// `(D¹, D²)`.
pub fn compute_d(
    c: &CBounds,
    block: &FiniteBlock,
    factors: &TailFactors,
    params: &ProofParams,
) -> Result<(Vec<Interval>, Vec<Interval>)> {
    require_m(factors, params, true)?;
    if c.c1_f.len() != params.m || c.c2_f.len() != params.m {
        return Err(Error::Parameter("C vectors must have length m".into()));
    }
    let d1 = d_vector(&c.c1_f, c.c1_tail_norm, block, factors, params)?;
    let d2 = d_vector(&c.c2_f, c.c2_tail_norm, block, factors, params)?;
    Ok((d1, d2))
}

/// Everything computed on the way to a [`BoundSet`].
#[derive(Debug, Clone)]
pub struct ProofData {
    pub params: ProofParams,
    pub sigma: f64,
    pub xbar: Vec<f64>,
    pub assumptions: AssumptionReport,
    pub m_check: MCheck,
    pub factors: TailFactors,
    pub block: FiniteBlock,
    pub alpha: AlphaBound,
    pub fres: Vec<Interval>,
    pub c: CBounds,
    pub bounds: BoundSet,
}

/// Runs assumptions, tail factorisation, finite block and all bounds.
///
/// `xbar` may be shorter than `m`; it is padded with zeros.
pub fn compute_bounds(
    problem: &QuadraticProblem,
    xbar: &[f64],
    params: &ProofParams,
) -> Result<ProofData> {
    params.validate()?;
    let m = params.m;
    if xbar.len() > m {
        return Err(Error::Parameter(format!(
            "x̄ has {} coefficients but m = {m}",
            xbar.len()
        )));
    }
    if xbar.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("x̄ has non-finite entries".into()));
    }
    let mut x = xbar.to_vec();
    x.resize(m, 0.0);

    let coeffs = problem.tridiag(m)?;
    let assumptions = verify_assumptions(&coeffs, m, m + params.big_m.max(params.l))?;
    let factors = tail_factors(&coeffs, m, params.l)?;
    let m_check = require_m(&factors, params, true)?;
    let alpha = AlphaBound::new(params.s, m, params.l)?;

    let d = problem.jacobian_interval(&x, m)?;
    let block = FiniteBlock::new(d, factors.beta(m - 1)?, factors.lambda(m)?, factors.w_tilde)?;

    let fres = f_residual(&x, problem)?;
    let y = compute_y(&fres, &block, &factors, params)?;
    let z1 = compute_z1(&block, &factors, params)?;
    let c = compute_c(&x, problem.sigma, &alpha, params)?;
    let (d1, d2) = compute_d(&c, &block, &factors, params)?;

    let bounds = BoundSet {
        m,
        big_m: params.big_m,
        s: params.s,
        s_l: factors.constants.s_l,
        y,
        z1,
        d1,
        d2,
    };
    Ok(ProofData {
        params: *params,
        sigma: problem.sigma,
        xbar: x,
        assumptions,
        m_check,
        factors,
        block,
        alpha,
        fres,
        c,
        bounds,
    })
}

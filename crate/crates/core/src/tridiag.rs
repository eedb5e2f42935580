//! Tail machinery for the infinite tridiagonal block: assumption checks, the
//! LU factorisation in ratio form, the approximation `w̃` and the bounds on
//! `U_I⁻¹ L_I⁻¹` derived from the geometric decay rate `θ`.
//!
//! Tail indices are offsets: position `k` of a tail vector is absolute
//! index `m + k`. The LU pivots use the 1-based names `a_n, b_n, c_n` for
//! `λ, μ, β` at absolute index `m + n - 1`.

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::seqspace::weight_iv;

/// Supplies `(λ_k, μ_k, β_k)` as enclosures. `λ_0` is never read.
pub trait CoefficientGenerator: Send + Sync + Debug {
    fn coeffs(&self, k: usize) -> Result<[Interval; 3]>;
}

/// Growth and ratio constants claimed by a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    pub s_l: f64,
    pub c1: f64,
    pub c2: f64,
    pub delta: f64,
    pub k0: usize,
}

#[derive(Debug, Clone)]
pub struct TridiagCoeffs {
    generator: Arc<dyn CoefficientGenerator>,
    pub constants: TailConstants,
    /// Set when the problem proves the assumptions analytically for all large k.
    pub tail_certified: bool,
}

impl TridiagCoeffs {
    pub fn new(
        generator: Arc<dyn CoefficientGenerator>,
        constants: TailConstants,
        tail_certified: bool,
    ) -> Self {
        TridiagCoeffs {
            generator,
            constants,
            tail_certified,
        }
    }

    pub fn triple(&self, k: usize) -> Result<[Interval; 3]> {
        let mut t = self.generator.coeffs(k)?;
        if k == 0 {
            t[0] = Interval::ZERO;
        }
        Ok(t)
    }

    pub fn lambda(&self, k: usize) -> Result<Interval> {
        Ok(self.triple(k)?[0])
    }

    pub fn mu(&self, k: usize) -> Result<Interval> {
        Ok(self.triple(k)?[1])
    }

    pub fn beta(&self, k: usize) -> Result<Interval> {
        Ok(self.triple(k)?[2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub inequality: &'static str,
    pub first_k: usize,
    pub last_k: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
    /// Indices above this are covered by the problem's analytic certificate.
    pub checked_up_to: usize,
    pub analytic_tail: bool,
}

const GROWTH: &str = "|lambda_k|, |mu_k|, |beta_k| <= C2 omega_k^{s_L}";
const LOWER: &str = "C1 omega_k^{s_L} <= |mu_k|";
const RATIO: &str = "|lambda_k|, |beta_k| <= delta |mu_k|";

fn check_constants(c: &TailConstants) -> Result<()> {
    if !(c.delta > 0.0 && c.delta < 0.5) {
        return Err(Error::Parameter(format!(
            "delta must lie in (0, 1/2), got {}",
            c.delta
        )));
    }
    if !(c.c1 > 0.0 && c.c1 <= c.c2 && c.c2.is_finite()) {
        return Err(Error::Parameter(format!(
            "need 0 < C1 <= C2, got C1 = {}, C2 = {}",
            c.c1, c.c2
        )));
    }
    if !(c.s_l > 0.0 && c.s_l.is_finite()) {
        return Err(Error::Parameter(format!(
            "s_L must be positive, got {}",
            c.s_l
        )));
    }
    Ok(())
}

/// Checks the growth and ratio assumptions rigorously for `k <= k_check`.
///
/// Larger indices are accepted only if the problem carries an analytic
/// certificate.
pub fn verify_assumptions(
    coeffs: &TridiagCoeffs,
    m: usize,
    k_check: usize,
) -> Result<AssumptionReport> {
    let c = coeffs.constants;
    check_constants(&c)?;
    if m < 6 || m < c.k0 {
        return Err(Error::Parameter(format!(
            "need m >= max(6, k0) = {}, got m = {m}",
            c.k0.max(6)
        )));
    }
    let k_check = k_check.max(m);
    let c1 = Interval::point(c.c1);
    let c2 = Interval::point(c.c2);
    let delta = Interval::point(c.delta);
    let fail = |k, inequality: &str| Error::Assumption {
        k,
        inequality: inequality.to_string(),
    };

    for k in 0..=k_check {
        let [l, mu, b] = coeffs.triple(k)?;
        let cap = (c2 * weight_iv(k, c.s_l)).lo();
        if l.mag() > cap || mu.mag() > cap || b.mag() > cap {
            return Err(fail(k, GROWTH));
        }
        if k >= c.k0 {
            if (c1 * weight_iv(k, c.s_l)).hi() > mu.mig() {
                return Err(fail(k, LOWER));
            }
            let ratio_cap = (delta * Interval::point(mu.mig())).lo();
            if l.mag() > ratio_cap || b.mag() > ratio_cap {
                return Err(fail(k, RATIO));
            }
        }
    }
    if !coeffs.tail_certified {
        return Err(fail(
            k_check + 1,
            "no analytic certificate covers indices beyond the checked range",
        ));
    }
    let checks = vec![
        AssumptionCheck {
            inequality: GROWTH,
            first_k: 0,
            last_k: k_check,
            passed: true,
        },
        AssumptionCheck {
            inequality: LOWER,
            first_k: c.k0,
            last_k: k_check,
            passed: true,
        },
        AssumptionCheck {
            inequality: RATIO,
            first_k: c.k0,
            last_k: k_check,
            passed: true,
        },
    ];
    Ok(AssumptionReport {
        checks,
        checked_up_to: k_check,
        analytic_tail: true,
    })
}

/// Outcome of the two lower bounds on `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCheck {
    pub ok_a: bool,
    pub ok_y: bool,
    /// Upper endpoints of the right-hand sides.
    pub required_a: f64,
    pub required_y: f64,
}

/// Constants and LU pivots of the tail operator starting at index `m`.
#[derive(Debug, Clone)]
pub struct TailFactors {
    pub m: usize,
    pub l: usize,
    pub constants: TailConstants,
    pub gamma: Interval,
    pub theta: Interval,
    pub eta: Interval,
    /// `rho[n - 1] = ρ_n = δ_n / δ_{n-1}` for `1 <= n <= L`.
    pub rho: Vec<Interval>,
    pub w_tilde: Interval,
    pub w_tilde_err: Interval,
    coeffs: TridiagCoeffs,
    /// `(λ, μ, β)` at absolute indices `m ..= m + L`.
    cache: Vec<[Interval; 3]>,
}

/// `γ = ½ + √(¼ − δ²)`, `θ = δ/γ`, `η = 1/(γ(1 − θ²))`.
pub fn theta_gamma_eta(delta: f64) -> Result<(Interval, Interval, Interval)> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Interval(crate::interval::IntervalError::Domain(
            "delta must lie in (0, 1/2)",
        )));
    }
    let d = Interval::point(delta);
    let quarter = Interval::point(0.25);
    let gamma = Interval::point(0.5) + (quarter - d.sqr()).sqrt()?;
    let theta = d.try_div(gamma)?;
    let eta = (gamma * (Interval::ONE - theta.sqr())).recip()?;
    Ok((gamma, theta, eta))
}

/// `θ^{2L} / (|μ_m| (1 − θ²))`.
pub fn w_tilde_error(theta: Interval, l: usize, mu_m: Interval) -> Result<Interval> {
    let num = theta.powi(2 * l as i32)?;
    Ok(num.try_div(mu_m.abs() * (Interval::ONE - theta.sqr()))?)
}

/// Computes `γ, θ, η`, the pivots `ρ_1..ρ_L` and `w̃` with its error bound.
pub fn tail_factors(coeffs: &TridiagCoeffs, m: usize, l: usize) -> Result<TailFactors> {
    let c = coeffs.constants;
    if l == 0 {
        return Err(Error::Parameter("L must be at least 1".into()));
    }
    if m < 6 || m < c.k0 {
        return Err(Error::Parameter(format!(
            "need m >= max(6, k0) = {}, got m = {m}",
            c.k0.max(6)
        )));
    }
    // the error bound on w̃ needs the ratio assumption from pivot L onward
    if l < c.k0 {
        return Err(Error::Parameter(format!(
            "need L >= k0 = {}, got L = {l}",
            c.k0
        )));
    }
    let (gamma, theta, eta) = theta_gamma_eta(c.delta)?;

    let cache: Vec<[Interval; 3]> = (m..=m + l)
        .map(|k| coeffs.triple(k))
        .collect::<Result<_>>()?;
    // a_n, b_n, c_n live at cache[n - 1]
    let a = |n: usize| cache[n - 1][0];
    let b = |n: usize| cache[n - 1][1];
    let cc = |n: usize| cache[n - 1][2];

    let mut rho = Vec::with_capacity(l);
    rho.push(b(1));
    for n in 2..=l {
        let prev = rho[n - 2];
        if prev.contains_zero() {
            return Err(Error::DegenerateLu { n: n - 1 });
        }
        rho.push(b(n) - a(n) * cc(n - 1) / prev);
    }
    if rho[l - 1].contains_zero() {
        return Err(Error::DegenerateLu { n: l });
    }

    // w̃ = Σ_{l<L} t_l, t_0 = 1/ρ_1, t_l = t_{l-1} c_l a_{l+1} / (ρ_l ρ_{l+1})
    let mut term = rho[0].recip()?;
    let mut w_tilde = term;
    for j in 1..l {
        term = term * cc(j) * a(j + 1) / (rho[j - 1] * rho[j]);
        w_tilde += term;
    }

    let w_tilde_err = w_tilde_error(theta, l, b(1))?;
    Ok(TailFactors {
        m,
        l,
        constants: c,
        gamma,
        theta,
        eta,
        rho,
        w_tilde,
        w_tilde_err,
        coeffs: coeffs.clone(),
        cache,
    })
}

impl TailFactors {
    pub fn coeffs(&self) -> &TridiagCoeffs {
        &self.coeffs
    }

    fn triple(&self, k: usize) -> Result<[Interval; 3]> {
        if k >= self.m && k - self.m < self.cache.len() {
            Ok(self.cache[k - self.m])
        } else {
            self.coeffs.triple(k)
        }
    }

    pub fn lambda(&self, k: usize) -> Result<Interval> {
        Ok(self.triple(k)?[0])
    }

    pub fn mu(&self, k: usize) -> Result<Interval> {
        Ok(self.triple(k)?[1])
    }

    pub fn beta(&self, k: usize) -> Result<Interval> {
        Ok(self.triple(k)?[2])
    }

    /// `u_n = |ρ_n| / |b_n|` for `1 <= n <= L`.
    pub fn u(&self, n: usize) -> Interval {
        self.rho[n - 1].abs() / self.cache[n - 1][1].abs()
    }

    /// `θ^n`.
    pub fn theta_pow(&self, n: usize) -> Interval {
        self.theta.powi(n as i32).expect("theta > 0")
    }

    /// Both lower bounds on `M`, evaluated with interval logarithms.
    pub fn check_m(&self, big_m: usize, s: f64) -> Result<MCheck> {
        let m = Interval::from_int(self.m as i64);
        let ln_theta = self.theta.ln()?;
        let ln_sqrt = ln_theta * Interval::point(0.5);
        let q = Interval::point(s + self.constants.s_l + 1.0);
        let lin = m * ln_sqrt + q;
        let disc = lin.sqr() - Interval::point(4.0) * m * ln_sqrt;
        let root = (-(m * ln_sqrt) - q - disc.sqrt()?).try_div(Interval::point(2.0) * ln_sqrt)?;
        let flat = Interval::point(4.0).try_div(ln_theta.sqr())?;
        let required_a = root.hi().max(flat.hi()).max(self.m as f64);
        let y_term = -Interval::point(s).try_div(ln_theta)? - m;
        let required_y = y_term.hi().max(self.m as f64 - 2.0);
        let mv = big_m as f64;
        Ok(MCheck {
            ok_a: mv >= required_a,
            ok_y: mv >= required_y,
            required_a,
            required_y,
        })
    }

    fn require_ok_a(&self, big_m: usize, s: f64) -> Result<()> {
        let chk = self.check_m(big_m, s)?;
        if !chk.ok_a {
            return Err(Error::Parameter(format!(
                "M = {big_m} is below the uniform-bound threshold {:.4}",
                chk.required_a
            )));
        }
        Ok(())
    }

    /// Uniform tail constant `χ(θ, m, M, s, s_L)`.
    pub fn chi(&self, big_m: usize, s: f64) -> Result<Interval> {
        self.require_ok_a(big_m, s)?;
        chi_raw(self.theta, self.m, big_m, s, self.constants.s_l)
    }

    /// Bound on `|x_{m+k}|` for `x_I = U_I⁻¹L_I⁻¹ y_I`.
    ///
    /// `y[j]` bounds `|y_{m+j}|`. When `tail` is given it must bound
    /// `|y_{m+j}| / |μ_{m+j}|` for every `j >= y.len()`; otherwise `y` is
    /// zero beyond its support.
    pub fn bound_x_from_y(
        &self,
        y: &[Interval],
        k: usize,
        tail: Option<Interval>,
    ) -> Result<Interval> {
        let mut acc = Interval::ZERO;
        for (j, &yj) in y.iter().enumerate() {
            let q = yj.abs().try_div(self.mu(self.m + j)?.abs())?;
            if q == Interval::ZERO {
                continue;
            }
            acc += self.theta_pow(k.abs_diff(j)) * q;
        }
        if let Some(t) = tail {
            let n = y.len();
            let one_minus = Interval::ONE - self.theta;
            let geo = if k < n {
                // Σ_{j>=n} θ^{j-k}
                self.theta_pow(n - k).try_div(one_minus)?
            } else {
                // Σ_{n<=j<=k} θ^{k-j} + Σ_{j>k} θ^{j-k}
                (Interval::ONE + self.theta).try_div(one_minus)?
            };
            acc += t.abs() * geo;
        }
        Ok(self.eta * acc)
    }

    /// Bound on `|x_{m+k}|` given only `‖y_I‖_s <= norm`.
    pub fn bound_uniform(
        &self,
        big_m: usize,
        s: f64,
        norm: Interval,
        k: usize,
    ) -> Result<Interval> {
        self.require_ok_a(big_m, s)?;
        let p = s + self.constants.s_l;
        let one_minus = Interval::ONE - self.theta;
        let geo = self.theta.try_div(one_minus)?;
        let inner = if k < big_m {
            let mut sum = Interval::ZERO;
            for l in 0..=k {
                let r = Interval::ratio((self.m + k) as i64, (self.m + l) as i64)?.powf(p)?;
                sum += self.theta_pow(k - l) * r;
            }
            sum
        } else {
            chi_raw(self.theta, self.m, big_m, s, self.constants.s_l)?
        };
        let scale = (self.eta * norm.abs()).try_div(Interval::point(self.constants.c1))?;
        let denom = Interval::from_int((self.m + k) as i64).powf(p)?;
        Ok((scale * (inner + geo)).try_div(denom)?)
    }
}

fn chi_raw(theta: Interval, m: usize, big_m: usize, s: f64, s_l: f64) -> Result<Interval> {
    if m < 2 {
        return Err(Error::Parameter("chi needs m >= 2".into()));
    }
    let p = s + s_l;
    let mi = Interval::from_int(m as i64);
    let mm = Interval::from_int((m + big_m) as i64);
    let half_m = Interval::from_int(big_m as i64) * Interval::point(0.5);
    let sqrt_m = Interval::from_int(big_m as i64).sqrt()?;
    let t1 = theta.pow(half_m)? * half_m * mm.try_div(mi)?.powf(p)?;
    let t2 = theta.pow(sqrt_m)? * half_m * Interval::point(2.0).powf(p)?;
    let gap = mm - sqrt_m - Interval::ONE;
    let t3 = (Interval::ONE - theta).recip()? * mm.try_div(gap)?.powf(p)?;
    Ok(t1 + t2 + t3)
}

/// `φ₁(x) = θ^{x/2} x (m+x)^{s+s_L}`.
pub fn phi1(theta: Interval, m: usize, p: f64, x: f64) -> Result<Interval> {
    let xi = Interval::point(x);
    Ok(theta.pow(xi * Interval::point(0.5))? * xi * (Interval::from_int(m as i64) + xi).powf(p)?)
}

/// `φ₂(x) = θ^{√x} x`.
pub fn phi2(theta: Interval, x: f64) -> Result<Interval> {
    let xi = Interval::point(x);
    Ok(theta.pow(xi.sqrt()?)? * xi)
}

/// `φ₃(x) = (m+x)/(m+x−√x−1)`.
pub fn phi3(m: usize, x: f64) -> Result<Interval> {
    let xi = Interval::point(x);
    let mx = Interval::from_int(m as i64) + xi;
    Ok(mx.try_div(mx - xi.sqrt()? - Interval::ONE)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(m: usize) -> TridiagCoeffs {
        crate::problem::example4_tridiag(m).unwrap()
    }

    #[test]
    fn constants_at_delta_quarter() {
        let (g, t, e) = theta_gamma_eta(0.25).unwrap();
        let r3 = 3f64.sqrt();
        assert!((g.mid() - (0.5 + r3 / 4.0)).abs() < 1e-15);
        assert!((t.mid() - (2.0 - r3)).abs() < 1e-15);
        assert!((e.mid() - 2.0 / r3).abs() < 1e-15);
        assert!(g.width() < 1e-15 && t.width() < 1e-15 && e.width() < 1e-15);
    }

    #[test]
    fn constants_small_delta_limit() {
        let (g, t, e) = theta_gamma_eta(1e-8).unwrap();
        assert!((g.mid() - 1.0).abs() < 1e-6);
        assert!(t.mid().abs() < 1e-6);
        assert!((e.mid() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn delta_out_of_range() {
        assert!(theta_gamma_eta(0.6).is_err());
        let mut c = example(20);
        c.constants.delta = 0.6;
        assert!(matches!(
            verify_assumptions(&c, 20, 100),
            Err(Error::Parameter(_))
        ));
        assert!(tail_factors(&c, 20, 100).is_err());
    }

    #[test]
    fn example4_assumptions_pass() {
        let rep = verify_assumptions(&example(20), 20, 500).unwrap();
        assert!(rep.analytic_tail);
        assert!(rep.checks.iter().all(|c| c.passed));
    }

    #[test]
    fn large_c1_fails_at_m() {
        let mut c = example(20);
        c.constants.c1 = 10.0;
        c.constants.c2 = 10.0;
        match verify_assumptions(&c, 20, 100) {
            Err(Error::Assumption { k, inequality }) => {
                assert_eq!(k, 20);
                assert_eq!(inequality, LOWER);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn first_pivots() {
        let tf = tail_factors(&example(20), 20, 100).unwrap();
        assert!(tf.rho[0].contains(801.0));
        let expected = 883.0 - 200.0 * 220.5 / 801.0;
        assert!((tf.rho[1].mid() - expected).abs() < 1e-10);
        assert!(tf.rho[1].width() < 1e-10);
    }

    #[test]
    fn u_bracket() {
        let tf = tail_factors(&example(20), 20, 100).unwrap();
        for n in 1..=100 {
            let u = tf.u(n);
            assert!(
                u.lo() >= tf.gamma.lo() - 1e-15 && u.hi() <= 1.0 + 1e-15,
                "n={n}: {u:?}"
            );
        }
    }

    #[test]
    fn theta_at_m20() {
        let tf = tail_factors(&example(20), 20, 100).unwrap();
        assert!((tf.constants.delta - 441.0 / 1602.0).abs() < 1e-16);
        assert!((tf.gamma.mid() - 0.917_398).abs() < 1e-6);
        assert!((tf.theta.mid() - 0.300_07).abs() < 1e-5);
    }

    #[test]
    fn w_tilde_error_examples() {
        let th = Interval::point(0.3);
        let e = w_tilde_error(th, 100, Interval::point(801.0)).unwrap();
        let expected = 0.3f64.powi(200) / (801.0 * 0.91);
        assert!((e.mid() / expected - 1.0).abs() < 1e-12);
        let e2 = w_tilde_error(th, 200, Interval::point(801.0)).unwrap();
        let ratio = e2.mid() / (e.mid() * 0.3f64.powi(200));
        assert!((ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w_tilde_converges() {
        let c = example(20);
        let a = tail_factors(&c, 20, 20).unwrap();
        let b = tail_factors(&c, 20, 40).unwrap();
        let diff = (a.w_tilde - b.w_tilde).mag();
        assert!(
            diff <= a.w_tilde_err.hi() + 1e-17,
            "{diff} vs {:?}",
            a.w_tilde_err
        );
    }

    #[test]
    fn m_conditions() {
        let tf = tail_factors(&example(20), 20, 100).unwrap();
        let ok = tf.check_m(20, 2.0).unwrap();
        assert!(ok.ok_a && ok.ok_y);
        assert!((ok.required_y - 18.0).abs() < 1e-12);
        let bad = tf.check_m(1, 2.0).unwrap();
        assert!(!bad.ok_y && !bad.ok_a);
        assert!(tf.chi(1, 2.0).is_err());
        assert!(tf.bound_uniform(1, 2.0, Interval::ONE, 0).is_err());
    }

    #[test]
    fn chi_first_term_and_monotone() {
        let tf = tail_factors(&example(20), 20, 100).unwrap();
        let t1 = 0.3f64.powi(10) * 10.0 * 16.0;
        assert!((t1 - 9.4e-4).abs() < 1e-5);
        let c20 = tf.chi(20, 2.0).unwrap();
        let c30 = tf.chi(30, 2.0).unwrap();
        assert!(c30.hi() < c20.lo());
        let c0 = chi_raw(Interval::point(1e-300), 20, 20, 2.0, 2.0).unwrap();
        let surv = (40.0 / (40.0 - 20f64.sqrt() - 1.0)).powi(4);
        assert!((c0.mid() - surv).abs() < 1e-12);
    }

    #[test]
    fn unit_vector_matches_w_bound() {
        let tf = tail_factors(&example(20), 20, 100).unwrap();
        for k in 0..30 {
            let b = tf.bound_x_from_y(&[Interval::ONE], k, None).unwrap();
            let expect = tf.eta * tf.theta_pow(k) / Interval::point(801.0);
            assert!((b.mid() - expect.mid()).abs() <= 1e-15 * expect.mid());
        }
    }

    #[test]
    fn bound_scales_linearly() {
        let tf = tail_factors(&example(20), 20, 100).unwrap();
        let y = [
            Interval::point(0.3),
            Interval::point(-1.0),
            Interval::point(2.0),
        ];
        let y3: Vec<_> = y.iter().map(|&v| v * Interval::point(3.0)).collect();
        for k in 0..6 {
            let a = tf.bound_x_from_y(&y, k, None).unwrap();
            let b = tf.bound_x_from_y(&y3, k, None).unwrap();
            assert!((b.mid() - 3.0 * a.mid()).abs() <= 1e-14 * b.mid());
        }
    }

    #[test]
    fn uniform_bound_k0_closed_form() {
        let tf = tail_factors(&example(20), 20, 100).unwrap();
        let b = tf.bound_uniform(20, 2.0, Interval::ONE, 0).unwrap();
        let th = tf.theta.mid();
        let expect = tf.eta.mid() / 2.0 * (1.0 + th / (1.0 - th)) / 20f64.powi(4);
        assert!((b.mid() / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phi_functions_are_monotone() {
        let tf = tail_factors(&example(20), 20, 100).unwrap();
        let big_m = 20.0;
        let mut prev = (
            phi1(tf.theta, 20, 4.0, big_m).unwrap(),
            phi2(tf.theta, big_m).unwrap(),
            phi3(20, big_m).unwrap(),
        );
        let mut x = big_m;
        while x < 10.0 * big_m {
            x += 1.5;
            let next = (
                phi1(tf.theta, 20, 4.0, x).unwrap(),
                phi2(tf.theta, x).unwrap(),
                phi3(20, x).unwrap(),
            );
            assert!(next.0.lo() <= prev.0.hi());
            assert!(next.1.lo() <= prev.1.hi());
            assert!(next.2.lo() <= prev.2.hi());
            prev = next;
        }
    }
}

//! Radii polynomials, the feasibility set `I`, rigorous verification at a
//! chosen radius, and proof certificates.

use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{compute_bounds, BoundSet, ProofData, ProofParams};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::problem::{ProblemSpec, QuadraticProblem};
use crate::seqspace::weight_iv;

pub const SCHEMA_VERSION: u32 = 1;

/// The radius the classical run verifies at; preferred whenever it lies in `I`.
pub const PREFERRED_RADIUS: f64 = 1e-10;

/// Upper clip for feasibility sets that are unbounded above.
pub const DEFAULT_R_MAX: f64 = 1.0;

/// `P_k(r) = c0 + c1 r + c2 r²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiiPolynomial {
    pub k: usize,
    pub c0: Interval,
    pub c1: Interval,
    pub c2: Interval,
}

impl RadiiPolynomial {
    pub fn eval(&self, r: f64) -> Interval {
        let r = Interval::point(r);
        self.c0 + r * (self.c1 + self.c2 * r)
    }

    /// `{r > 0 : P_k(r) < 0}` from the coefficient midpoints, as `(lo, hi)`.
    pub fn negativity_set(&self) -> Option<(f64, f64)> {
        let (c, b, a) = (self.c0.mid(), self.c1.mid(), self.c2.mid());
        if b >= 0.0 && a >= 0.0 {
            return if c < 0.0 && b == 0.0 && a == 0.0 {
                Some((0.0, f64::INFINITY))
            } else {
                None
            };
        }
        if a == 0.0 {
            // b < 0
            return Some(((c / -b).max(0.0), f64::INFINITY));
        }
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 || b >= 0.0 {
            return None;
        }
        // stable roots: q has the sign of −b > 0
        let q = 0.5 * (-b + disc.sqrt());
        let (r1, r2) = (c / q, q / a);
        Some((r1.min(r2).max(0.0), r1.max(r2)))
    }
}

pub fn build_polynomials(bounds: &BoundSet) -> Vec<RadiiPolynomial> {
    (0..bounds.y.len())
        .map(|k| {
            let (lin, quad) = bounds.z_coeffs(k);
            let inv_w = weight_iv(k, bounds.s)
                .recip()
                .expect("weights are positive");
            RadiiPolynomial {
                k,
                c0: bounds.y[k],
                c1: lin - inv_w,
                c2: quad,
            }
        })
        .collect()
}

/// Numerically computed `I = ∩ I_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleSet {
    pub interval: Option<(f64, f64)>,
    /// Index whose constraint empties (or most tightly bounds from below) the set.
    pub blocking: usize,
}

pub fn find_i(polys: &[RadiiPolynomial], r_max: f64) -> FeasibleSet {
    let mut lo = 0.0f64;
    let mut hi = r_max;
    let mut lo_idx = 0;
    let mut hi_idx = 0;
    for p in polys {
        match p.negativity_set() {
            None => {
                return FeasibleSet {
                    interval: None,
                    blocking: p.k,
                }
            }
            Some((a, b)) => {
                if a > lo {
                    lo = a;
                    lo_idx = p.k;
                }
                if b < hi {
                    hi = b;
                    hi_idx = p.k;
                }
            }
        }
    }
    if lo < hi {
        FeasibleSet {
            interval: Some((lo, hi)),
            blocking: lo_idx,
        }
    } else {
        FeasibleSet {
            interval: None,
            blocking: if lo > 0.0 { lo_idx } else { hi_idx },
        }
    }
}

/// Per-index verdict `P_k(r).hi < 0`.
pub fn verify(polys: &[RadiiPolynomial], r: f64) -> Vec<bool> {
    polys
        .iter()
        .map(|p| r > 0.0 && p.eval(r).hi() < 0.0)
        .collect()
}

/// Default radius choice inside `I = [lo, hi]`.
///
/// Prefers [`PREFERRED_RADIUS`] when it sits well inside `I`; otherwise the
/// largest power of ten not above the geometric midpoint.
pub fn select_radius(lo: f64, hi: f64) -> f64 {
    if 1.1 * lo < PREFERRED_RADIUS && PREFERRED_RADIUS < 0.9 * hi {
        return PREFERRED_RADIUS;
    }
    let mid = if lo > 0.0 {
        (lo * hi).sqrt()
    } else {
        hi * 1e-3
    };
    let p = 10f64.powf(mid.log10().floor());
    if p > lo {
        p
    } else {
        mid
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateParams {
    pub m: usize,
    #[serde(rename = "M")]
    pub big_m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub s: f64,
    #[serde(rename = "s_L")]
    pub s_l: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofCertificate {
    pub params: CertificateParams,
    pub sigma: f64,
    pub xbar: Vec<f64>,
    #[serde(rename = "I")]
    pub feasible: Option<[f64; 2]>,
    pub r: f64,
    pub verdicts: Vec<bool>,
    pub proved: bool,
    pub schema_version: u32,
    pub problem: ProblemSpec,
    /// Index with the largest `P_k(r)·ω_k`.
    pub worst_index: usize,
    /// Upper endpoint of `P_k(r)·ω_k` at the worst index.
    pub worst_margin: f64,
    pub timestamp: Option<String>,
    pub toolchain: String,
}

/// Options for [`prove`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProveOptions {
    /// Verify at this radius instead of choosing one from `I`.
    pub r: Option<f64>,
    pub r_max: f64,
    pub timestamp: bool,
}

impl Default for ProveOptions {
    fn default() -> Self {
        ProveOptions {
            r: None,
            r_max: DEFAULT_R_MAX,
            timestamp: true,
        }
    }
}

pub fn toolchain() -> String {
    format!(
        "tricontract {} ({}-{}, binary64)",
        env!("CARGO_PKG_VERSION"),
        std::env::consts::ARCH,
        std::env::consts::OS
    )
}

fn now() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

/// `(index, hi(P_k(r) ω_k))` sorted worst first.
pub fn rank_indices(polys: &[RadiiPolynomial], s: f64, r: f64) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = polys
        .iter()
        .map(|p| (p.k, (p.eval(r) * weight_iv(p.k, s)).hi()))
        .collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v
}

fn suggestion(p: &RadiiPolynomial, m: usize, big_m: usize) -> String {
    let lin = -p.c1.mid();
    if lin <= 0.0 {
        return format!(
            "the linear part does not contract at index {}; try larger m and M (e.g. m = {}, M = {})",
            p.k,
            m + m / 2,
            big_m + big_m / 2
        );
    }
    // radius where the constant and quadratic terms balance
    let r = (p.c0.mid() / p.c2.mid().max(f64::MIN_POSITIVE)).sqrt();
    if p.c0.mid() / lin > 0.5 * r {
        format!(
            "Y dominates at index {}: improve x̄ (tighter Newton tolerance) or increase m to {}",
            p.k,
            m + m / 2
        )
    } else {
        format!(
            "the quadratic term dominates at index {}: decrease r or increase m and M",
            p.k
        )
    }
}

fn certify(
    data: &ProofData,
    problem: &QuadraticProblem,
    opts: &ProveOptions,
) -> Result<ProofCertificate> {
    let polys = build_polynomials(&data.bounds);
    let fs = find_i(&polys, opts.r_max);
    let r = match (opts.r, fs.interval) {
        (Some(r), _) => r,
        (None, Some((lo, hi))) => select_radius(lo, hi),
        (None, None) => {
            let p = &polys[fs.blocking];
            return Err(Error::EmptyFeasibleSet {
                worst_index: fs.blocking,
                suggestion: suggestion(p, data.params.m, data.params.big_m),
            });
        }
    };
    let verdicts = verify(&polys, r);
    let proved = verdicts.iter().all(|&v| v);
    let ranked = rank_indices(&polys, data.params.s, r);
    let params = data.params;
    Ok(ProofCertificate {
        params: CertificateParams {
            m: params.m,
            big_m: params.big_m,
            l: params.l,
            s: params.s,
            s_l: data.bounds.s_l,
            sigma: data.sigma,
        },
        sigma: data.sigma,
        xbar: data.xbar.clone(),
        feasible: fs.interval.map(|(a, b)| [a, b]),
        r,
        verdicts,
        proved,
        schema_version: SCHEMA_VERSION,
        problem: problem.spec().clone(),
        worst_index: ranked[0].0,
        worst_margin: ranked[0].1,
        timestamp: opts.timestamp.then(now),
        toolchain: toolchain(),
    })
}

/// Full pipeline at `x̄`. A certificate with `proved = false` is returned
/// only when verification at the selected radius fails; an empty `I` with
/// no radius override is an error.
pub fn prove(
    problem: &QuadraticProblem,
    xbar: &[f64],
    params: &ProofParams,
    opts: &ProveOptions,
) -> Result<ProofCertificate> {
    if let Some(r) = opts.r {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Parameter(format!(
                "radius must be positive, got {r}"
            )));
        }
    }
    let data = compute_bounds(problem, xbar, params)?;
    certify(&data, problem, opts)
}

/// Like [`prove`], also returning the intermediate data.
pub fn prove_with_data(
    problem: &QuadraticProblem,
    xbar: &[f64],
    params: &ProofParams,
    opts: &ProveOptions,
) -> Result<(ProofCertificate, ProofData)> {
    let data = compute_bounds(problem, xbar, params)?;
    let cert = certify(&data, problem, opts)?;
    Ok((cert, data))
}

/// Worker count from `TRICONTRACT_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("TRICONTRACT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Proves many `(σ, x̄)` points concurrently; results keep the input order.
pub fn batch_prove(
    problem: &QuadraticProblem,
    points: &[(f64, Vec<f64>)],
    params: &ProofParams,
    opts: &ProveOptions,
) -> Vec<Result<ProofCertificate>> {
    let run = || {
        points
            .par_iter()
            .map(|(sigma, x)| prove(&problem.with_sigma(*sigma), x, params, opts))
            .collect()
    };
    match thread_cap() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    }
}

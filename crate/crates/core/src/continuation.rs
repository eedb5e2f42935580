//! Pseudo-arclength continuation of `f^{(m)}(x, σ) = 0` in `σ`.
//!
//! The unknown is `z = (x, σ) ∈ ℝ^{m+1}` with the plain Euclidean metric.
//! The corrector is full Newton on the bordered system
//! `{f^{(m)}(z) = 0, t·(z − z_pred) = 0}`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{
    inf_norm, ProblemSpec, QuadraticProblem, DEFAULT_NEWTON_MAX_ITER, DEFAULT_NEWTON_TOL,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub sigma: f64,
    pub x: Vec<f64>,
    /// Unit tangent `(δx, δσ)`.
    pub tangent: Vec<f64>,
    pub residual_norm: f64,
    /// Arclength step that produced this point; 0 at the start.
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    pub ds: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    pub tol: f64,
    /// Corrector iterations per step.
    pub max_iter: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            ds: 1e-3,
            ds_min: 1e-9,
            ds_max: 1e-2,
            tol: DEFAULT_NEWTON_TOL,
            max_iter: 12,
        }
    }
}

impl ContinuationOptions {
    fn validate(&self) -> Result<()> {
        let ok = self.ds > 0.0
            && self.ds_min > 0.0
            && self.ds_min <= self.ds
            && self.ds <= self.ds_max
            && self.ds_max.is_finite()
            && self.tol > 0.0;
        if !ok {
            return Err(Error::Parameter(format!(
                "need 0 < ds_min <= ds <= ds_max and tol > 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// `[Df^{(m)}(x) | ∂f/∂σ]`, an `m × (m+1)` matrix.
fn extended_jacobian(problem: &QuadraticProblem, x: &[f64]) -> Result<DMatrix<f64>> {
    let m = x.len();
    let j = problem.jacobian(x, m)?;
    let ds = problem.d_sigma(x, m)?;
    let mut e = DMatrix::zeros(m, m + 1);
    e.view_mut((0, 0), (m, m)).copy_from(&j);
    for k in 0..m {
        e[(k, m)] = ds[k];
    }
    Ok(e)
}

fn bordered(ext: &DMatrix<f64>, t: &[f64]) -> DMatrix<f64> {
    let m = ext.nrows();
    let mut b = DMatrix::zeros(m + 1, m + 1);
    b.view_mut((0, 0), (m, m + 1)).copy_from(ext);
    for (j, &v) in t.iter().enumerate() {
        b[(m, j)] = v;
    }
    b
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    for a in v.iter_mut() {
        *a /= n;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unit null vector of the extended Jacobian at `(x, σ)`, oriented so that
/// its dot product with `prev` is positive. Without `prev` the orientation
/// is towards increasing `σ`.
pub fn tangent(problem: &QuadraticProblem, x: &[f64], prev: Option<&[f64]>) -> Result<Vec<f64>> {
    let m = x.len();
    let ext = extended_jacobian(problem, x)?;
    let reference: Vec<f64> = match prev {
        Some(p) if p.len() == m + 1 => p.to_vec(),
        Some(_) => {
            return Err(Error::Parameter(
                "previous tangent has the wrong length".into(),
            ))
        }
        None => {
            let mut e = vec![0.0; m + 1];
            e[m] = 1.0;
            e
        }
    };
    let b = bordered(&ext, &reference);
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = 1.0;
    let fold = || Error::Fold {
        sigma: problem.sigma,
    };
    let mut t: Vec<f64> = b
        .lu()
        .solve(&rhs)
        .ok_or_else(fold)?
        .iter()
        .copied()
        .collect();
    if t.iter().any(|v| !v.is_finite()) {
        return Err(fold());
    }
    normalize(&mut t);
    // the bordered solve already gives t·reference = 1 > 0 before scaling
    if dot(&t, &reference) < 0.0 {
        t.iter_mut().for_each(|v| *v = -*v);
    }
    // a null vector of rank-deficient ext is not unique
    let resid = &ext * DVector::from_column_slice(&t);
    if !resid.iter().all(|v| v.is_finite()) || resid.amax() > 1e-6 * ext.amax().max(1.0) {
        return Err(fold());
    }
    Ok(t)
}

/// Newton at fixed `σ`, then the tangent oriented towards increasing `σ`
/// (or along `orient` when given).
pub fn start_point(
    problem: &QuadraticProblem,
    x0: &[f64],
    m: usize,
    tol: f64,
    orient: Option<&[f64]>,
) -> Result<BranchPoint> {
    let x = problem.newton_solve(x0, m, tol, DEFAULT_NEWTON_MAX_ITER)?;
    let tangent = tangent(problem, &x, orient)?;
    let residual_norm = inf_norm(&problem.f_proj(&x, m)?);
    Ok(BranchPoint {
        sigma: problem.sigma,
        x,
        tangent,
        residual_norm,
        step: 0.0,
    })
}

/// Corrector from the predicted point; `None` when it fails to converge.
fn correct(
    problem: &QuadraticProblem,
    pred: &[f64],
    t: &[f64],
    opts: &ContinuationOptions,
) -> Result<Option<(Vec<f64>, f64)>> {
    let m = pred.len() - 1;
    let mut z = pred.to_vec();
    for _ in 0..opts.max_iter {
        let p = problem.with_sigma(z[m]);
        let f = p.f_proj(&z[..m], m)?;
        let res = inf_norm(&f);
        if !res.is_finite() {
            return Ok(None);
        }
        if res <= opts.tol {
            return Ok(Some((z, res)));
        }
        let ext = extended_jacobian(&p, &z[..m])?;
        let b = bordered(&ext, t);
        let mut rhs = DVector::zeros(m + 1);
        for k in 0..m {
            rhs[k] = f[k];
        }
        let diff: Vec<f64> = z.iter().zip(pred).map(|(a, b)| a - b).collect();
        rhs[m] = dot(t, &diff);
        let Some(dz) = b.lu().solve(&rhs) else {
            return Ok(None);
        };
        for (zi, d) in z.iter_mut().zip(dz.iter()) {
            *zi -= d;
        }
    }
    let p = problem.with_sigma(z[m]);
    let res = inf_norm(&p.f_proj(&z[..m], m)?);
    Ok((res <= opts.tol).then_some((z, res)))
}

/// Follows the branch from `start` for `steps` accepted steps along its tangent.
pub fn trace_branch(
    problem: &QuadraticProblem,
    start: &BranchPoint,
    steps: usize,
    opts: &ContinuationOptions,
) -> Result<Vec<BranchPoint>> {
    opts.validate()?;
    let m = start.x.len();
    if start.tangent.len() != m + 1 {
        return Err(Error::Parameter(
            "start tangent has the wrong length".into(),
        ));
    }
    let mut points = vec![start.clone()];
    let mut ds = opts.ds;
    let mut streak = 0;
    while points.len() <= steps {
        let cur = points.last().expect("non-empty");
        let mut z0 = cur.x.clone();
        z0.push(cur.sigma);
        let t = &cur.tangent;
        let pred: Vec<f64> = z0.iter().zip(t).map(|(a, b)| a + ds * b).collect();
        let accepted = match correct(problem, &pred, t, opts)? {
            // reject correctors that wander far from the predicted point
            Some((z, res)) if dist(&z, &pred) <= 0.5 * ds => Some((z, res)),
            _ => None,
        };
        let Some((z, res)) = accepted else {
            ds *= 0.5;
            streak = 0;
            if ds < opts.ds_min {
                return Err(Error::Stall {
                    sigma: cur.sigma,
                    ds,
                    partial: Box::new(points),
                });
            }
            continue;
        };
        let p = problem.with_sigma(z[m]);
        let tangent = match tangent(&p, &z[..m], Some(t)) {
            Ok(t) => t,
            Err(Error::Fold { .. }) => {
                ds *= 0.5;
                streak = 0;
                if ds < opts.ds_min {
                    return Err(Error::Fold { sigma: z[m] });
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        points.push(BranchPoint {
            sigma: z[m],
            x: z[..m].to_vec(),
            tangent,
            residual_norm: res,
            step: ds,
        });
        streak += 1;
        if streak >= 5 {
            ds = (2.0 * ds).min(opts.ds_max);
            streak = 0;
        }
    }
    Ok(points)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Both directions from `start`: `2 steps + 1` points ordered along the branch.
pub fn trace_both(
    problem: &QuadraticProblem,
    start: &BranchPoint,
    steps: usize,
    opts: &ContinuationOptions,
) -> Result<Vec<BranchPoint>> {
    let forward = trace_branch(problem, start, steps, opts)?;
    let mut reversed = start.clone();
    reversed.tangent.iter_mut().for_each(|v| *v = -*v);
    let backward = match trace_branch(problem, &reversed, steps, opts) {
        Ok(b) => b,
        Err(Error::Stall { sigma, ds, partial }) => {
            let mut all: Vec<BranchPoint> = partial.into_iter().skip(1).rev().collect();
            all.extend(forward);
            return Err(Error::Stall {
                sigma,
                ds,
                partial: Box::new(all),
            });
        }
        Err(e) => return Err(e),
    };
    let mut all: Vec<BranchPoint> = backward.into_iter().skip(1).rev().collect();
    all.extend(forward);
    Ok(all)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub sigma: f64,
    pub x: Vec<f64>,
    pub residual: f64,
}

/// The branch file: `{"problem", "m", "points": [{"sigma", "x", "residual"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFile {
    pub problem: ProblemSpec,
    pub m: usize,
    pub points: Vec<BranchRecord>,
}

impl BranchFile {
    pub fn new(problem: &QuadraticProblem, m: usize, points: &[BranchPoint]) -> Self {
        BranchFile {
            problem: problem.spec().clone(),
            m,
            points: points
                .iter()
                .map(|p| BranchRecord {
                    sigma: p.sigma,
                    x: p.x.clone(),
                    residual: p.residual_norm,
                })
                .collect(),
        }
    }
}

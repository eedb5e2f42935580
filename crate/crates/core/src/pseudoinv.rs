//! The finite block of the approximate inverse.
//!
//! `K̃` is the Jacobian projection with the corner corrected for the tail
//! coupling, `A_m` is a plain floating-point inverse of its midpoint, and
//! `|I − A_m K̃|` carries all the rigour.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Dense row-major matrix of intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IntervalMatrix {
    /// # Panics
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Interval>) -> Self {
        assert_eq!(data.len(), rows * cols, "shape mismatch");
        IntervalMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntervalMatrix::from_row_major(rows, cols, vec![Interval::ZERO; rows * cols])
    }

    pub fn from_points(a: &DMatrix<f64>) -> Self {
        let (rows, cols) = a.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(Interval::point(a[(i, j)]));
            }
        }
        IntervalMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Interval) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Interval] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mid(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).mid())
    }

    pub fn abs(&self) -> IntervalMatrix {
        IntervalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Largest upper endpoint.
    pub fn max_hi(&self) -> f64 {
        self.data
            .iter()
            .fold(f64::NEG_INFINITY, |a, v| a.max(v.hi()))
    }

    /// Rigorous `self · v`.
    pub fn mul_vec(&self, v: &[Interval]) -> Vec<Interval> {
        assert_eq!(v.len(), self.cols, "shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }
}

/// `K̃ = D` except `K̃[m−1][m−1] = D[m−1][m−1] − β_{m−1} λ_m w̃`.
pub fn build_k_tilde(
    d: &IntervalMatrix,
    beta_m1: Interval,
    lambda_m: Interval,
    w_tilde: Interval,
) -> IntervalMatrix {
    let m = d.rows();
    assert_eq!(m, d.cols(), "D must be square");
    let mut k = d.clone();
    if m > 0 {
        let corner = d.get(m - 1, m - 1) - beta_m1 * lambda_m * w_tilde;
        k.set(m - 1, m - 1, corner);
    }
    k
}

/// Floating-point inverse of `mid(K̃)` by LU with partial pivoting.
pub fn invert_numeric(k_tilde: &IntervalMatrix) -> Result<DMatrix<f64>> {
    let inv = k_tilde.mid().try_inverse().ok_or(Error::Singular)?;
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(inv)
}

/// Entrywise enclosure of `|I − A_m K̃|`.
pub fn residual(a_m: &DMatrix<f64>, k_tilde: &IntervalMatrix) -> IntervalMatrix {
    let n = a_m.nrows();
    assert_eq!(a_m.ncols(), k_tilde.rows(), "shape mismatch");
    let cols = k_tilde.cols();
    let mut out = Vec::with_capacity(n * cols);
    for i in 0..n {
        for j in 0..cols {
            let mut acc = if i == j {
                Interval::ONE
            } else {
                Interval::ZERO
            };
            for l in 0..k_tilde.rows() {
                acc -= Interval::point(a_m[(i, l)]) * k_tilde.get(l, j);
            }
            out.push(acc.abs());
        }
    }
    IntervalMatrix::from_row_major(n, cols, out)
}

#[derive(Debug, Clone)]
pub struct FiniteBlock {
    pub m: usize,
    pub d: IntervalMatrix,
    pub k_tilde: IntervalMatrix,
    pub a_m: DMatrix<f64>,
    pub residual: IntervalMatrix,
}

impl FiniteBlock {
    pub fn new(
        d: IntervalMatrix,
        beta_m1: Interval,
        lambda_m: Interval,
        w_tilde: Interval,
    ) -> Result<Self> {
        let k_tilde = build_k_tilde(&d, beta_m1, lambda_m, w_tilde);
        let a_m = invert_numeric(&k_tilde)?;
        let residual = residual(&a_m, &k_tilde);
        Ok(FiniteBlock {
            m: d.rows(),
            d,
            k_tilde,
            a_m,
            residual,
        })
    }

    /// `|A_m|` as point intervals.
    pub fn a_abs(&self, i: usize, j: usize) -> Interval {
        Interval::point(self.a_m[(i, j)].abs())
    }
}

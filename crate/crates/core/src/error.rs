use thiserror::Error;

use crate::continuation::BranchPoint;
use crate::interval::IntervalError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("assumption violated at k = {k}: {inequality}")]
    Assumption { k: usize, inequality: String },
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("degenerate LU factorisation: pivot {n} encloses zero")]
    DegenerateLu { n: usize },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("no radius makes every radii polynomial negative; index {worst_index} blocks ({suggestion})")]
    EmptyFeasibleSet {
        worst_index: usize,
        suggestion: String,
    },
    #[error("bordered system is singular near sigma = {sigma} (fold)")]
    Fold { sigma: f64 },
    #[error("continuation stalled near sigma = {sigma}: step {ds:e} fell below the minimum")]
    Stall {
        sigma: f64,
        ds: f64,
        partial: Box<Vec<BranchPoint>>,
    },
    #[error("problem definition: {0}")]
    Problem(String),
}

pub type Result<T> = std::result::Result<T, Error>;

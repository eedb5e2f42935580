pub mod bounds;
pub mod continuation;
pub mod error;
pub mod interval;
pub mod problem;
pub mod prover;
pub mod pseudoinv;
pub mod seqspace;
pub mod tridiag;

pub use bounds::{compute_bounds, BoundSet, ProofData, ProofParams};
pub use continuation::BranchPoint;
pub use error::{Error, Result};
pub use interval::Interval;
pub use problem::{ProblemSpec, QuadraticProblem};
pub use prover::{prove, ProofCertificate, ProveOptions};

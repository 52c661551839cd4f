//! Smallest singular values of sparse random matrices.
//!
//! The crate generates random matrix ensembles whose entries may vanish,
//! evaluates the explicit constants of the smallest-singular-value tail
//! bounds for such ensembles, and checks the underlying probability
//! inequalities by exact enumeration or seeded Monte Carlo.
//!
//! * [`ensemble`]: entry laws, variance profiles, conditions (i)-(iv), sampling.
//! * [`spectra`]: one-sided Jacobi SVD, operator norm, column distances.
//! * [`geometry`]: sparse / compressible / incompressible vectors, spread sets, nets.
//! * [`bounds`]: closed-form constants and bound evaluators.
//! * [`probe`]: Monte Carlo estimators with exact binomial intervals and exact oracles.

// `!(x > 0.0)` is how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod ensemble;
pub mod geometry;
pub mod matrix;
pub mod probe;
pub mod rng;
pub mod spectra;

pub use bounds::{TheoremConstants, UniversalConstants};
pub use ensemble::{EnsembleSpec, MatrixSample, Params};
pub use geometry::Class;
pub use matrix::Matrix;
pub use probe::{TrialSummary, Verdict};

//! Singular values, operator norm and column-to-hyperplane distances.

mod jacobi;
mod qr;

use thiserror::Error;

pub use jacobi::{
    operator_norm, power_iteration_norm, singular_values, smallest_singular, smallest_singular_pair, svd,
    SpectrumResult, Svd, MAX_SWEEPS, OFF_DIAGONAL_TOL,
};
pub use qr::{column_distance, RANK_TOL};

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("Jacobi SVD did not converge in {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
}

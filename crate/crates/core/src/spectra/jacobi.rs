//! One-sided (Hestenes) Jacobi SVD.
//!
//! Columns of the working copy are rotated pairwise until every pair is
//! orthogonal to `OFF_DIAGONAL_TOL` relative to the product of their norms.
//! The column norms are then the singular values and the accumulated
//! rotations are the right singular vectors. `M^T M` is never formed.

use serde::Serialize;

use super::SpectraError;
use crate::matrix::{dot, norm2, Matrix};

pub const OFF_DIAGONAL_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    /// `s_1 >= ... >= s_n >= 0`.
    pub values: Vec<f64>,
    pub sweeps: usize,
    /// Largest `|<a_p, a_q>| / (|a_p| |a_q|)` seen in the final sweep.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Svd {
    pub spectrum: SpectrumResult,
    /// Right singular vectors, `right[k]` paired with `spectrum.values[k]`.
    pub right: Vec<Vec<f64>>,
}

fn check_input(m: &Matrix) -> Result<(), SpectraError> {
    if m.cols() == 0 || m.rows() < m.cols() {
        return Err(SpectraError::InvalidInput(format!("need N >= n >= 1, got {}x{}", m.rows(), m.cols())));
    }
    if !m.is_finite() {
        return Err(SpectraError::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Applies the rotation `[c s; -s c]` to the column pair `(x, y)`.
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (u, v) = (*a, *b);
        *a = c * u - s * v;
        *b = s * u + c * v;
    }
}

pub fn svd(m: &Matrix) -> Result<Svd, SpectraError> {
    check_input(m)?;
    let n = m.cols();
    let mut cols = m.columns();
    let mut right: Vec<Vec<f64>> = (0..n).map(|k| (0..n).map(|i| f64::from(u8::from(i == k))).collect()).collect();

    // Columns at roundoff level of |M|_F carry no direction and are skipped.
    let null = (f64::EPSILON * m.frobenius_norm_sq().sqrt()).powi(2);
    let mut sweeps = 0;
    let mut residual = 0.0;
    loop {
        if sweeps == MAX_SWEEPS {
            return Err(SpectraError::NoConvergence { sweeps, residual });
        }
        sweeps += 1;
        residual = 0.0f64;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if alpha <= null || beta <= null || gamma == 0.0 {
                    continue;
                }
                let off = gamma.abs() / (alpha * beta).sqrt();
                residual = residual.max(off);
                if off <= OFF_DIAGONAL_TOL {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                let (lo, hi) = right.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(f64, usize)> = cols.iter().enumerate().map(|(k, c)| (norm2(c), k)).collect();
    // Descending by value; equal values keep column order.
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let values = order.iter().map(|&(v, _)| v).collect();
    let right = order.iter().map(|&(_, k)| right[k].clone()).collect();
    Ok(Svd { spectrum: SpectrumResult { values, sweeps, residual }, right })
}

pub fn singular_values(m: &Matrix) -> Result<SpectrumResult, SpectraError> {
    svd(m).map(|s| s.spectrum)
}

pub fn smallest_singular(m: &Matrix) -> Result<f64, SpectraError> {
    Ok(*singular_values(m)?.values.last().expect("n >= 1"))
}

/// `s_n` together with a unit vector `x` attaining `|Mx| = s_n`.
pub fn smallest_singular_pair(m: &Matrix) -> Result<(f64, Vec<f64>), SpectraError> {
    let mut s = svd(m)?;
    let x = s.right.pop().expect("n >= 1");
    Ok((*s.spectrum.values.last().expect("n >= 1"), x))
}

pub fn operator_norm(m: &Matrix) -> Result<f64, SpectraError> {
    Ok(singular_values(m)?.values[0])
}

/// Power iteration on `M^T M`; a lower estimate of `|M|` that converges to it.
pub fn power_iteration_norm(m: &Matrix, iterations: usize) -> f64 {
    let n = m.cols();
    if n == 0 || m.rows() == 0 {
        return 0.0;
    }
    // Deterministic start with no special alignment to the coordinate axes.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.754_877_666).fract()).collect();
    let mt = m.transpose();
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let nx = norm2(&x);
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let y = m.mul_vec(&x);
        estimate = norm2(&y);
        x = mt.mul_vec(&y);
    }
    estimate
}

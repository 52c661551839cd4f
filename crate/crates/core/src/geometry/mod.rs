//! Sphere decomposition into compressible and incompressible vectors.
//!
//! `x` is `(m, rho)`-compressible when it lies within Euclidean distance
//! `rho` of some `m`-sparse vector, and incompressible otherwise. The distance
//! to `Sparse(m)` is the norm of `x` with its `m` largest coordinates removed.

mod net;

use serde::Serialize;
use thiserror::Error;

pub use net::{build_net, NetDomain, NetOptions, NetReport};

use crate::matrix::norm2;

/// Distances within this band of `rho` classify as compressible.
pub const TIE_BAND: f64 = 1e-9;
/// Largest dimension the exhaustive oracle accepts.
pub const ORACLE_MAX_DIM: usize = 20;
const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension {n} exceeds the exhaustive limit {limit}")]
    Capacity { n: usize, limit: usize },
    #[error("net failed certification: a probe point is {max_distance} from the net (epsilon {epsilon})")]
    NetCertification { max_distance: f64, epsilon: f64 },
}

/// Sparsity level `m` and distance threshold `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompressibilityParams {
    pub m: usize,
    pub rho: f64,
}

impl CompressibilityParams {
    pub fn new(m: usize, rho: f64) -> Result<Self, GeometryError> {
        if m == 0 {
            return Err(GeometryError::InvalidInput("sparsity level m must be at least 1".into()));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(GeometryError::InvalidInput(format!("rho = {rho} must lie in (0, 1)")));
        }
        Ok(Self { m, rho })
    }

    /// `m = floor(gamma n)`.
    pub fn from_gamma(gamma: f64, n: usize, rho: f64) -> Result<Self, GeometryError> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(GeometryError::InvalidInput(format!("gamma = {gamma} must lie in (0, 1)")));
        }
        Self::new((gamma * n as f64).floor() as usize, rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Class {
    Sparse,
    Compressible,
    Incompressible,
}

/// Indices of `x` ordered by decreasing magnitude, ties by ascending index.
fn by_magnitude(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
    idx
}

/// Distance from `x` to the set of `m`-sparse vectors.
pub fn distance_to_sparse(x: &[f64], m: usize) -> Result<f64, GeometryError> {
    if m > x.len() {
        return Err(GeometryError::InvalidInput(format!("m = {m} exceeds dimension {}", x.len())));
    }
    let tail: f64 = by_magnitude(x)[m..].iter().map(|&k| x[k] * x[k]).sum();
    Ok(tail.sqrt())
}

fn check_unit(x: &[f64]) -> Result<(), GeometryError> {
    let norm = norm2(x);
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(GeometryError::InvalidInput(format!("expected a unit vector, |x| = {norm}")));
    }
    Ok(())
}

fn check_params(x: &[f64], params: &CompressibilityParams) -> Result<(), GeometryError> {
    if params.m > x.len() {
        return Err(GeometryError::InvalidInput(format!("m = {} exceeds dimension {}", params.m, x.len())));
    }
    check_unit(x)
}

pub fn classify(x: &[f64], params: &CompressibilityParams) -> Result<Class, GeometryError> {
    check_params(x, params)?;
    let d = distance_to_sparse(x, params.m)?;
    Ok(if d == 0.0 {
        Class::Sparse
    } else if d <= params.rho + TIE_BAND {
        Class::Compressible
    } else {
        Class::Incompressible
    })
}

/// Incompressibility by brute force: `|P_sigma x| > rho` for every `sigma`
/// whose complement has at most `m` elements.
pub fn incompressible_oracle(x: &[f64], params: &CompressibilityParams) -> Result<bool, GeometryError> {
    let n = x.len();
    if n > ORACLE_MAX_DIM {
        return Err(GeometryError::Capacity { n, limit: ORACLE_MAX_DIM });
    }
    check_params(x, params)?;
    let keep_at_least = n - params.m;
    // kept[mask] = sum of x_k^2 over the coordinates in mask
    let mut kept = vec![0.0f64; 1 << n];
    let mut min_kept = f64::INFINITY;
    for mask in 1usize..1 << n {
        let low = mask.trailing_zeros() as usize;
        kept[mask] = kept[mask & (mask - 1)] + x[low] * x[low];
    }
    for (mask, &sq) in kept.iter().enumerate() {
        if mask.count_ones() as usize >= keep_at_least {
            min_kept = min_kept.min(sq);
        }
    }
    Ok(min_kept.sqrt() > params.rho)
}

/// Coordinates of `x` with `lower <= |x_k| <= upper`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadSet {
    pub indices: Vec<usize>,
    /// `rho / sqrt(2n)`.
    pub lower: f64,
    /// `1 / sqrt(gamma n)`.
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpreadVerdict {
    /// `|sigma| >= rho^2 gamma n / 2`.
    Holds,
    /// The cardinality bound fails for a compressible `x`, where nothing is promised.
    CompressibleShortfall,
    /// The cardinality bound fails for an incompressible `x`.
    LemmaViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadReport {
    pub set: SpreadSet,
    pub required: f64,
    pub incompressible: bool,
    pub verdict: SpreadVerdict,
}

pub fn spread_set(x: &[f64], gamma: f64, rho: f64) -> Result<SpreadReport, GeometryError> {
    if !(gamma > 0.0 && gamma < 1.0 && rho > 0.0 && rho < 1.0) {
        return Err(GeometryError::InvalidInput(format!("gamma = {gamma}, rho = {rho} must lie in (0, 1)")));
    }
    check_unit(x)?;
    let n = x.len() as f64;
    let lower = rho / (2.0 * n).sqrt();
    let upper = 1.0 / (gamma * n).sqrt();
    let indices: Vec<usize> = (0..x.len()).filter(|&k| (lower..=upper).contains(&x[k].abs())).collect();
    let required = 0.5 * rho * rho * gamma * n;
    let m = (gamma * n).floor() as usize;
    let incompressible = distance_to_sparse(x, m)? > rho;
    let verdict = match (indices.len() as f64 >= required, incompressible) {
        (true, _) => SpreadVerdict::Holds,
        (false, false) => SpreadVerdict::CompressibleShortfall,
        (false, true) => SpreadVerdict::LemmaViolated,
    };
    Ok(SpreadReport { set: SpreadSet { indices, lower, upper }, required, incompressible, verdict })
}

/// Coordinate projection `P_sigma x`.
pub fn project(x: &[f64], sigma: &[usize]) -> Result<Vec<f64>, GeometryError> {
    let mut out = vec![0.0; x.len()];
    for &k in sigma {
        let v = x
            .get(k)
            .ok_or_else(|| GeometryError::InvalidInput(format!("index {k} out of range for dimension {}", x.len())))?;
        out[k] = *v;
    }
    Ok(out)
}

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::EnsembleError;

/// Law of a single centered matrix entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DistributionFamily {
    Gaussian {
        sd: f64,
    },
    /// `±scale` with probability 1/2 each.
    Rademacher {
        scale: f64,
    },
    /// Uniform on `[-halfwidth, halfwidth]`.
    UniformSymmetric {
        halfwidth: f64,
    },
    /// `v1` with probability `p`, otherwise `v2`; requires `p v1 + (1 - p) v2 = 0`.
    TwoPointCentered {
        v1: f64,
        v2: f64,
        p: f64,
    },
    Zero,
}

impl DistributionFamily {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        let bad = |what: &str| Err(EnsembleError::InvalidInput(format!("{self:?}: {what}")));
        match *self {
            Self::Gaussian { sd: v } | Self::Rademacher { scale: v } | Self::UniformSymmetric { halfwidth: v } => {
                if !v.is_finite() || v < 0.0 {
                    return bad("parameter must be finite and nonnegative");
                }
            }
            Self::TwoPointCentered { v1, v2, p } => {
                if !(v1.is_finite() && v2.is_finite() && p.is_finite()) {
                    return bad("parameters must be finite");
                }
                if !(p > 0.0 && p < 1.0) {
                    return bad("p must lie in (0, 1)");
                }
                let mean = p * v1 + (1.0 - p) * v2;
                if mean.abs() > 1e-12 * v1.abs().max(v2.abs()).max(1.0) {
                    return bad("mean p*v1 + (1-p)*v2 must be zero");
                }
            }
            Self::Zero => {}
        }
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Gaussian { sd } => sd * sd,
            Self::Rademacher { scale } => scale * scale,
            Self::UniformSymmetric { halfwidth } => halfwidth * halfwidth / 3.0,
            Self::TwoPointCentered { v1, v2, p } => p * v1 * v1 + (1.0 - p) * v2 * v2,
            Self::Zero => 0.0,
        }
    }

    /// Largest absolute value the entry can take, `None` when unbounded.
    pub fn sup_abs(&self) -> Option<f64> {
        match *self {
            Self::Gaussian { sd } if sd > 0.0 => None,
            Self::Gaussian { .. } | Self::Zero => Some(0.0),
            Self::Rademacher { scale } => Some(scale),
            Self::UniformSymmetric { halfwidth } => Some(halfwidth),
            Self::TwoPointCentered { v1, v2, .. } => Some(v1.abs().max(v2.abs())),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gaussian { sd } => sd * rng.sample::<f64, _>(StandardNormal),
            Self::Rademacher { scale } => {
                if rng.random::<bool>() {
                    scale
                } else {
                    -scale
                }
            }
            Self::UniformSymmetric { halfwidth } => halfwidth * (2.0 * rng.random::<f64>() - 1.0),
            Self::TwoPointCentered { v1, v2, p } => {
                if rng.random::<f64>() < p {
                    v1
                } else {
                    v2
                }
            }
            Self::Zero => 0.0,
        }
    }
}

/// `E|xi|^r` in closed form.
pub fn moment_bound(family: &DistributionFamily, r: f64) -> Result<f64, EnsembleError> {
    family.validate()?;
    if !(r.is_finite() && r > 0.0) {
        return Err(EnsembleError::InvalidInput(format!("moment order {r} must be positive")));
    }
    Ok(match *family {
        // E|g|^r = 2^{r/2} Gamma((r+1)/2) / sqrt(pi)
        DistributionFamily::Gaussian { sd } => {
            let log_unit =
                0.5 * r * std::f64::consts::LN_2 + ln_gamma(0.5 * (r + 1.0)) - 0.5 * std::f64::consts::PI.ln();
            sd.powf(r) * log_unit.exp()
        }
        DistributionFamily::Rademacher { scale } => scale.powf(r),
        DistributionFamily::UniformSymmetric { halfwidth } => halfwidth.powf(r) / (r + 1.0),
        DistributionFamily::TwoPointCentered { v1, v2, p } => p * v1.abs().powf(r) + (1.0 - p) * v2.abs().powf(r),
        DistributionFamily::Zero => 0.0,
    })
}

/// A valid subgaussian parameter `b`.
///
/// Gaussian entries use their standard deviation. Every other family here is
/// bounded and centered, so Hoeffding's lemma gives half the range.
pub fn subgaussian_parameter(family: &DistributionFamily) -> Result<f64, EnsembleError> {
    family.validate()?;
    Ok(match *family {
        DistributionFamily::Gaussian { sd } => sd,
        DistributionFamily::Rademacher { scale } => scale,
        DistributionFamily::UniformSymmetric { halfwidth } => halfwidth,
        DistributionFamily::TwoPointCentered { v1, v2, .. } => 0.5 * (v1 - v2).abs(),
        DistributionFamily::Zero => 0.0,
    })
}

/// Unit-variance law that the variance profile rescales entry by entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntryShape {
    Gaussian,
    Rademacher,
    Uniform,
    /// Centered two-point law taking its positive value with probability `p`.
    TwoPoint {
        p: f64,
    },
}

impl EntryShape {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        if let Self::TwoPoint { p } = *self {
            if !(p > 0.0 && p < 1.0) {
                return Err(EnsembleError::InvalidInput(format!("two-point p = {p} must lie in (0, 1)")));
            }
        }
        Ok(())
    }

    /// The family with this shape and the given variance. Zero variance gives `Zero`.
    pub fn scaled(&self, variance: f64) -> DistributionFamily {
        if variance <= 0.0 {
            return DistributionFamily::Zero;
        }
        let sd = variance.sqrt();
        match *self {
            Self::Gaussian => DistributionFamily::Gaussian { sd },
            Self::Rademacher => DistributionFamily::Rademacher { scale: sd },
            Self::Uniform => DistributionFamily::UniformSymmetric { halfwidth: sd * 3f64.sqrt() },
            Self::TwoPoint { p } => DistributionFamily::TwoPointCentered {
                v1: sd * ((1.0 - p) / p).sqrt(),
                v2: -sd * (p / (1.0 - p)).sqrt(),
                p,
            },
        }
    }
}

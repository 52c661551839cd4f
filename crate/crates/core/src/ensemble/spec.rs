use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::family::{DistributionFamily, EntryShape};
use super::profile::{make_sparse_profile, VarianceProfile};
use super::EnsembleError;
use crate::matrix::Matrix;
use crate::rng::EntryStreams;

/// Model parameters `(r, mu, a1, a2, a3, a4)` of conditions (i)-(iv).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub r: f64,
    pub mu: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl Params {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        let checks = [
            (self.r > 2.0 && self.r.is_finite(), "r > 2"),
            (self.mu >= 1.0 && self.mu.is_finite(), "mu >= 1"),
            (self.a1 > 0.0 && self.a1.is_finite(), "a1 > 0"),
            (self.a2 > 0.0 && self.a2.is_finite(), "a2 > 0"),
            (self.a3 > 0.0 && self.a3 <= self.mu, "0 < a3 <= mu"),
            (self.a4 > 0.0 && self.a4 <= 1.0, "0 < a4 <= 1"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, what)) => {
                Err(EnsembleError::InvalidInput(format!("parameter constraint {what} violated: {self:?}")))
            }
            None => Ok(()),
        }
    }

    /// `min{3, r}`: every bound is evaluated at this order.
    pub fn r0(&self) -> f64 {
        self.r.min(3.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Gaussian,
    Rademacher,
    Uniform,
    TwoPoint,
}

/// `[family]` section: one shape for every entry plus optional per-entry overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySection {
    pub shape: ShapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<FamilyOverride>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyOverride {
    pub row: usize,
    pub col: usize,
    pub shape: ShapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

fn to_shape(kind: ShapeKind, p: Option<f64>) -> Result<EntryShape, EnsembleError> {
    let shape = match (kind, p) {
        (ShapeKind::Gaussian, None) => EntryShape::Gaussian,
        (ShapeKind::Rademacher, None) => EntryShape::Rademacher,
        (ShapeKind::Uniform, None) => EntryShape::Uniform,
        (ShapeKind::TwoPoint, Some(p)) => EntryShape::TwoPoint { p },
        (ShapeKind::TwoPoint, None) => {
            return Err(EnsembleError::Config("two-point shape needs a probability `p`".into()))
        }
        (other, Some(_)) => return Err(EnsembleError::Config(format!("shape {other:?} takes no `p`"))),
    };
    shape.validate()?;
    Ok(shape)
}

fn from_shape(shape: EntryShape) -> (ShapeKind, Option<f64>) {
    match shape {
        EntryShape::Gaussian => (ShapeKind::Gaussian, None),
        EntryShape::Rademacher => (ShapeKind::Rademacher, None),
        EntryShape::Uniform => (ShapeKind::Uniform, None),
        EntryShape::TwoPoint { p } => (ShapeKind::TwoPoint, Some(p)),
    }
}

/// Unit-variance shape of every entry; the profile supplies the variance.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMap {
    pub default: EntryShape,
    pub overrides: BTreeMap<(usize, usize), EntryShape>,
}

impl FamilyMap {
    pub fn uniform(shape: EntryShape) -> Self {
        Self { default: shape, overrides: BTreeMap::new() }
    }

    pub fn shape_at(&self, row: usize, col: usize) -> EntryShape {
        self.overrides.get(&(row, col)).copied().unwrap_or(self.default)
    }

    fn from_section(section: &FamilySection) -> Result<Self, EnsembleError> {
        let mut map = Self::uniform(to_shape(section.shape, section.p)?);
        for o in &section.overrides {
            map.overrides.insert((o.row, o.col), to_shape(o.shape, o.p)?);
        }
        Ok(map)
    }

    fn to_section(&self) -> FamilySection {
        let (shape, p) = from_shape(self.default);
        let overrides = self
            .overrides
            .iter()
            .map(|(&(row, col), &s)| {
                let (shape, p) = from_shape(s);
                FamilyOverride { row, col, shape, p }
            })
            .collect();
        FamilySection { shape, p, overrides }
    }
}

/// `[profile]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSource {
    Constant {
        value: f64,
    },
    Dense {
        rows: Vec<Vec<f64>>,
    },
    /// Arguments of [`make_sparse_profile`]; fill and target default to `a4` and `a3`.
    Sparse {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        row_fill: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        column_target: Option<f64>,
        #[serde(default)]
        seed: u64,
    },
}

/// Text form of an [`EnsembleSpec`]: `[shape]`, `[params]`, `[family]`, `[profile]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub shape: Shape,
    pub params: Params,
    pub family: FamilySection,
    pub profile: ProfileSource,
}

impl EnsembleConfig {
    pub fn from_toml(text: &str) -> Result<Self, EnsembleError> {
        toml::from_str(text).map_err(|e| EnsembleError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("ensemble config is always representable in TOML")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    rows: usize,
    cols: usize,
    params: Params,
    profile: VarianceProfile,
    families: FamilyMap,
    source: ProfileSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSample {
    pub matrix: Matrix,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(profile: VarianceProfile, families: FamilyMap, params: Params) -> Result<Self, EnsembleError> {
        let source = ProfileSource::Dense { rows: profile.to_rows() };
        Self::build(profile, families, params, source)
    }

    /// Every entry has the same shape and variance.
    pub fn homogeneous(
        rows: usize,
        cols: usize,
        shape: EntryShape,
        variance: f64,
        params: Params,
    ) -> Result<Self, EnsembleError> {
        let profile = VarianceProfile::constant(rows, cols, variance)?;
        Self::build(profile, FamilyMap::uniform(shape), params, ProfileSource::Constant { value: variance })
    }

    pub fn from_config(config: &EnsembleConfig) -> Result<Self, EnsembleError> {
        let Shape { rows, cols } = config.shape;
        config.params.validate()?;
        let profile = match &config.profile {
            ProfileSource::Constant { value } => VarianceProfile::constant(rows, cols, *value)?,
            ProfileSource::Dense { rows: grid } => {
                let p = VarianceProfile::from_rows(grid)?;
                if (p.rows(), p.cols()) != (rows, cols) {
                    return Err(EnsembleError::Config(format!(
                        "inline profile is {}x{}, [shape] says {rows}x{cols}",
                        p.rows(),
                        p.cols()
                    )));
                }
                p
            }
            ProfileSource::Sparse { row_fill, column_target, seed } => make_sparse_profile(
                rows,
                cols,
                row_fill.unwrap_or(config.params.a4),
                column_target.unwrap_or(config.params.a3),
                *seed,
            )?,
        };
        Self::build(profile, FamilyMap::from_section(&config.family)?, config.params, config.profile.clone())
    }

    pub fn from_toml(text: &str) -> Result<Self, EnsembleError> {
        Self::from_config(&EnsembleConfig::from_toml(text)?)
    }

    fn build(
        profile: VarianceProfile,
        families: FamilyMap,
        params: Params,
        source: ProfileSource,
    ) -> Result<Self, EnsembleError> {
        let (rows, cols) = (profile.rows(), profile.cols());
        if cols == 0 || rows < cols {
            return Err(EnsembleError::InvalidInput(format!("need N >= n >= 1, got {rows}x{cols}")));
        }
        params.validate()?;
        families.default.validate()?;
        for (&(j, i), shape) in &families.overrides {
            if j >= rows || i >= cols {
                return Err(EnsembleError::InvalidInput(format!("family override ({j}, {i}) outside {rows}x{cols}")));
            }
            shape.validate()?;
        }
        Ok(Self { rows, cols, params, profile, families, source })
    }

    pub fn to_config(&self) -> EnsembleConfig {
        EnsembleConfig {
            shape: Shape { rows: self.rows, cols: self.cols },
            params: self.params,
            family: self.families.to_section(),
            profile: self.source.clone(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn profile(&self) -> &VarianceProfile {
        &self.profile
    }

    pub fn families(&self) -> &FamilyMap {
        &self.families
    }

    /// Aspect parameter `delta` with `N = (1 + delta) n`, as the exact fraction `(N - n) / n`.
    pub fn aspect_delta(&self) -> (usize, usize) {
        (self.rows - self.cols, self.cols)
    }

    pub fn delta(&self) -> f64 {
        (self.rows - self.cols) as f64 / self.cols as f64
    }

    pub fn family_at(&self, row: usize, col: usize) -> DistributionFamily {
        self.families.shape_at(row, col).scaled(self.profile.get(row, col))
    }

    /// Same ensemble with a different variance profile of the same shape.
    pub fn with_profile(&self, profile: VarianceProfile) -> Result<Self, EnsembleError> {
        let source = ProfileSource::Dense { rows: profile.to_rows() };
        Self::build(profile, self.families.clone(), self.params, source)
    }
}

/// Draws one matrix. Entry `(j, i)` uses its own keyed stream, see [`crate::rng`].
pub fn sample(spec: &EnsembleSpec, seed: u64) -> MatrixSample {
    let streams = EntryStreams::new(seed);
    let matrix = Matrix::from_fn(spec.rows, spec.cols, |j, i| match spec.family_at(j, i) {
        DistributionFamily::Zero => 0.0,
        family => family.sample(&mut streams.entry(j, i)),
    });
    MatrixSample { matrix, seed }
}

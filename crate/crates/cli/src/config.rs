//! Experiment configuration file.
//!
//! ```toml
//! seed = 7
//! trials = 2000
//! alpha = 0.05
//!
//! [ensemble.shape]
//! rows = 200
//! cols = 10
//! # [ensemble.params], [ensemble.family], [ensemble.profile]: see `EnsembleConfig`
//!
//! [constants]
//! c_abs = 1.0
//!
//! [experiment]
//! kind = "tail-sweep"
//! axis = "delta"
//! values = [1.0, 4.0, 19.0]
//!
//! [output]
//! dir = "out"
//! format = "csv"
//! ```
//!
//! Every section but the top-level scalars is optional. Unknown keys are
//! rejected with their line and column.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sparsesv::bounds::UniversalConstants;
use sparsesv::ensemble::{EnsembleConfig, ShapeKind};
use sparsesv::probe::DEFAULT_ALPHA;

use crate::CliError;

pub const DEFAULT_TRIALS: u64 = 1000;
pub const DEFAULT_TIME_LIMIT: f64 = 60.0;
pub const DEFAULT_MAX_GRID: usize = 4096;

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_time_limit() -> f64 {
    DEFAULT_TIME_LIMIT
}

fn default_max_grid() -> usize {
    DEFAULT_MAX_GRID
}

fn one() -> f64 {
    1.0
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Rayon worker count; absent means one per core. Results do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Seconds; the run is abandoned (exit 4) past this.
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default)]
    pub constants: ConstantsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: DEFAULT_TRIALS,
            alpha: DEFAULT_ALPHA,
            threads: None,
            time_limit: DEFAULT_TIME_LIMIT,
            ensemble: None,
            constants: ConstantsSection::default(),
            experiment: None,
            output: OutputSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config is always representable in TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Config(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        if !(self.time_limit > 0.0) {
            return Err(CliError::Config(format!("time_limit = {} must be positive", self.time_limit)));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        self.constants.universal().validate().map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Unnamed universal constants. The defaults of 1 are conventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    #[serde(default = "one")]
    pub c_sbp: f64,
    #[serde(default = "one")]
    pub c_be: f64,
    #[serde(default = "one")]
    pub c_abs: f64,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        Self { c_sbp: 1.0, c_be: 1.0, c_abs: 1.0 }
    }
}

impl ConstantsSection {
    pub fn universal(&self) -> UniversalConstants {
        UniversalConstants { c_sbp: self.c_sbp, c_be: self.c_be, c_abs: self.c_abs }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    /// Aligned table; `constants` only.
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Text => "txt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Aspect ratio: `N = round((1 + delta) n)`.
    Delta,
    /// Row fill `a4` of a generated sparse profile.
    RowFill,
    /// `c1` in the event `s_n <= c1 sqrt(N)`.
    Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    CheckConditions {},
    Sample {
        #[serde(default = "one_usize")]
        count: usize,
        /// Binary matrix files instead of CSV (needs `--out`).
        #[serde(default)]
        binary: bool,
    },
    Spectrum {
        #[serde(default = "one_usize")]
        count: usize,
    },
    Constants {},
    TailSweep {
        axis: SweepAxis,
        values: Vec<f64>,
        /// Threshold for the delta and row-fill axes; defaults to `b1`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c1: Option<f64>,
        #[serde(default = "default_max_grid")]
        max_grid: usize,
    },
    SmallBall {
        #[serde(default = "default_dims")]
        dims: Vec<usize>,
        #[serde(default = "default_lambdas")]
        lambdas: Vec<f64>,
        /// Random directions per dimension.
        #[serde(default = "default_configs")]
        configs: usize,
        #[serde(default = "rademacher")]
        shape: ShapeKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default = "one")]
        mu: f64,
        #[serde(default = "three")]
        r: f64,
        #[serde(default = "default_max_grid")]
        max_grid: usize,
    },
    Net {
        n: usize,
        epsilon: f64,
        #[serde(default = "sphere")]
        domain: String,
        #[serde(default)]
        candidates: usize,
        #[serde(default = "default_probe")]
        probe_size: usize,
    },
    Verify {
        /// `epsilon` of the square-matrix check.
        #[serde(default = "default_square_eps")]
        epsilon: f64,
        /// `lambda` of the small-ball check.
        #[serde(default = "half")]
        lambda: f64,
    },
}

fn one_usize() -> usize {
    1
}
fn three() -> f64 {
    3.0
}
fn half() -> f64 {
    0.5
}
fn default_square_eps() -> f64 {
    0.1
}
fn default_dims() -> Vec<usize> {
    vec![4, 8, 16]
}
fn default_lambdas() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75]
}
fn default_configs() -> usize {
    10
}
fn rademacher() -> ShapeKind {
    ShapeKind::Rademacher
}
fn sphere() -> String {
    "sphere".into()
}
fn default_probe() -> usize {
    1_000_000
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::CheckConditions {} => "check-conditions",
            Experiment::Sample { .. } => "sample",
            Experiment::Spectrum { .. } => "spectrum",
            Experiment::Constants {} => "constants",
            Experiment::TailSweep { .. } => "tail-sweep",
            Experiment::SmallBall { .. } => "small-ball",
            Experiment::Net { .. } => "net",
            Experiment::Verify { .. } => "verify",
        }
    }

    /// Parameters used when the config has no `[experiment]` section.
    pub fn default_for(name: &str) -> Experiment {
        match name {
            "check-conditions" => Experiment::CheckConditions {},
            "sample" => Experiment::Sample { count: 1, binary: false },
            "spectrum" => Experiment::Spectrum { count: 1 },
            "constants" => Experiment::Constants {},
            "tail-sweep" => Experiment::TailSweep {
                axis: SweepAxis::Threshold,
                values: vec![0.05, 0.1, 0.2, 0.4],
                c1: None,
                max_grid: DEFAULT_MAX_GRID,
            },
            "small-ball" => Experiment::SmallBall {
                dims: default_dims(),
                lambdas: default_lambdas(),
                configs: default_configs(),
                shape: ShapeKind::Rademacher,
                p: None,
                mu: 1.0,
                r: 3.0,
                max_grid: DEFAULT_MAX_GRID,
            },
            "net" => {
                Experiment::Net { n: 2, epsilon: 0.5, domain: sphere(), candidates: 0, probe_size: default_probe() }
            }
            "verify" => Experiment::Verify { epsilon: default_square_eps(), lambda: half() },
            other => unreachable!("no experiment named {other}"),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Delta => "delta",
            SweepAxis::RowFill => "row-fill",
            SweepAxis::Threshold => "threshold",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 11
trials = 500

[ensemble.shape]
rows = 30
cols = 10

[ensemble.params]
r = 3.0
mu = 1.0
a1 = 4.0
a2 = 1.0
a3 = 0.9
a4 = 0.9

[ensemble.family]
shape = "rademacher"

[ensemble.profile]
kind = "sparse"
seed = 3

[constants]
c_abs = 2.0

[experiment]
kind = "tail-sweep"
axis = "delta"
values = [1.0, 2.0]

[output]
format = "csv"
"#;

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.seed, 11);
        assert_eq!(c.alpha, DEFAULT_ALPHA);
        assert_eq!(c.constants.c_abs, 2.0);
        assert_eq!(c.constants.c_sbp, 1.0);
        assert_eq!(c.experiment.as_ref().unwrap().name(), "tail-sweep");
        let again = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_located() {
        let bad = SAMPLE.replace("values = [1.0, 2.0]", "values = [1.0, 2.0]\nstride = 2");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("stride") && err.contains("line"), "{err}");
        let bad = SAMPLE.replace("seed = 11", "seed = 11\nverbose = true");
        assert!(ExperimentConfig::from_toml(&bad).unwrap_err().to_string().contains("verbose"));
    }

    #[test]
    fn empty_config_is_all_defaults() {
        let c = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn defaults_round_trip() {
        for name in ["check-conditions", "sample", "spectrum", "constants", "tail-sweep", "small-ball", "net", "verify"]
        {
            let e = Experiment::default_for(name);
            assert_eq!(e.name(), name);
            let c = ExperimentConfig { experiment: Some(e), ..ExperimentConfig::default() };
            assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c, "{name}");
        }
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig { trials: 0, ..ExperimentConfig::default() };
        assert!(c.validate().is_err());
        c.trials = 5;
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        c.alpha = 0.05;
        c.constants.c_be = -1.0;
        assert!(c.validate().is_err());
    }
}

//! Entry laws, variance profiles and the analytic checks of conditions (i)-(iv).

mod conditions;
mod family;
mod profile;
mod spec;

use thiserror::Error;

pub use conditions::{check_conditions, ColumnCheck, ConditionReport, MomentCheck, RowCheck};
pub use family::{moment_bound, subgaussian_parameter, DistributionFamily, EntryShape};
pub use profile::{make_sparse_profile, sparse_profile_feasible, VarianceProfile};
pub use spec::{
    sample, EnsembleConfig, EnsembleSpec, FamilyMap, FamilyOverride, FamilySection, MatrixSample, Params,
    ProfileSource, Shape, ShapeKind,
};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("infeasible profile, condition ({condition}) cannot hold: {detail}")]
    Infeasible { condition: &'static str, detail: String },
    #[error("config: {0}")]
    Config(String),
}

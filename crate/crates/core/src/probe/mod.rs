//! Monte Carlo estimators with exact binomial intervals, and exact oracles.
//!
//! Trial `k` of a run with base seed `s` draws everything from
//! `derive_seed(s, k)`. Trials run in parallel but results are gathered in
//! trial order, so every summary is a function of `(spec, seed, trials)`
//! alone and does not depend on the thread count.

mod exact;
mod experiments;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::beta::beta_reg;
use thiserror::Error;

pub use exact::{
    berry_esseen_gap, exact_rademacher_small_ball, paley_zygmund_check, BerryEsseen, Comparison, ExactProbability,
    FiniteDistribution, PaleyZygmund, Summand, ENUMERATION_MAX_DIM, PZ_REL_TOL,
};
pub use experiments::{
    lemma31_verify, mc_column_distance_tail, mc_operator_norm_tail, mc_smallest_sv_tail, second_moment_check,
    smallest_sv_samples, Lemma31Outcome, SecondMoment,
};

use crate::bounds::BoundsError;
use crate::ensemble::{sample, EnsembleSpec, MatrixSample};
use crate::rng::derive_seed;
use crate::spectra::SpectraError;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension {n} exceeds the enumeration limit {limit}")]
    Capacity { n: usize, limit: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// The interval lies on the bound's side.
    Pass,
    /// The bound carries no information (or its hypotheses fail).
    VacuousPass,
    /// The interval straddles the bound: too few trials to decide.
    Inconclusive,
    /// The interval lies entirely past the bound.
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSummary {
    pub event: String,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    /// Clopper-Pearson interval at level `1 - alpha`.
    pub ci: [f64; 2],
    pub alpha: f64,
    pub seed: u64,
    pub vacuous: bool,
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

impl TrialSummary {
    pub fn new(
        event: impl Into<String>,
        trials: u64,
        successes: u64,
        seed: u64,
        alpha: f64,
    ) -> Result<Self, ProbeError> {
        let ci = clopper_pearson(successes, trials, alpha)?;
        Ok(Self {
            event: event.into(),
            trials,
            successes,
            estimate: successes as f64 / trials as f64,
            ci: [ci.0, ci.1],
            alpha,
            seed,
            vacuous: false,
            bound: None,
            verdict: None,
        })
    }

    pub fn ci_low(&self) -> f64 {
        self.ci[0]
    }

    pub fn ci_high(&self) -> f64 {
        self.ci[1]
    }

    /// Checks `P(event) <= bound`: pass when `ci_high <= bound`, fail when
    /// `ci_low > bound`, inconclusive in between. A bound of at least 1, or
    /// one whose theorem hypotheses fail, passes vacuously.
    pub fn against_upper(mut self, bound: f64, hypotheses_hold: bool) -> Self {
        self.vacuous = bound >= 1.0 || !hypotheses_hold;
        self.bound = Some(bound);
        self.verdict = Some(if self.vacuous {
            Verdict::VacuousPass
        } else if self.ci_high() <= bound {
            Verdict::Pass
        } else if self.ci_low() > bound {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        });
        self
    }

    /// Checks `P(event) >= bound`: pass when `ci_low >= bound`, fail when
    /// `ci_high < bound`. A bound of at most 0 passes vacuously.
    pub fn against_lower(mut self, bound: f64) -> Self {
        self.vacuous = bound <= 0.0;
        self.bound = Some(bound);
        self.verdict = Some(if self.vacuous {
            Verdict::VacuousPass
        } else if self.ci_low() >= bound {
            Verdict::Pass
        } else if self.ci_high() < bound {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        });
        self
    }
}

/// Smallest `p` in `[0, 1]` with `beta_reg(a, b, p) >= target`.
fn beta_quantile(a: f64, b: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Exact binomial interval for `x` successes in `n` trials. Interior counts
/// split `alpha` across both tails; at `x = 0` or `x = n` the open side is
/// the one-sided `alpha` bound, `1 - alpha^(1/n)` or `alpha^(1/n)`.
pub fn clopper_pearson(x: u64, n: u64, alpha: f64) -> Result<(f64, f64), ProbeError> {
    if n == 0 {
        return Err(ProbeError::InvalidInput("need at least one trial".into()));
    }
    if x > n {
        return Err(ProbeError::InvalidInput(format!("{x} successes out of {n} trials")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ProbeError::InvalidInput(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let nf = n as f64;
    let xf = x as f64;
    Ok(match x {
        0 => (0.0, 1.0 - alpha.powf(1.0 / nf)),
        _ if x == n => (alpha.powf(1.0 / nf), 1.0),
        _ => {
            let low = beta_quantile(xf, nf - xf + 1.0, alpha / 2.0);
            let high = beta_quantile(xf + 1.0, nf - xf, 1.0 - alpha / 2.0);
            (low.min(xf / nf), high.max(xf / nf))
        }
    })
}

fn check_trials(trials: u64) -> Result<(), ProbeError> {
    if trials == 0 {
        return Err(ProbeError::InvalidInput("trials must be at least 1".into()));
    }
    Ok(())
}

/// `f(trial_seed)` for every trial, in trial order.
pub fn run_trials<T, F>(trials: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    (0..trials).into_par_iter().map(|k| f(derive_seed(seed, k))).collect()
}

/// `f(sample)` over `trials` independent samples of `spec`, in trial order.
pub fn mc_collect<T, F>(spec: &EnsembleSpec, trials: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&MatrixSample) -> T + Sync,
{
    run_trials(trials, seed, |s| f(&sample(spec, s)))
}

pub fn mc_event<F>(
    spec: &EnsembleSpec,
    event: &str,
    trials: u64,
    seed: u64,
    alpha: f64,
    predicate: F,
) -> Result<TrialSummary, ProbeError>
where
    F: Fn(&MatrixSample) -> bool + Sync,
{
    check_trials(trials)?;
    let hits = mc_collect(spec, trials, seed, predicate).into_iter().filter(|&h| h).count() as u64;
    TrialSummary::new(event, trials, hits, seed, alpha)
}

/// Fallible variant of [`mc_event`]; the first failing trial in trial order
/// is reported.
pub fn mc_try_event<F>(
    spec: &EnsembleSpec,
    event: &str,
    trials: u64,
    seed: u64,
    alpha: f64,
    predicate: F,
) -> Result<TrialSummary, ProbeError>
where
    F: Fn(&MatrixSample) -> Result<bool, ProbeError> + Sync,
{
    check_trials(trials)?;
    let mut hits = 0;
    for outcome in mc_collect(spec, trials, seed, predicate) {
        hits += u64::from(outcome?);
    }
    TrialSummary::new(event, trials, hits, seed, alpha)
}

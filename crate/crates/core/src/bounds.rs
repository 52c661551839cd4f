//! Closed-form constants and tail-bound evaluators.
//!
//! Every evaluator reduces the moment exponent to `r0 = min(3, r)`. The
//! unnamed universal constants are inputs ([`UniversalConstants`]) and default
//! to 1; those defaults are conventions, not known values.

use serde::Serialize;
use std::f64::consts::{E, PI};
use std::fmt;
use thiserror::Error;

use crate::ensemble::Params;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("hypothesis `{gate}` is not met ({detail})")]
    Hypothesis { gate: Gate, detail: String },
}

/// Named theorem hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gate {
    /// `delta >= delta0` for tall matrices.
    DeltaAtLeastDelta0,
    /// `a4 > 1 - gamma` for almost square matrices.
    RowFillAboveOneMinusGamma,
    /// `a4 + rho^2 gamma / 2 > 1` for small ball on incompressible vectors.
    RowFillPlusSpreadAboveOne,
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gate::DeltaAtLeastDelta0 => "delta >= delta0",
            Gate::RowFillAboveOneMinusGamma => "a4 > 1 - gamma",
            Gate::RowFillPlusSpreadAboveOne => "a4 + rho^2 gamma / 2 > 1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateVerdict {
    pub gate: Gate,
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl GateVerdict {
    fn strict(gate: Gate, lhs: f64, rhs: f64) -> Self {
        Self { gate, holds: lhs > rhs, lhs, rhs }
    }

    pub fn into_result(self) -> Result<Self, BoundsError> {
        if self.holds {
            Ok(self)
        } else {
            Err(BoundsError::Hypothesis { gate: self.gate, detail: format!("lhs {:e}, rhs {:e}", self.lhs, self.rhs) })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniversalConstants {
    /// Constant of the small-ball proposition.
    pub c_sbp: f64,
    /// Berry-Esseen constant.
    pub c_be: f64,
    /// Absolute constant `c >= 1` inside `c3`.
    pub c_abs: f64,
}

impl Default for UniversalConstants {
    fn default() -> Self {
        Self { c_sbp: 1.0, c_be: 1.0, c_abs: 1.0 }
    }
}

impl UniversalConstants {
    pub fn validate(&self) -> Result<(), BoundsError> {
        for (name, v) in [("c_sbp", self.c_sbp), ("c_be", self.c_be), ("c_abs", self.c_abs)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(BoundsError::InvalidInput(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }
}

pub fn r0(r: f64) -> f64 {
    r.min(3.0)
}

fn invalid(msg: String) -> BoundsError {
    BoundsError::InvalidInput(msg)
}

fn check_r_mu(r: f64, mu: f64) -> Result<(), BoundsError> {
    if !(r > 2.0) {
        return Err(invalid(format!("r = {r} must exceed 2")));
    }
    if !(mu >= 1.0 && mu.is_finite()) {
        return Err(invalid(format!("mu = {mu} must be at least 1")));
    }
    Ok(())
}

fn check_nonneg(name: &str, v: f64) -> Result<(), BoundsError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {v} must be finite and nonnegative")))
    }
}

fn check_pos(name: &str, v: f64) -> Result<(), BoundsError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {v} must be finite and positive")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TallConstants {
    pub r0: f64,
    pub b1: f64,
    pub b2: f64,
}

/// `b1 = a3^4/(2^5 mu^2) q`, `b2 = a3^2/(2^3 mu^2) q` with
/// `q = (a3^2/(2^5 mu^2))^(r0/(r0-2))`.
pub fn prop_tall_constants(r: f64, mu: f64, a3: f64) -> Result<TallConstants, BoundsError> {
    check_r_mu(r, mu)?;
    if !(a3 > 0.0 && a3 <= mu) {
        return Err(invalid(format!("a3 = {a3} must lie in (0, mu]")));
    }
    let r0 = r0(r);
    let base = a3 * a3 / (32.0 * mu * mu);
    let q = base.powf(r0 / (r0 - 2.0));
    Ok(TallConstants { r0, b1: a3.powi(4) / (32.0 * mu * mu) * q, b2: a3 * a3 / (8.0 * mu * mu) * q })
}

pub fn teo_tall_delta0(b1: f64, b2: f64, a1: f64) -> Result<f64, BoundsError> {
    check_pos("b1", b1)?;
    check_pos("b2", b2)?;
    check_pos("a1", a1)?;
    Ok((2.0 / b2 * (6.0 * a1 / b1).ln()).max(2.0 / b2 * 3f64.ln()))
}

pub fn delta_gate(delta: f64, delta0: f64) -> GateVerdict {
    GateVerdict { gate: Gate::DeltaAtLeastDelta0, holds: delta >= delta0, lhs: delta, rhs: delta0 }
}

/// `([A^2 - lambda^2]_+ / (8 mu^2))^(r0/(r0-2))`, a lower bound on
/// `P(|sum xi_i x_i| > lambda)`.
pub fn small_ball_lower(lambda: f64, a_sq: f64, mu: f64, r: f64) -> Result<f64, BoundsError> {
    check_nonneg("lambda", lambda)?;
    check_nonneg("A^2", a_sq)?;
    check_r_mu(r, mu)?;
    let r0 = r0(r);
    let gap = a_sq - lambda * lambda;
    if gap <= 0.0 {
        return Ok(0.0);
    }
    Ok((gap / (8.0 * mu * mu)).powf(r0 / (r0 - 2.0)))
}

fn check_sbp_r(r: f64, mu: f64) -> Result<(), BoundsError> {
    check_r_mu(r, mu)?;
    // The r-norm input is tied to r, so no reduction is possible here.
    if r > 3.0 {
        return Err(invalid(format!("r = {r} must lie in (2, 3] for an r-norm input")));
    }
    Ok(())
}

/// Upper bound on `P(a <= sum xi_i x_i < b)`. `A = 0` returns the vacuous 1.
#[allow(clippy::too_many_arguments)]
pub fn sbp_interval_upper(
    a: f64,
    b: f64,
    big_a: f64,
    x_r_norm: f64,
    mu: f64,
    r: f64,
    u: &UniversalConstants,
) -> Result<f64, BoundsError> {
    check_sbp_r(r, mu)?;
    u.validate()?;
    if !(a <= b) {
        return Err(invalid(format!("need a <= b, got a = {a}, b = {b}")));
    }
    check_nonneg("A", big_a)?;
    check_nonneg("|x|_r", x_r_norm)?;
    if big_a == 0.0 {
        return Ok(1.0);
    }
    Ok((b - a) / ((2.0 * PI).sqrt() * big_a) + u.c_sbp * (x_r_norm * mu / big_a).powf(r))
}

/// Upper bound on `sup_v P(|sum x_i xi_i - v| < t)` through the coordinates in
/// `sigma`. `A_sigma = 0` (e.g. empty `sigma`) returns the vacuous 1.
pub fn sbp_levy_upper(
    t: f64,
    a_sigma: f64,
    proj_r_norm: f64,
    mu: f64,
    r: f64,
    u: &UniversalConstants,
) -> Result<f64, BoundsError> {
    check_sbp_r(r, mu)?;
    u.validate()?;
    check_nonneg("t", t)?;
    check_nonneg("A_sigma", a_sigma)?;
    check_nonneg("|P x|_r", proj_r_norm)?;
    if a_sigma == 0.0 {
        return Ok(1.0);
    }
    Ok(2.0 * t / ((2.0 * PI).sqrt() * a_sigma) + u.c_sbp * (proj_r_norm * mu / a_sigma).powf(r))
}

/// `C = max(sqrt(2/pi), c_sbp)`. With `r <= 3` the interval term picks up
/// `|sigma|^((r-3)/2) <= 1`, so both terms fit under a common prefactor.
pub fn corollary_constant(u: &UniversalConstants) -> f64 {
    (2.0 / PI).sqrt().max(u.c_sbp)
}

/// `C / |sigma|^(r0/2 - 1) (t/A + mu^r0 (B/A)^r0)`.
#[allow(clippy::too_many_arguments)]
pub fn coro_upper(
    t: f64,
    a: f64,
    b: f64,
    card: usize,
    mu: f64,
    r: f64,
    u: &UniversalConstants,
) -> Result<f64, BoundsError> {
    check_r_mu(r, mu)?;
    u.validate()?;
    check_nonneg("t", t)?;
    if !(a > 0.0 && a <= b && b.is_finite()) {
        return Err(invalid(format!("need 0 < A <= B, got A = {a}, B = {b}")));
    }
    if card == 0 {
        return Err(invalid("|sigma| must be at least 1".into()));
    }
    let r0 = r0(r);
    let c = corollary_constant(u);
    Ok(c / (card as f64).powf(r0 / 2.0 - 1.0) * (t / a + mu.powf(r0) * (b / a).powf(r0)))
}

pub fn incomp_gate(a4: f64, rho: f64, gamma: f64) -> GateVerdict {
    GateVerdict::strict(Gate::RowFillPlusSpreadAboveOne, a4 + 0.5 * rho * rho * gamma, 1.0)
}

/// `c (t n^((3-r0)/2) + mu^r0 n^((2-r0)/2))` with
/// `c = C c0^(1-r0/2) max(sqrt2/rho, (2/(rho^2 gamma))^(r0/2))`,
/// `c0 = a4 + rho^2 gamma/2 - 1`.
#[allow(clippy::too_many_arguments)]
pub fn incomp_sbp_upper(
    t: f64,
    n: usize,
    mu: f64,
    r: f64,
    gamma: f64,
    rho: f64,
    a4: f64,
    u: &UniversalConstants,
) -> Result<f64, BoundsError> {
    check_r_mu(r, mu)?;
    u.validate()?;
    check_nonneg("t", t)?;
    if n == 0 {
        return Err(invalid("n must be at least 1".into()));
    }
    for (name, v) in [("gamma", gamma), ("rho", rho)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(invalid(format!("{name} = {v} must lie in (0, 1)")));
        }
    }
    if !(a4 > 0.0 && a4 <= 1.0) {
        return Err(invalid(format!("a4 = {a4} must lie in (0, 1]")));
    }
    incomp_gate(a4, rho, gamma).into_result()?;
    let r0 = r0(r);
    let c0 = a4 - (1.0 - 0.5 * rho * rho * gamma);
    let c = corollary_constant(u)
        * c0.powf(1.0 - r0 / 2.0)
        * (2f64.sqrt() / rho).max((2.0 / (rho * rho * gamma)).powf(r0 / 2.0));
    let n = n as f64;
    Ok(c * (t * n.powf((3.0 - r0) / 2.0) + mu.powf(r0) * n.powf((2.0 - r0) / 2.0)))
}

/// Proof-level choices for the almost square theorem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremConstants {
    pub r0: f64,
    pub b1: f64,
    pub b2: f64,
    pub delta0: f64,
    /// `min(1/4, b1/(5 a1))`.
    pub rho: f64,
    /// `b2 / (4 ln(6e/(rho b2)))`.
    pub gamma: f64,
    /// `c_abs (sqrt(pi)/rho + mu^r0/(rho^r0 a1^(r0-2)))`.
    pub c3: f64,
    /// `(2/(r0-2)) ln(3 a1 c3 e^2)`.
    pub c_tilde_1: f64,
    /// `(gamma + a4 - 1) / (a1^2 (c3 e^2)^(2/(r0-2)))`; may underflow, see `ln_c_tilde_2`.
    pub c_tilde_2: f64,
    pub ln_c_tilde_2: f64,
    /// The square theorem leaves its gamma unnamed; the `gamma` above is used.
    pub gamma0: f64,
    pub a1: f64,
    pub gates: Vec<GateVerdict>,
}

impl TheoremConstants {
    /// `t(delta) = 1/(c3 e^2) (1/(3 a1 c3 e^2))^(1/delta)`.
    pub fn t(&self, delta: f64) -> f64 {
        let k = self.c3 * E * E;
        (-(k.ln()) - (3.0 * self.a1 * k).ln() / delta).exp()
    }

    /// Smallest admissible `delta` at size `n`, `c~1 / ln(c~2 n)`; infinite
    /// when `c~2 n <= 1`.
    pub fn delta_threshold(&self, n: usize) -> f64 {
        let l = self.ln_c_tilde_2 + (n as f64).ln();
        if l <= 0.0 {
            f64::INFINITY
        } else {
            self.c_tilde_1 / l
        }
    }
}

/// `rho` and `gamma` shared by the almost square and square proofs.
fn rho_gamma(tall: &TallConstants, a1: f64) -> (f64, f64) {
    let rho = 0.25f64.min(tall.b1 / (5.0 * a1));
    let gamma = tall.b2 / (4.0 * (6.0 * E / (rho * tall.b2)).ln());
    (rho, gamma)
}

pub fn row_fill_gate(params: &Params) -> Result<GateVerdict, BoundsError> {
    let tall = prop_tall_constants(params.r, params.mu, params.a3)?;
    check_pos("a1", params.a1)?;
    let (_, gamma) = rho_gamma(&tall, params.a1);
    // Decided as gamma > 1 - a4: 1 - gamma rounds to 1 once gamma < 1e-16.
    Ok(GateVerdict {
        gate: Gate::RowFillAboveOneMinusGamma,
        holds: gamma > 1.0 - params.a4,
        lhs: params.a4,
        rhs: 1.0 - gamma,
    })
}

pub fn almost_square_constants(params: &Params, u: &UniversalConstants) -> Result<TheoremConstants, BoundsError> {
    let constants = theorem_constants(params, u)?;
    for g in &constants.gates {
        g.into_result()?;
    }
    Ok(constants)
}

/// [`almost_square_constants`] without enforcing the row-fill gate; its
/// verdict is recorded in `gates`. When it fails `c_tilde_2` is NaN.
pub fn theorem_constants(params: &Params, u: &UniversalConstants) -> Result<TheoremConstants, BoundsError> {
    u.validate()?;
    let (mu, a1, a4) = (params.mu, params.a1, params.a4);
    let tall = prop_tall_constants(params.r, mu, params.a3)?;
    check_pos("a1", a1)?;
    let delta0 = teo_tall_delta0(tall.b1, tall.b2, a1)?;
    let gate = row_fill_gate(params)?;
    let r0 = tall.r0;
    let (rho, gamma) = rho_gamma(&tall, a1);
    let c3 = u.c_abs * (PI.sqrt() / rho + mu.powf(r0) / (rho.powf(r0) * a1.powf(r0 - 2.0)));
    let ln_k = c3.ln() + 2.0;
    let c_tilde_1 = 2.0 / (r0 - 2.0) * ((3.0 * a1).ln() + ln_k);
    // gamma - (1 - a4) keeps full precision when a4 is 1 or close to it.
    let ln_c_tilde_2 = (gamma - (1.0 - a4)).ln() - 2.0 * a1.ln() - 2.0 / (r0 - 2.0) * ln_k;
    Ok(TheoremConstants {
        r0,
        b1: tall.b1,
        b2: tall.b2,
        delta0,
        rho,
        gamma,
        c3,
        c_tilde_1,
        c_tilde_2: ln_c_tilde_2.exp(),
        ln_c_tilde_2,
        gamma0: gamma,
        a1,
        gates: vec![gate],
    })
}

/// `C (eps + n^(1 - r0/2))`.
pub fn square_bound(eps: f64, n: usize, r: f64, c: f64) -> Result<f64, BoundsError> {
    check_nonneg("epsilon", eps)?;
    check_pos("C", c)?;
    if !(r > 2.0) {
        return Err(invalid(format!("r = {r} must exceed 2")));
    }
    if n == 0 {
        return Err(invalid("n must be at least 1".into()));
    }
    Ok(c * (eps + (n as f64).powf(1.0 - r0(r) / 2.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    /// Clamped to `[0, 1]`.
    pub value: f64,
    pub unclamped: f64,
}

/// `(1/(gamma n)) sum_k p_k`.
pub fn invert_via_distance_aggregate(probs: &[f64], gamma: f64) -> Result<Aggregate, BoundsError> {
    if probs.is_empty() {
        return Err(invalid("need at least one probability".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(invalid(format!("probability {p} outside [0, 1]")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    let unclamped = probs.iter().sum::<f64>() / (gamma * probs.len() as f64);
    Ok(Aggregate { value: unclamped.clamp(0.0, 1.0), unclamped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn u() -> UniversalConstants {
        UniversalConstants::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn params(r: f64, mu: f64, a1: f64, a3: f64, a4: f64) -> Params {
        Params { r, mu, a1, a2: 1.0, a3, a4 }
    }

    #[test]
    fn tall_constants_examples() {
        let c = prop_tall_constants(3.0, 1.0, 1.0).unwrap();
        assert!(rel(c.b1, 2f64.powi(-20)) < 1e-12 && rel(c.b2, 2f64.powi(-18)) < 1e-12);
        let c4 = prop_tall_constants(4.0, 1.0, 1.0).unwrap();
        assert_eq!((c4.r0, c4.b1, c4.b2), (3.0, c.b1, c.b2));
        let grid: Vec<TallConstants> =
            (1..50).map(|k| prop_tall_constants(2.5, 2.0, 0.04 * k as f64).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[1].b1 > w[0].b1 && w[1].b2 > w[0].b2));
        assert!(prop_tall_constants(2.0, 1.0, 0.5).is_err());
        assert!(prop_tall_constants(3.0, 0.5, 0.2).is_err());
        assert!(prop_tall_constants(3.0, 2.0, 2.5).is_err());
        assert!(prop_tall_constants(3.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn delta0_examples() {
        let b2 = 0.01;
        assert_eq!(teo_tall_delta0(12.0, b2, 2.0).unwrap(), 2.0 / b2 * 3f64.ln());
        let d = teo_tall_delta0(2f64.powi(-20), 2f64.powi(-18), 2.0).unwrap();
        assert!(rel(d, 2f64.powi(19) * (12.0 * 2f64.powi(20)).ln()) < 1e-14);
        assert!((d - 8.57e6).abs() < 0.01e6);
        let ds: Vec<f64> = (1..20).map(|k| teo_tall_delta0(1e-3, 1e-3 * k as f64, 1.0).unwrap()).collect();
        assert!(ds.windows(2).all(|w| w[1] < w[0]));
        assert!(delta_gate(d, d).holds && !delta_gate(d * 0.999, d).holds);
    }

    #[test]
    fn small_ball_examples() {
        assert_eq!(small_ball_lower(1.0, 1.0, 1.0, 3.0).unwrap(), 0.0);
        assert_eq!(small_ball_lower(2.0, 1.0, 1.0, 3.0).unwrap(), 0.0);
        let v = small_ball_lower(0.5, 1.0, 1.0, 3.0).unwrap();
        assert!(rel(v, (0.75f64 / 8.0).powi(3)) < 1e-15);
        assert!((v - 8.240e-4).abs() < 1e-7);
        assert_eq!(small_ball_lower(0.5, 1.0, 1.0, 5.0).unwrap(), v);
        assert!(small_ball_lower(-0.1, 1.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn interval_and_levy_examples() {
        let v = sbp_interval_upper(-1.0, 1.0, 1.0, 1.0, 1.0, 3.0, &u()).unwrap();
        assert!((v - 1.7979).abs() < 1e-4);
        assert_eq!(sbp_interval_upper(0.3, 0.3, 2.0, 1.0, 1.0, 3.0, &u()).unwrap(), 0.125);
        assert_eq!(sbp_interval_upper(0.0, 1.0, 0.0, 1.0, 1.0, 3.0, &u()).unwrap(), 1.0);
        assert!(sbp_interval_upper(1.0, 0.0, 1.0, 1.0, 1.0, 3.0, &u()).is_err());
        let widths: Vec<f64> =
            (0..10).map(|k| sbp_interval_upper(0.0, 0.1 * k as f64, 1.5, 0.7, 1.2, 2.5, &u()).unwrap()).collect();
        assert!(widths.windows(2).all(|w| w[1] > w[0]));

        assert_eq!(sbp_levy_upper(0.0, 2.0, 1.0, 1.0, 3.0, &u()).unwrap(), 0.125);
        assert_eq!(sbp_levy_upper(0.4, 0.0, 0.0, 1.0, 3.0, &u()).unwrap(), 1.0);
        assert!(sbp_levy_upper(0.4, 1.0, 1.0, 1.0, 3.5, &u()).is_err());
    }

    #[test]
    fn corollary_examples() {
        let c = corollary_constant(&u());
        assert_eq!(c, 1.0);
        let v = coro_upper(0.3, 0.5, 0.5, 4, 1.0, 3.0, &u()).unwrap();
        assert!(rel(v, c / 2.0 * (0.6 + 1.0)) < 1e-15);
        let flat = coro_upper(0.0, 0.25, 0.25, 9, 1.5, 2.5, &u()).unwrap();
        assert!(rel(flat, 1.5f64.powf(2.5) / 9f64.powf(0.25)) < 1e-14);
        assert!(coro_upper(0.1, 0.5, 0.4, 4, 1.0, 3.0, &u()).is_err());
        assert!(coro_upper(0.1, 0.5, 0.5, 0, 1.0, 3.0, &u()).is_err());
    }

    proptest! {
        #[test]
        fn levy_on_flat_vector_below_corollary(
            card in 1usize..200, t in 0.0..3.0f64, a in 0.01..2.0f64, mu in 1.0..3.0f64, r in 2.05..3.0f64, c in 0.1..5.0f64,
        ) {
            let u = UniversalConstants { c_sbp: c, ..UniversalConstants::default() };
            // Flat coordinates a on sigma, unit variances: A_sigma = a sqrt|sigma|.
            let a_sigma = a * (card as f64).sqrt();
            let proj = a * (card as f64).powf(1.0 / r);
            let levy = sbp_levy_upper(t, a_sigma, proj, mu, r, &u).unwrap();
            let coro = coro_upper(t, a, a, card, mu, r, &u).unwrap();
            prop_assert!(levy <= coro * (1.0 + 1e-12), "{} > {}", levy, coro);
        }

        #[test]
        fn small_ball_monotone(l1 in 0.0..2.0f64, l2 in 0.0..2.0f64, a1 in 0.0..4.0f64, a2 in 0.0..4.0f64, m1 in 1.0..3.0f64, m2 in 1.0..3.0f64, r in 2.05..3.0f64) {
            let (lo_l, hi_l) = (l1.min(l2), l1.max(l2));
            let (lo_a, hi_a) = (a1.min(a2), a1.max(a2));
            let (lo_m, hi_m) = (m1.min(m2), m1.max(m2));
            // A^2 <= mu^2 by Lyapunov whenever the moment condition holds.
            let a_sq = hi_a.min(lo_m * lo_m);
            let v = small_ball_lower(lo_l, a_sq, lo_m, r).unwrap();
            prop_assert!(v <= 1.0);
            prop_assert!(small_ball_lower(hi_l, a_sq, lo_m, r).unwrap() <= v);
            prop_assert!(small_ball_lower(lo_l, a_sq, hi_m, r).unwrap() <= v);
            prop_assert!(small_ball_lower(lo_l, lo_a.min(a_sq), lo_m, r).unwrap() <= v);
        }
    }

    #[test]
    fn incompressible_examples() {
        let (gamma, rho): (f64, f64) = (0.5, 0.5);
        let c0: f64 = 0.5 * rho * rho * gamma;
        let c =
            (2.0 / PI).sqrt().max(1.0) * c0.powf(-0.5) * (2f64.sqrt() / rho).max((2.0 / (rho * rho * gamma)).powf(1.5));
        let v = incomp_sbp_upper(0.2, 100, 1.0, 3.0, gamma, rho, 1.0, &u()).unwrap();
        assert!(rel(v, c * (0.2 + 0.1)) < 1e-13);
        // a4 = 0.9, rho^2 gamma = 0.1
        let err = incomp_sbp_upper(0.1, 10, 1.0, 3.0, 0.4, 0.5, 0.9, &u()).unwrap_err();
        assert!(matches!(err, BoundsError::Hypothesis { gate: Gate::RowFillPlusSpreadAboveOne, .. }));
        let ns: Vec<f64> =
            (1..30).map(|n| incomp_sbp_upper(0.0, n * 10, 1.0, 2.5, gamma, rho, 1.0, &u()).unwrap()).collect();
        assert!(ns.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn almost_square_examples() {
        let t = almost_square_constants(&params(3.0, 1.0, 2.0, 1.0, 1.0), &u()).unwrap();
        assert!(rel(t.rho, 2f64.powi(-20) / 10.0) < 1e-14);
        assert!((t.rho - 9.537e-8).abs() < 1e-11);
        assert!(t.gamma > 2.9e-8 && t.gamma < 3.1e-8, "{}", t.gamma);
        assert_eq!(t.gamma0, t.gamma);
        assert!(t.rho <= 0.25 && t.gamma < 1.0 && t.t(5.0) <= 1.0 && t.t(5.0) > 0.0);
        assert!(t.c3 > 0.0 && t.c_tilde_1 > 0.0 && t.c_tilde_2 > 0.0);
        let big = almost_square_constants(&params(3.0, 1.0, 0.01, 1.0, 1.0), &u()).unwrap();
        assert_eq!(big.rho, 0.25f64.min(big.b1 / 0.05));
        // Equality in the t constraint: (3 a1/t)^n (c3 e t)^N = e^-N with N = (1 + delta) n.
        let (delta, n) = (3.0, 1.0);
        let lhs = n * (3.0 * t.a1 / t.t(delta)).ln() + (1.0 + delta) * n * (t.c3 * E * t.t(delta)).ln();
        assert!((lhs + (1.0 + delta) * n).abs() < 1e-9 * lhs.abs());
        assert_eq!(t.delta_threshold(1), f64::INFINITY);
    }

    #[test]
    fn matches_high_precision_fixtures() {
        let cases: serde_json::Value = serde_json::from_str(include_str!("../tests/fixtures/constants.json")).unwrap();
        for case in cases.as_array().unwrap() {
            let i = &case["inputs"];
            let f = |k: &str| i[k].as_f64().unwrap();
            let u = UniversalConstants { c_abs: f("c_abs"), ..UniversalConstants::default() };
            let t = almost_square_constants(&params(f("r"), f("mu"), f("a1"), f("a3"), f("a4")), &u).unwrap();
            let want = &case["expected"];
            let got = [
                ("b1", t.b1),
                ("b2", t.b2),
                ("delta0", t.delta0),
                ("rho", t.rho),
                ("gamma", t.gamma),
                ("c3", t.c3),
                ("c_tilde_1", t.c_tilde_1),
                ("ln_c_tilde_2", t.ln_c_tilde_2),
            ];
            for (k, v) in got {
                let w = want[k].as_f64().unwrap();
                assert!(rel(v, w) <= 1e-12, "{k}: {v} vs {w} at {i}");
            }
            for (d, w) in want["t"].as_object().unwrap() {
                let v = t.t(d.parse().unwrap());
                assert!(rel(v, w.as_f64().unwrap()) <= 1e-12, "t({d}) at {i}");
            }
        }
    }

    #[test]
    fn gates_fire_on_violations() {
        let err = almost_square_constants(&params(3.0, 1.0, 2.0, 1.0, 0.9), &u()).unwrap_err();
        assert!(matches!(err, BoundsError::Hypothesis { gate: Gate::RowFillAboveOneMinusGamma, .. }));
        assert!(!row_fill_gate(&params(3.0, 1.0, 2.0, 1.0, 0.9)).unwrap().holds);
        assert!(row_fill_gate(&params(3.0, 1.0, 2.0, 1.0, 1.0)).unwrap().holds);
        assert!(!incomp_gate(1.0 - 0.05, 0.5, 0.4).holds);
        assert!(!delta_gate(1.0, 2.0).holds);
    }

    #[test]
    fn square_and_aggregate_examples() {
        assert_eq!(square_bound(0.0, 100, 3.0, 2.0).unwrap(), 0.2);
        assert!((square_bound(0.1, 100, 3.0, 1.0).unwrap() - 0.2).abs() < 1e-15);
        let ns: Vec<f64> = (1..50).map(|n| square_bound(0.05, n, 2.5, 1.0).unwrap()).collect();
        assert!(ns.windows(2).all(|w| w[1] < w[0]));

        assert_eq!(invert_via_distance_aggregate(&[0.0; 5], 0.3).unwrap().value, 0.0);
        let g = invert_via_distance_aggregate(&[0.25; 8], 0.25).unwrap();
        assert_eq!((g.value, g.unclamped), (1.0, 1.0));
        let h = invert_via_distance_aggregate(&[0.1, 0.1, 0.2, 0.0], 0.5).unwrap();
        assert!((h.value - 0.2).abs() < 1e-15);
        let over = invert_via_distance_aggregate(&[0.9, 0.9], 0.5).unwrap();
        assert_eq!(over.value, 1.0);
        assert!((over.unclamped - 1.8).abs() < 1e-15);
        assert!(invert_via_distance_aggregate(&[1.1], 0.5).is_err());
    }
}

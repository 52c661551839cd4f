use serde::Serialize;

use super::exact::{exact_rademacher_small_ball, Comparison, ENUMERATION_MAX_DIM};
use super::{check_trials, mc_collect, mc_try_event, run_trials, ProbeError, TrialSummary};
use crate::bounds::small_ball_lower;
use crate::ensemble::{check_conditions, moment_bound, DistributionFamily, EnsembleSpec};
use crate::matrix::norm2;
use crate::rng::stream;
use crate::spectra::{column_distance, operator_norm, smallest_singular};

/// `s_n` of every trial, in trial order.
pub fn smallest_sv_samples(spec: &EnsembleSpec, trials: u64, seed: u64) -> Result<Vec<f64>, ProbeError> {
    check_trials(trials)?;
    mc_collect(spec, trials, seed, |s| smallest_singular(&s.matrix))
        .into_iter()
        .map(|r| r.map_err(ProbeError::from))
        .collect()
}

/// Event `s_n <= c1 sqrt(N)`, together with the sampled `s_n`.
pub fn mc_smallest_sv_tail(
    spec: &EnsembleSpec,
    c1: f64,
    trials: u64,
    seed: u64,
    alpha: f64,
) -> Result<(TrialSummary, Vec<f64>), ProbeError> {
    if !(c1 >= 0.0) {
        return Err(ProbeError::InvalidInput(format!("c1 = {c1} must be nonnegative")));
    }
    let values = smallest_sv_samples(spec, trials, seed)?;
    let threshold = c1 * (spec.rows() as f64).sqrt();
    let hits = values.iter().filter(|&&v| v <= threshold).count() as u64;
    let summary = TrialSummary::new(format!("s_n <= {c1} sqrt(N)"), trials, hits, seed, alpha)?;
    Ok((summary, values))
}

/// Event `|Gamma| > a1 sqrt(N)`.
pub fn mc_operator_norm_tail(
    spec: &EnsembleSpec,
    a1: f64,
    trials: u64,
    seed: u64,
    alpha: f64,
) -> Result<TrialSummary, ProbeError> {
    let threshold = a1 * (spec.rows() as f64).sqrt();
    mc_try_event(spec, &format!("|Gamma| > {a1} sqrt(N)"), trials, seed, alpha, |s| {
        Ok(operator_norm(&s.matrix)? > threshold)
    })
}

/// Event `dist(X_n, H_n) < eps` and `|Gamma| <= a1 sqrt(n)` on a square spec.
pub fn mc_column_distance_tail(
    spec: &EnsembleSpec,
    eps: f64,
    a1: f64,
    trials: u64,
    seed: u64,
    alpha: f64,
) -> Result<TrialSummary, ProbeError> {
    let n = spec.cols();
    if spec.rows() != n {
        return Err(ProbeError::InvalidInput(format!("need a square spec, got {}x{n}", spec.rows())));
    }
    let threshold = a1 * (n as f64).sqrt();
    mc_try_event(spec, &format!("dist(X_n, H_n) < {eps} and |Gamma| <= {a1} sqrt(n)"), trials, seed, alpha, |s| {
        if column_distance(&s.matrix, n - 1)? >= eps {
            return Ok(false);
        }
        Ok(operator_norm(&s.matrix)? <= threshold)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondMoment {
    /// Empirical mean of `|Gamma x|^2`.
    pub mean: f64,
    /// `sum_i (sum_j sigma_ji^2) x_i^2`.
    pub analytic: f64,
    pub z: f64,
    /// `a3^2 N` when the spec meets the column condition.
    pub column_floor: Option<f64>,
}

pub fn second_moment_check(spec: &EnsembleSpec, x: &[f64], trials: u64, seed: u64) -> Result<SecondMoment, ProbeError> {
    if trials < 100 {
        return Err(ProbeError::InvalidInput(format!("need at least 100 trials, got {trials}")));
    }
    if x.len() != spec.cols() {
        return Err(ProbeError::InvalidInput(format!(
            "x has {} coordinates, spec has {} columns",
            x.len(),
            spec.cols()
        )));
    }
    if (norm2(x) - 1.0).abs() > 1e-9 {
        return Err(ProbeError::InvalidInput("x must be a unit vector".into()));
    }
    let sums = spec.profile().column_sums();
    let analytic: f64 = sums.iter().zip(x).map(|(s, v)| s * v * v).sum();
    let report = check_conditions(spec);
    let column_floor = report.cond_iii.passes.then_some(report.cond_iii.threshold);
    if let Some(floor) = column_floor {
        assert!(analytic >= floor * (1.0 - 1e-9), "second moment {analytic} below a3^2 N = {floor}");
    }

    let values = mc_collect(spec, trials, seed, |s| norm2(&s.matrix.mul_vec(x)).powi(2));
    let t = trials as f64;
    let mean = values.iter().sum::<f64>() / t;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (t - 1.0);
    let se = (var / t).sqrt();
    let z = if se > 0.0 { (mean - analytic) / se } else { 0.0 };
    Ok(SecondMoment { mean, analytic, z, column_floor })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma31Outcome {
    /// Exact or estimated `P(|sum xi_i x_i| > lambda)`.
    pub probability: f64,
    pub exact: bool,
    /// Monte Carlo runs only.
    pub summary: Option<TrialSummary>,
    pub bound: f64,
    pub holds: bool,
    /// Exact probability or `ci_low`, minus the bound.
    pub slack: f64,
}

/// Compares `P(|sum xi_i x_i| > lambda)` with the small-ball lower bound.
/// Exact for Rademacher (or zero) coordinates with `n <= 20`, Monte Carlo
/// with `trials` draws otherwise.
#[allow(clippy::too_many_arguments)]
pub fn lemma31_verify(
    x: &[f64],
    families: &[DistributionFamily],
    lambda: f64,
    mu: f64,
    r: f64,
    trials: u64,
    seed: u64,
    alpha: f64,
) -> Result<Lemma31Outcome, ProbeError> {
    if x.len() != families.len() || x.is_empty() {
        return Err(ProbeError::InvalidInput(format!("{} coordinates but {} families", x.len(), families.len())));
    }
    let threshold = mu.powf(r);
    for f in families {
        f.validate().map_err(|e| ProbeError::InvalidInput(e.to_string()))?;
        let m = moment_bound(f, r).map_err(|e| ProbeError::InvalidInput(e.to_string()))?;
        if m > threshold * (1.0 + 1e-12) {
            return Err(ProbeError::Precondition(format!("E|xi|^r = {m} exceeds mu^r = {threshold}")));
        }
    }
    let a_sq: f64 = families.iter().zip(x).map(|(f, v)| f.variance() * v * v).sum();
    let bound = small_ball_lower(lambda, a_sq, mu, r)?;

    let scales: Option<Vec<f64>> = families
        .iter()
        .zip(x)
        .map(|(f, v)| match f {
            DistributionFamily::Rademacher { scale } => Some(scale * v),
            DistributionFamily::Zero => Some(0.0),
            _ => None,
        })
        .collect();
    if let Some(y) = scales.filter(|y| y.len() <= ENUMERATION_MAX_DIM) {
        let p = exact_rademacher_small_ball(&y, lambda, Comparison::Greater)?.value;
        return Ok(Lemma31Outcome {
            probability: p,
            exact: true,
            summary: None,
            bound,
            holds: p >= bound,
            slack: p - bound,
        });
    }

    check_trials(trials)?;
    let hits = run_trials(trials, seed, |s| {
        let mut rng = stream(s, 0);
        let sum: f64 = families.iter().zip(x).map(|(f, v)| f.sample(&mut rng) * v).sum();
        sum.abs() > lambda
    })
    .into_iter()
    .filter(|&h| h)
    .count() as u64;
    let summary =
        TrialSummary::new(format!("|sum xi_i x_i| > {lambda}"), trials, hits, seed, alpha)?.against_lower(bound);
    let low = summary.ci_low();
    Ok(Lemma31Outcome {
        probability: summary.estimate,
        exact: false,
        holds: low >= bound,
        slack: low - bound,
        bound,
        summary: Some(summary),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{EntryShape, FamilyMap, Params, VarianceProfile};
    use crate::probe::{mc_event, Verdict};
    use rand::Rng;

    fn params() -> Params {
        Params { r: 3.0, mu: 2.0, a1: 4.0, a2: 1.0, a3: 1.0, a4: 1.0 }
    }

    fn gaussian(rows: usize, cols: usize) -> EnsembleSpec {
        EnsembleSpec::homogeneous(rows, cols, EntryShape::Gaussian, 1.0, params()).unwrap()
    }

    #[test]
    fn smallest_sv_tail_extremes() {
        let spec = gaussian(30, 5);
        let (none, values) = mc_smallest_sv_tail(&spec, 0.0, 200, 1, 0.05).unwrap();
        assert_eq!(none.successes, 0);
        let top = values.iter().copied().fold(0.0, f64::max) / 30f64.sqrt();
        let (all, _) = mc_smallest_sv_tail(&spec, top * 1.01, 200, 1, 0.05).unwrap();
        assert_eq!(all.estimate, 1.0);
    }

    #[test]
    fn operator_norm_tail_examples() {
        let spec = EnsembleSpec::homogeneous(50, 50, EntryShape::Rademacher, 1.0, params()).unwrap();
        assert_eq!(mc_operator_norm_tail(&spec, 0.0, 20, 2, 0.05).unwrap().estimate, 1.0);
        assert_eq!(mc_operator_norm_tail(&spec, 4.0, 200, 2, 0.05).unwrap().successes, 0);
        let zero = EnsembleSpec::new(
            VarianceProfile::constant(6, 4, 0.0).unwrap(),
            FamilyMap::uniform(EntryShape::Gaussian),
            Params { a3: 0.1, ..params() },
        )
        .unwrap();
        assert_eq!(mc_operator_norm_tail(&zero, 1e-9, 20, 2, 0.05).unwrap().successes, 0);
    }

    #[test]
    fn column_distance_tail_examples() {
        let spec = gaussian(20, 20);
        assert_eq!(mc_column_distance_tail(&spec, 0.0, 10.0, 200, 3, 0.05).unwrap().successes, 0);
        assert_eq!(mc_column_distance_tail(&spec, 1e9, 1e9, 200, 3, 0.05).unwrap().estimate, 1.0);
        assert!(mc_column_distance_tail(&gaussian(21, 20), 0.1, 1.0, 10, 3, 0.05).is_err());
    }

    #[test]
    fn second_moment_examples() {
        let spec = gaussian(12, 4);
        let mut e1 = vec![0.0; 4];
        e1[0] = 1.0;
        let s = second_moment_check(&spec, &e1, 4000, 4).unwrap();
        assert_eq!(s.analytic, 12.0);
        assert_eq!(s.column_floor, Some(12.0));
        assert!(s.z.abs() < 5.0, "{s:?}");
        let mut rows = vec![vec![1.0; 4]; 12];
        rows[3][2] = 4.0;
        let uneven = EnsembleSpec::new(
            VarianceProfile::from_rows(&rows).unwrap(),
            FamilyMap::uniform(EntryShape::Uniform),
            params(),
        )
        .unwrap();
        let x = [0.5, 0.5, 0.5, 0.5];
        let s = second_moment_check(&uneven, &x, 4000, 4).unwrap();
        assert!((s.analytic - (12.0 + 0.25 * 3.0)).abs() < 1e-12);
        assert!(s.z.abs() < 5.0);
        assert!(second_moment_check(&spec, &e1, 99, 4).is_err());
    }

    #[test]
    fn small_ball_examples() {
        let h = 0.5f64.sqrt();
        let rad = DistributionFamily::Rademacher { scale: 1.0 };
        let o = lemma31_verify(&[h, h], &[rad, rad], 0.5, 1.0, 3.0, 0, 0, 0.05).unwrap();
        assert!(o.exact && o.probability == 0.5 && o.holds);
        assert!((o.bound - 8.24e-4).abs() < 1e-6);
        let o = lemma31_verify(&[h, h], &[rad, rad], 1.0, 1.0, 3.0, 0, 0, 0.05).unwrap();
        // A^2 = 2 h^2 exceeds 1 by one ulp.
        assert!(o.bound < 1e-40 && o.holds);
        let g = DistributionFamily::Gaussian { sd: 1.0 };
        let o = lemma31_verify(&[h, h], &[g, g], 0.5, 1.2, 3.0, 2000, 5, 0.05).unwrap();
        assert!(!o.exact && o.holds);
        // P(|N(0,1)| > 0.5) = 0.617
        assert!((o.probability - 0.617).abs() < 0.04);
        assert_eq!(o.summary.unwrap().verdict, Some(Verdict::Pass));
        assert!(matches!(lemma31_verify(&[1.0], &[g], 0.5, 1.0, 3.0, 10, 5, 0.05), Err(ProbeError::Precondition(_))));
    }

    #[test]
    fn enumeration_agrees_with_monte_carlo() {
        // A one-column spec turns each sample into a Rademacher vector.
        let mut rng = stream(77, 0);
        let mut inside = 0;
        for k in 0..100u64 {
            let n = rng.random_range(2..=12usize);
            let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let lam = rng.random::<f64>() * x.iter().map(|v| v.abs()).sum::<f64>();
            let exact = exact_rademacher_small_ball(&x, lam, Comparison::Less).unwrap().value;
            let spec =
                EnsembleSpec::homogeneous(n, 1, EntryShape::Rademacher, 1.0, Params { a4: 1.0, ..params() }).unwrap();
            let mc = mc_event(&spec, "small ball", 2000, k, 0.01, |s| {
                (0..n).map(|j| s.matrix[(j, 0)] * x[j]).sum::<f64>().abs() < lam
            })
            .unwrap();
            inside += usize::from(mc.ci_low() <= exact && exact <= mc.ci_high());
        }
        // 99% intervals: a handful of misses is expected, many is a bug.
        assert!(inside >= 95, "{inside} of 100");
    }
}

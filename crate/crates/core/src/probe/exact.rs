use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::factorial::ln_binomial;

use super::ProbeError;
use crate::ensemble::{moment_bound, DistributionFamily};

/// Largest `n` for `2^n` sign enumeration.
pub const ENUMERATION_MAX_DIM: usize = 20;
/// Relative slack when comparing the two exact sides of Paley-Zygmund.
pub const PZ_REL_TOL: f64 = 1e-12;
const MAX_ATOMS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteDistribution {
    atoms: Vec<(f64, f64)>,
}

impl FiniteDistribution {
    /// `(value, probability)` pairs; probabilities must sum to 1 within 1e-12.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self, ProbeError> {
        if atoms.is_empty() {
            return Err(ProbeError::InvalidInput("distribution needs at least one atom".into()));
        }
        if let Some(&(v, p)) = atoms.iter().find(|(v, p)| !v.is_finite() || !(*p >= 0.0)) {
            return Err(ProbeError::InvalidInput(format!("bad atom ({v}, {p})")));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(ProbeError::InvalidInput(format!("probabilities sum to {total}")));
        }
        Ok(Self { atoms })
    }

    pub fn rademacher(scale: f64) -> Self {
        Self { atoms: vec![(-scale, 0.5), (scale, 0.5)] }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(v, p)| v * p).sum()
    }

    /// `E|f|^p`.
    pub fn abs_moment(&self, p: f64) -> f64 {
        self.atoms.iter().map(|(v, q)| q * v.abs().powf(p)).sum()
    }

    pub fn prob_greater(&self, lambda: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 > lambda).map(|a| a.1).sum()
    }

    /// `Some(s)` for the symmetric two-point law on `{-s, s}`.
    fn rademacher_scale(&self) -> Option<f64> {
        match self.atoms.as_slice() {
            [(a, p), (b, q)] if *p == 0.5 && *q == 0.5 && *a == -*b && *a != 0.0 => Some(a.abs()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    /// `|S| > lambda`
    Greater,
    /// `|S| < lambda`
    Less,
    /// `|S| <= lambda`
    LessEq,
}

impl Comparison {
    fn test(self, s: f64, lambda: f64) -> bool {
        match self {
            Self::Greater => s > lambda,
            Self::Less => s < lambda,
            Self::LessEq => s <= lambda,
        }
    }
}

/// `count / total` with `total = 2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactProbability {
    pub count: u64,
    pub total: u64,
    pub value: f64,
}

/// `P(|sum eps_i x_i| op lambda)` over all `2^n` sign patterns.
pub fn exact_rademacher_small_ball(x: &[f64], lambda: f64, op: Comparison) -> Result<ExactProbability, ProbeError> {
    let n = x.len();
    if n == 0 {
        return Err(ProbeError::InvalidInput("empty vector".into()));
    }
    if n > ENUMERATION_MAX_DIM {
        return Err(ProbeError::Capacity { n, limit: ENUMERATION_MAX_DIM });
    }
    if x.iter().any(|v| !v.is_finite()) || !lambda.is_finite() {
        return Err(ProbeError::InvalidInput("non-finite input".into()));
    }
    // The first sign is fixed to +; flipping every sign negates the sum
    // exactly, so each pattern stands for two.
    let mut count = 0u64;
    for mask in 0u64..1 << (n - 1) {
        let mut s = x[0];
        for (k, v) in x.iter().enumerate().skip(1) {
            s += if mask >> (k - 1) & 1 == 1 { -v } else { *v };
        }
        count += u64::from(op.test(s.abs(), lambda));
    }
    let total = 1u64 << n;
    Ok(ExactProbability { count: 2 * count, total, value: (2 * count) as f64 / total as f64 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Summand {
    Finite(FiniteDistribution),
    Gaussian { sd: f64 },
}

impl Summand {
    fn variance(&self) -> f64 {
        match self {
            Summand::Finite(d) => {
                let m = d.mean();
                d.atoms.iter().map(|(v, p)| p * (v - m) * (v - m)).sum()
            }
            Summand::Gaussian { sd } => sd * sd,
        }
    }

    fn abs_moment(&self, r: f64) -> f64 {
        match self {
            Summand::Finite(d) => d.abs_moment(r),
            Summand::Gaussian { sd } => moment_bound(&DistributionFamily::Gaussian { sd: *sd }, r).unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerryEsseen {
    /// `sup_t |F(t) - Phi(t)|` for the normalized sum.
    pub gap: f64,
    /// Where the sup is attained, in normalized units.
    pub argsup: f64,
    pub sigma: f64,
    /// `sum_k E|zeta_k|^r`.
    pub moment_sum: f64,
    /// `gap sigma^r / moment_sum`.
    pub ratio: f64,
}

/// Exact distance between the law of `sum zeta_k / sigma` and the standard
/// normal. Step CDFs are compared at both one-sided limits of every atom and
/// at `t_grid`; a Gaussian component makes the CDF continuous and only
/// `t_grid` is used.
pub fn berry_esseen_gap(summands: &[Summand], t_grid: &[f64], r: f64) -> Result<BerryEsseen, ProbeError> {
    if summands.is_empty() {
        return Err(ProbeError::InvalidInput("no summands".into()));
    }
    if !(r > 2.0) {
        return Err(ProbeError::InvalidInput(format!("r = {r} must exceed 2")));
    }
    let var: f64 = summands.iter().map(Summand::variance).sum();
    if !(var > 0.0) {
        return Err(ProbeError::InvalidInput("total variance is zero".into()));
    }
    let sigma = var.sqrt();
    let moment_sum: f64 = summands.iter().map(|s| s.abs_moment(r)).sum();
    let phi = Normal::standard();
    let mean: f64 = summands
        .iter()
        .map(|s| match s {
            Summand::Finite(d) => d.mean(),
            Summand::Gaussian { .. } => 0.0,
        })
        .sum();

    let (gap, argsup) = if let Some(scale) = equal_rademacher(summands) {
        binomial_gap(summands.len(), scale, sigma, t_grid, &phi)
    } else {
        let mut atoms = vec![(0.0, 1.0)];
        let mut gauss_var = 0.0;
        for s in summands {
            match s {
                Summand::Finite(d) => atoms = convolve(&atoms, &d.atoms)?,
                Summand::Gaussian { sd } => gauss_var += sd * sd,
            }
        }
        // Center so that the comparison is with a mean-zero normal.
        for a in &mut atoms {
            a.0 = (a.0 - mean) / sigma;
        }
        if gauss_var > 0.0 {
            mixture_gap(&atoms, gauss_var.sqrt() / sigma, t_grid, &phi)
        } else {
            step_gap(&atoms, t_grid, &phi)
        }
    };
    Ok(BerryEsseen { gap, argsup, sigma, moment_sum, ratio: gap * sigma.powf(r) / moment_sum })
}

fn equal_rademacher(summands: &[Summand]) -> Option<f64> {
    let mut scale = None;
    for s in summands {
        let Summand::Finite(d) = s else { return None };
        let c = d.rademacher_scale()?;
        if *scale.get_or_insert(c) != c {
            return None;
        }
    }
    scale
}

/// Sorted, merged atoms of the sum of two independent finite laws.
fn convolve(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<Vec<(f64, f64)>, ProbeError> {
    if a.len() * b.len() > MAX_ATOMS {
        return Err(ProbeError::Capacity { n: a.len() * b.len(), limit: MAX_ATOMS });
    }
    let mut out: Vec<(f64, f64)> =
        a.iter().flat_map(|&(u, p)| b.iter().map(move |&(v, q)| (u + v, p * q))).filter(|a| a.1 > 0.0).collect();
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(out.len());
    for (v, p) in out {
        match merged.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => merged.push((v, p)),
        }
    }
    Ok(merged)
}

fn update(best: &mut (f64, f64), gap: f64, t: f64) {
    if gap > best.0 {
        *best = (gap, t);
    }
}

/// Sorted atoms of a step CDF against `Phi`.
fn step_gap(atoms: &[(f64, f64)], t_grid: &[f64], phi: &Normal) -> (f64, f64) {
    let mut best = (0.0, 0.0);
    let mut below = 0.0;
    for &(t, p) in atoms {
        let pt = phi.cdf(t);
        update(&mut best, (below - pt).abs(), t);
        below += p;
        update(&mut best, (below - pt).abs(), t);
    }
    for &t in t_grid {
        let idx = atoms.partition_point(|a| a.0 <= t);
        let f: f64 = atoms[..idx].iter().map(|a| a.1).sum();
        update(&mut best, (f - phi.cdf(t)).abs(), t);
    }
    best
}

fn mixture_gap(atoms: &[(f64, f64)], sd: f64, t_grid: &[f64], phi: &Normal) -> (f64, f64) {
    let mut best = (0.0, 0.0);
    for &t in t_grid {
        let f: f64 = atoms.iter().map(|&(a, p)| p * phi.cdf((t - a) / sd)).sum();
        update(&mut best, (f - phi.cdf(t)).abs(), t);
    }
    best
}

/// `n` equal Rademacher summands: the sum is `s (2K - n)` with `K ~ Bin(n, 1/2)`.
fn binomial_gap(n: usize, scale: f64, sigma: f64, t_grid: &[f64], phi: &Normal) -> (f64, f64) {
    let ln_half = n as f64 * 0.5f64.ln();
    let atoms: Vec<(f64, f64)> = (0..=n)
        .map(|k| {
            let t = scale * (2.0 * k as f64 - n as f64) / sigma;
            (t, (ln_binomial(n as u64, k as u64) + ln_half).exp())
        })
        .collect();
    step_gap(&atoms, t_grid, phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PaleyZygmund {
    /// `P(f > lambda)`.
    pub lhs: f64,
    /// `(E f^2 - lambda^2)^q / (E f^(2p))^(q/p)`.
    pub rhs: f64,
    pub holds: bool,
}

pub fn paley_zygmund_check(dist: &FiniteDistribution, lambda: f64, p: f64) -> Result<PaleyZygmund, ProbeError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(ProbeError::InvalidInput(format!("p = {p} must exceed 1")));
    }
    if dist.atoms.iter().any(|a| a.0 < 0.0) {
        return Err(ProbeError::Precondition("f must be nonnegative".into()));
    }
    let m2 = dist.abs_moment(2.0);
    if !(lambda >= 0.0 && lambda <= m2.sqrt()) {
        return Err(ProbeError::Precondition(format!(
            "lambda = {lambda} outside [0, sqrt(E f^2)] = [0, {}]",
            m2.sqrt()
        )));
    }
    let q = p / (p - 1.0);
    let lhs = dist.prob_greater(lambda);
    let rhs = (m2 - lambda * lambda).max(0.0).powf(q) / dist.abs_moment(2.0 * p).powf(q / p);
    Ok(PaleyZygmund { lhs, rhs, holds: lhs >= rhs * (1.0 - PZ_REL_TOL) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn enumeration_examples() {
        let h = 0.5f64.sqrt();
        let p = exact_rademacher_small_ball(&[h, h], 0.5, Comparison::Greater).unwrap();
        assert_eq!((p.count, p.total, p.value), (2, 4, 0.5));
        assert_eq!(exact_rademacher_small_ball(&[1.0, 0.0, 0.0], 0.0, Comparison::Greater).unwrap().value, 1.0);
        let mut rng = stream(5, 0);
        for n in 1..=14 {
            let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let l1: f64 = x.iter().map(|v| v.abs()).sum();
            assert_eq!(exact_rademacher_small_ball(&x, l1, Comparison::Greater).unwrap().count, 0);
            let lam = 0.3 * l1;
            let gt = exact_rademacher_small_ball(&x, lam, Comparison::Greater).unwrap().count;
            let le = exact_rademacher_small_ball(&x, lam, Comparison::LessEq).unwrap().count;
            assert_eq!(gt + le, 1 << n);
        }
        assert!(matches!(
            exact_rademacher_small_ball(&[0.1; 21], 0.0, Comparison::Less),
            Err(ProbeError::Capacity { n: 21, limit: 20 })
        ));
    }

    #[test]
    fn enumeration_matches_naive_all_signs() {
        let mut rng = stream(6, 0);
        for n in 1..=10usize {
            let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let lam = rng.random::<f64>();
            let naive = (0u64..1 << n)
                .filter(|m| {
                    let s: f64 = (0..n).map(|k| if m >> k & 1 == 1 { -x[k] } else { x[k] }).sum();
                    s.abs() < lam
                })
                .count() as u64;
            assert_eq!(exact_rademacher_small_ball(&x, lam, Comparison::Less).unwrap().count, naive);
        }
    }

    fn rad(n: usize) -> Vec<Summand> {
        vec![Summand::Finite(FiniteDistribution::rademacher(1.0)); n]
    }

    #[test]
    fn single_rademacher_gap() {
        let be = berry_esseen_gap(&rad(1), &[0.0], 3.0).unwrap();
        let phi_m1 = Normal::standard().cdf(-1.0);
        assert!((be.gap - (0.5 - phi_m1)).abs() < 1e-15);
        assert!((be.gap - 0.3413).abs() < 1e-4);
        assert_eq!(be.ratio, be.gap);
    }

    #[test]
    fn binomial_path_matches_convolution() {
        // Scale 1 sums are small integers, so convolution is exact as well.
        let grid: Vec<f64> = (-30..=30).map(|k| f64::from(k) * 0.1).collect();
        for n in [2, 7, 30] {
            let fast = berry_esseen_gap(&rad(n), &grid, 3.0).unwrap();
            let mut atoms = vec![(0.0, 1.0)];
            for _ in 0..n {
                atoms = convolve(&atoms, &[(-1.0, 0.5), (1.0, 0.5)]).unwrap();
            }
            atoms.iter_mut().for_each(|a| a.0 /= (n as f64).sqrt());
            let slow = step_gap(&atoms, &grid, &Normal::standard());
            assert!((fast.gap - slow.0).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn rademacher_gap_rate_and_symmetry() {
        let mut ratios = vec![];
        for n in [25usize, 100, 400] {
            let be = berry_esseen_gap(&rad(n), &[], 3.0).unwrap();
            assert!(be.gap <= 0.8 / (n as f64).sqrt());
            ratios.push(be.ratio);
        }
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi / lo <= 2.0, "{ratios:?}");
        // Atom at 0 carries mass C(100,50)/2^100 = 0.0796; half of it is the gap.
        assert!((berry_esseen_gap(&rad(100), &[], 3.0).unwrap().gap - 0.0398).abs() < 1e-3);

        // F(-t-) = 1 - F(t) away from atoms.
        let n = 9;
        let sigma = 3.0;
        let pmf: Vec<f64> = (0..=n).map(|k| (ln_binomial(n, k) + n as f64 * 0.5f64.ln()).exp()).collect();
        let cdf = |t: f64, strict: bool| -> f64 {
            (0..=n)
                .filter(|&k| {
                    let a = (2.0 * k as f64 - n as f64) / sigma;
                    if strict {
                        a < t
                    } else {
                        a <= t
                    }
                })
                .map(|k| pmf[k as usize])
                .sum()
        };
        for t in [0.05, 0.5, 0.77, 1.3] {
            assert!((cdf(-t, true) - (1.0 - cdf(t, false))).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_summands_have_no_gap() {
        let grid: Vec<f64> = (-40..=40).map(|k| f64::from(k) * 0.1).collect();
        let be = berry_esseen_gap(&[Summand::Gaussian { sd: 1.0 }, Summand::Gaussian { sd: 2.0 }], &grid, 3.0).unwrap();
        assert!(be.gap < 1e-15);
        let mixed = vec![Summand::Gaussian { sd: 1.0 }, Summand::Finite(FiniteDistribution::rademacher(1.0))];
        let be = berry_esseen_gap(&mixed, &grid, 3.0).unwrap();
        assert!(be.gap > 0.0 && be.gap < 0.1);
        assert!(berry_esseen_gap(&[Summand::Gaussian { sd: 0.0 }], &grid, 3.0).is_err());
    }

    #[test]
    fn paley_zygmund_examples() {
        let one = FiniteDistribution::new(vec![(1.0, 1.0)]).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let c = paley_zygmund_check(&one, 0.0, p).unwrap();
            assert!(c.holds && c.lhs == 1.0 && (c.rhs - 1.0).abs() < 1e-15);
            let edge = paley_zygmund_check(&one, 1.0, p).unwrap();
            assert!(edge.holds && edge.rhs == 0.0);
        }
        let two = FiniteDistribution::new(vec![(0.0, 0.5), (2.0, 0.5)]).unwrap();
        let c = paley_zygmund_check(&two, 1.0, 2.0).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (0.5, 0.125, true));
        assert!(matches!(paley_zygmund_check(&two, 1.5, 2.0), Err(ProbeError::Precondition(_))));
        let neg = FiniteDistribution::new(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        assert!(paley_zygmund_check(&neg, 0.0, 2.0).is_err());
        assert!(FiniteDistribution::new(vec![(1.0, 0.5)]).is_err());
    }
}

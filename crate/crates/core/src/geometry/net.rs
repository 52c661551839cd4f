//! Finite epsilon-nets of the unit sphere and ball in low dimension.
//!
//! Points come from a greedy farthest-point pass over a quasi-random candidate
//! cloud. Coverage is then checked on an independent probe cloud; a net is
//! only returned once every probe point lies within `epsilon` of it.

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use std::fmt::Write as _;
use std::str::FromStr;

use super::GeometryError;
use crate::matrix::norm2;
use crate::rng::stream;

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
/// Largest dimension for which nets are built.
pub const NET_MAX_DIM: usize = 6;
const ATTEMPTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NetDomain {
    Sphere,
    Ball,
}

impl FromStr for NetDomain {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sphere" => Ok(Self::Sphere),
            "ball" => Ok(Self::Ball),
            other => Err(GeometryError::InvalidInput(format!("unknown net domain `{other}` (sphere or ball)"))),
        }
    }
}

impl std::fmt::Display for NetDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Sphere => "sphere",
            Self::Ball => "ball",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetOptions {
    /// Initial candidate cloud size; 0 picks a size from `n` and `epsilon`.
    pub candidates: usize,
    pub probe_size: usize,
    pub seed: u64,
}

impl Default for NetOptions {
    fn default() -> Self {
        Self { candidates: 0, probe_size: 1_000_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetReport {
    pub n: usize,
    pub epsilon: f64,
    pub domain: NetDomain,
    pub points: Vec<Vec<f64>>,
    pub probe_size: usize,
    /// Largest distance from a probe point to its nearest net point.
    pub max_probe_distance: f64,
    /// `(1 + 2/epsilon)^n`.
    pub volumetric_bound: f64,
}

impl NetReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# n={}", self.n);
        let _ = writeln!(out, "# epsilon={}", self.epsilon);
        let _ = writeln!(out, "# domain={}", self.domain);
        let _ = writeln!(out, "# probe_size={}", self.probe_size);
        let _ = writeln!(out, "# max_probe_distance={:?}", self.max_probe_distance);
        let _ = writeln!(out, "# volumetric_bound={:?}", self.volumetric_bound);
        let header: Vec<String> = (1..=self.n).map(|k| format!("x{k}")).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// `count` points of the Halton sequence in `dim` dimensions starting at
/// `start`, each coordinate shifted by `shift` modulo 1.
fn halton(dim: usize, start: u64, count: usize, shift: &[f64]) -> impl Iterator<Item = Vec<f64>> + '_ {
    (0..count as u64).map(move |k| {
        (0..dim)
            .map(|d| {
                let u = (radical_inverse(start + k, PRIMES[d]) + shift[d]).fract();
                u.clamp(1e-15, 1.0 - 1e-15)
            })
            .collect()
    })
}

/// Maps unit-cube points onto the domain: normalized Gaussians for the
/// sphere, the first `n` coordinates of the sphere in `n + 2` for the ball.
fn cloud(n: usize, domain: NetDomain, start: u64, count: usize, shift: &[f64]) -> Vec<Vec<f64>> {
    let normal = Normal::standard();
    let dim = match domain {
        NetDomain::Sphere => n,
        NetDomain::Ball => n + 2,
    };
    halton(dim, start, count, shift)
        .filter_map(|u| {
            let g: Vec<f64> = u.iter().map(|&p| normal.inverse_cdf(p)).collect();
            let norm = norm2(&g);
            (norm > 0.0).then(|| g[..n].iter().map(|v| v / norm).collect())
        })
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn farthest_point(candidates: &[Vec<f64>], first: Vec<f64>, radius: f64) -> Vec<Vec<f64>> {
    let mut net = vec![first];
    let mut nearest: Vec<f64> = candidates.iter().map(|c| dist(c, &net[0])).collect();
    loop {
        let (k, &d) = nearest.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
        if d <= radius {
            return net;
        }
        let p = candidates[k].clone();
        for (c, best) in candidates.iter().zip(nearest.iter_mut()) {
            *best = best.min(dist(c, &p));
        }
        net.push(p);
    }
}

fn coverage(net: &[Vec<f64>], probes: &[Vec<f64>]) -> f64 {
    use rayon::prelude::*;
    probes.par_iter().map(|p| net.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min)).reduce(|| 0.0, f64::max)
}

pub fn build_net(n: usize, epsilon: f64, domain: NetDomain, options: NetOptions) -> Result<NetReport, GeometryError> {
    if n == 0 || n > NET_MAX_DIM {
        return Err(GeometryError::InvalidInput(format!("net dimension must lie in 1..={NET_MAX_DIM}, got {n}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(GeometryError::InvalidInput(format!("epsilon = {epsilon} must be positive")));
    }
    if options.probe_size == 0 {
        return Err(GeometryError::InvalidInput("probe size must be positive".into()));
    }
    let volumetric_bound = (1.0 + 2.0 / epsilon).powi(n as i32);
    let report = |points: Vec<Vec<f64>>, max_probe_distance| NetReport {
        n,
        epsilon,
        domain,
        points,
        probe_size: options.probe_size,
        max_probe_distance,
        volumetric_bound,
    };

    let mut shift_rng = stream(options.seed, 0);
    let dim = n + 2;
    let shift: Vec<f64> = (0..dim).map(|_| shift_rng.random::<f64>()).collect();
    let probe_shift: Vec<f64> = (0..dim).map(|_| shift_rng.random::<f64>()).collect();

    // The zero-sphere is {-1, +1}; nothing to sample.
    if n == 1 && domain == NetDomain::Sphere {
        let points = if epsilon >= 2.0 { vec![vec![1.0]] } else { vec![vec![1.0], vec![-1.0]] };
        let probes = [vec![1.0], vec![-1.0]];
        let d = coverage(&points, &probes);
        return Ok(report(points, d));
    }
    let probes = cloud(n, domain, 1 << 40, options.probe_size, &probe_shift);

    let first = match domain {
        NetDomain::Ball => vec![0.0; n],
        NetDomain::Sphere => {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            e
        }
    };
    let mut count = if options.candidates > 0 {
        options.candidates
    } else {
        (40.0 * volumetric_bound).clamp(2_000.0, 200_000.0) as usize
    };
    let mut shrink = 0.9;
    let mut worst = f64::INFINITY;
    for _ in 0..ATTEMPTS {
        let candidates = cloud(n, domain, 1, count, &shift);
        let points = farthest_point(&candidates, first.clone(), shrink * epsilon);
        worst = coverage(&points, &probes);
        if worst <= epsilon {
            return Ok(report(points, worst));
        }
        count *= 2;
        shrink *= 0.85;
    }
    Err(GeometryError::NetCertification { max_distance: worst, epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(probe_size: usize) -> NetOptions {
        NetOptions { probe_size, ..NetOptions::default() }
    }

    #[test]
    fn halton_first_points() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_nets() {
        let s = build_net(1, 0.5, NetDomain::Sphere, opts(10)).unwrap();
        assert_eq!(s.points, vec![vec![1.0], vec![-1.0]]);
        assert_eq!(s.max_probe_distance, 0.0);
        let b = build_net(3, 2.0, NetDomain::Ball, opts(10_000)).unwrap();
        assert_eq!(b.points, vec![vec![0.0; 3]]);
        assert_eq!(b.volumetric_bound, 8.0);
    }

    #[test]
    fn circle_net_is_certified_and_small() {
        let r = build_net(2, 1.0, NetDomain::Sphere, NetOptions::default()).unwrap();
        assert_eq!(r.probe_size, 1_000_000);
        assert!(r.max_probe_distance <= 1.0);
        // A chord of length 1 spans pi/3, so each point covers an arc of 2pi/3.
        assert!(r.points.len() >= 3 && r.points.len() as f64 <= r.volumetric_bound);
        for p in &r.points {
            assert!((norm2(p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ball_and_sphere_nets_in_higher_dimension() {
        for (n, eps, domain) in [(3, 0.5, NetDomain::Sphere), (3, 0.5, NetDomain::Ball), (4, 0.75, NetDomain::Ball)] {
            let r = build_net(n, eps, domain, opts(100_000)).unwrap();
            assert!(r.max_probe_distance <= eps, "{n} {eps} {domain}");
            assert!((r.points.len() as f64) <= r.volumetric_bound, "{} > {}", r.points.len(), r.volumetric_bound);
            for p in &r.points {
                assert!(norm2(p) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn errors_and_csv() {
        assert!(build_net(0, 0.5, NetDomain::Ball, opts(10)).is_err());
        assert!(build_net(7, 0.5, NetDomain::Ball, opts(10)).is_err());
        assert!(build_net(2, 0.0, NetDomain::Ball, opts(10)).is_err());
        assert!("cube".parse::<NetDomain>().is_err());
        let csv = build_net(1, 0.5, NetDomain::Sphere, opts(10)).unwrap().to_csv();
        assert!(csv.starts_with("# n=1\n# epsilon=0.5\n# domain=sphere\n# probe_size=10\n"));
        assert!(csv.ends_with("x1\n1.0\n-1.0\n"));
    }
}

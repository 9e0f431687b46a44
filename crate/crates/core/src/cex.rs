//! A C∞ function Φ on the plane, supported in a thin "beak" y ≈ ψ(x) touching the
//! origin, whose restriction to every analytic path through the origin vanishes
//! identically near the origin, although Φ > 0 at points arbitrarily close to it.
//!
//! Φ underflows long before the beak gets interesting (exp(−1/x²) is subnormal for
//! x < 0.037), so everything is decided in log space and points may be given by ln y.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// ψ(x) = exp(−1/x) for x > 0, else 0.
pub fn psi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// η(s) = exp(1 − 1/(1 − 4s²)) on |s| < 1/2, else 0: even, η(0) = 1, decaying on [0, ∞).
pub fn eta(s: f64) -> f64 {
    log_eta(s).map_or(0.0, f64::exp)
}

fn log_eta(s: f64) -> Option<f64> {
    let w = 1.0 - 4.0 * s * s;
    (w > 0.0).then(|| 1.0 - 1.0 / w)
}

/// ln Φ at (x, y) with y given as ln y, or `None` outside the support.
///
/// Support: x > 0 and |y/ψ(x) − 1| < 1/2, tested as ln(1/2) < ln y + 1/x < ln(3/2).
pub fn log_phi_ln_y(x: f64, ln_y: f64) -> Option<f64> {
    if !(x > 0.0) || ln_y.is_nan() {
        return None;
    }
    let ln_ratio = ln_y + 1.0 / x;
    if !(ln_ratio > 0.5_f64.ln() && ln_ratio < 1.5_f64.ln()) {
        return None;
    }
    let s = ln_ratio.exp_m1();
    Some(-1.0 / (x * x) + log_eta(s)?)
}

pub fn log_phi(x: f64, y: f64) -> Option<f64> {
    if !(y > 0.0) {
        return None;
    }
    log_phi_ln_y(x, y.ln())
}

/// Φ(x, y) = exp(−1/x²)·η((y − ψ(x))/ψ(x)) for x > 0, else 0.
pub fn phi(x: f64, y: f64) -> f64 {
    log_phi(x, y).map_or(0.0, f64::exp)
}

/// Membership in the beak {x ≥ 0, ½ψ(x) ≤ y ≤ 2ψ(x)}, y given as ln y.
pub fn in_beak_ln_y(x: f64, ln_y: f64) -> bool {
    if !(x > 0.0) {
        return false;
    }
    let r = ln_y + 1.0 / x;
    r >= 0.5_f64.ln() && r <= 2.0_f64.ln()
}

pub fn in_beak(x: f64, y: f64) -> bool {
    y > 0.0 && in_beak_ln_y(x, y.ln())
}

/// Polynomial path t ↦ (x(t), y(t)); coefficient lists start at t⁰ and have zero
/// constant terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPath {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl AnalyticPath {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Option<Self> {
        let zero_start = |c: &[f64]| c.first().is_none_or(|&v| v == 0.0);
        let nonconstant = x.iter().chain(&y).any(|&v| v != 0.0);
        (zero_start(&x) && zero_start(&y) && nonconstant).then_some(AnalyticPath { x, y })
    }

    pub fn x_coeffs(&self) -> &[f64] {
        &self.x
    }

    pub fn y_coeffs(&self) -> &[f64] {
        &self.y
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        let h = |c: &[f64]| c.iter().rev().fold(0.0, |acc, &v| acc * t + v);
        (h(&self.x), h(&self.y))
    }
}

/// `n` seeded random paths of degree between 1 and `max_degree`, coefficients in [−1, 1].
pub fn random_paths(n: usize, max_degree: usize, seed: u64) -> Vec<AnalyticPath> {
    assert!(max_degree >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let d = rng.gen_range(1..=max_degree);
        let mut coeffs = || {
            let mut c = vec![0.0];
            c.extend((0..d).map(|_| rng.gen_range(-1.0..=1.0)));
            c
        };
        let (x, y) = (coeffs(), coeffs());
        if let Some(p) = AnalyticPath::new(x, y) {
            out.push(p);
        }
    }
    out
}

/// Geometric grid of `n` points from `t_min` up to `t_max`, increasing.
pub fn geometric_grid(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min && n >= 2);
    let q = (t_max / t_min).powf(1.0 / (n - 1) as f64);
    (0..n).map(|i| if i + 1 == n { t_max } else { t_min * q.powi(i as i32) }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ProbeVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathProbe {
    pub path: AnalyticPath,
    /// Largest grid t such that Φ(γ(s)) = 0 at every grid s ≤ t; 0 if none.
    pub verified_u: f64,
    /// First grid t where Φ(γ(t)) > 0, if any.
    pub first_positive: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathProbeReport {
    pub paths: Vec<PathProbe>,
    pub verdict: ProbeVerdict,
}

/// Checks that Φ∘γ vanishes on an initial segment of the (increasing) grid for every path.
pub fn probe_analytic_paths(paths: &[AnalyticPath], t_grid: &[f64]) -> PathProbeReport {
    let probes: Vec<PathProbe> = paths
        .par_iter()
        .map(|p| {
            let mut verified_u = 0.0;
            let mut first_positive = None;
            for &t in t_grid {
                let (x, y) = p.eval(t);
                if log_phi(x, y).is_some() {
                    first_positive = Some(t);
                    break;
                }
                verified_u = t;
            }
            PathProbe { path: p.clone(), verified_u, first_positive }
        })
        .collect();
    let verdict = if probes.iter().all(|p| p.verified_u > 0.0) { ProbeVerdict::Pass } else { ProbeVerdict::Fail };
    PathProbeReport { paths: probes, verdict }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeakSample {
    pub x: f64,
    /// ln ψ(x) = −1/x.
    pub ln_y: f64,
    /// ln Φ(x, ψ(x)) = −1/x².
    pub log_phi: Option<f64>,
    pub distance_to_origin: f64,
    /// Φ(x, 2.5·ψ(x)) = 0.
    pub outside_vanishes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeakReport {
    pub samples: Vec<BeakSample>,
    /// Every spine sample has Φ > 0.
    pub spine_positive: bool,
    /// Closest spine point to the origin with Φ > 0.
    pub min_positive_distance: f64,
    /// −Φ < 0 within 10⁻³ of the origin.
    pub negative_near_origin: bool,
    pub verdict: ProbeVerdict,
}

/// Samples the beak's spine (x, ψ(x)) and the point (x, 2.5·ψ(x)) outside it.
pub fn probe_beak(x_grid: &[f64]) -> BeakReport {
    let samples: Vec<BeakSample> = x_grid
        .iter()
        .map(|&x| {
            let ln_y = -1.0 / x;
            BeakSample {
                x,
                ln_y,
                log_phi: log_phi_ln_y(x, ln_y),
                distance_to_origin: x.hypot(ln_y.exp()),
                outside_vanishes: log_phi_ln_y(x, 2.5_f64.ln() + ln_y).is_none(),
            }
        })
        .collect();
    let spine_positive = samples.iter().all(|s| s.log_phi.is_some());
    let min_positive_distance =
        samples.iter().filter(|s| s.log_phi.is_some()).map(|s| s.distance_to_origin).fold(f64::INFINITY, f64::min);
    let negative_near_origin = min_positive_distance < 1e-3;
    let ok = spine_positive && samples.iter().all(|s| s.outside_vanishes);
    BeakReport {
        samples,
        spine_positive,
        min_positive_distance,
        negative_near_origin,
        verdict: if ok { ProbeVerdict::Pass } else { ProbeVerdict::Fail },
    }
}

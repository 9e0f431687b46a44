//! Infinite cylinders tangent to the unit ball, each given by its tangent
//! generatrix, and the common radius such a set of generatrices admits.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom3::{line_distance, Line, Rotation, TangentLine};
use crate::optimize::bisect;
use crate::Radius;

/// Scan step and cap of the bracketing search in [`pairwise_max_radius`].
pub const RADIUS_SCAN_STEP: f64 = 0.05;
pub const RADIUS_SCAN_CAP: f64 = 64.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CylinderError {
    #[error("radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
    #[error("generatrices {0} and {1} are the same line")]
    IdenticalGeneratrices(usize, usize),
    #[error("a configuration needs at least 2 cylinders, got {0}")]
    TooFewCylinders(usize),
}

/// An ordered set of distinct tangent generatrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderConfig {
    lines: Vec<TangentLine>,
}

impl CylinderConfig {
    pub fn new(lines: Vec<TangentLine>) -> Result<Self, CylinderError> {
        if lines.len() < 2 {
            return Err(CylinderError::TooFewCylinders(lines.len()));
        }
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                if lines[i].is_same_as(&lines[j]) {
                    return Err(CylinderError::IdenticalGeneratrices(i, j));
                }
            }
        }
        Ok(CylinderConfig { lines })
    }

    pub(crate) fn new_unchecked(lines: Vec<TangentLine>) -> Self {
        CylinderConfig { lines }
    }

    pub fn lines(&self) -> &[TangentLine] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn rotate(&self, r: &Rotation) -> CylinderConfig {
        CylinderConfig::new_unchecked(self.lines.iter().map(|g| g.rotate(r)).collect())
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.lines.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }
}

/// Unordered contact pairs `(i, j)`, `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactGraph {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl ContactGraph {
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(i, j) in &self.pairs {
            d[i] += 1;
            d[j] += 1;
        }
        d
    }
}

/// Axis of the cylinder of radius `r` tangent to the unit ball along `g`.
pub fn axis_at_radius(g: &TangentLine, r: f64) -> Result<Line, CylinderError> {
    if !(r >= 0.0) {
        return Err(CylinderError::NegativeRadius(r));
    }
    Ok(axis_unchecked(g, r))
}

fn axis_unchecked(g: &TangentLine, r: f64) -> Line {
    Line::new(g.tangent_point().get() * (1.0 + r), g.direction())
}

/// Clearance function `dist(axis₁(r), axis₂(r)) − 2r`.
fn clearance(g1: &TangentLine, g2: &TangentLine, r: f64) -> f64 {
    line_distance(&axis_unchecked(g1, r), &axis_unchecked(g2, r)) - 2.0 * r
}

/// Largest common radius two equal cylinders on `g1`, `g2` can have without
/// overlapping: the smallest nonnegative root of the clearance function.
pub fn pairwise_max_radius(g1: &TangentLine, g2: &TangentLine) -> Result<Radius, CylinderError> {
    if g1.is_same_as(g2) {
        return Err(CylinderError::IdenticalGeneratrices(0, 1));
    }
    Ok(pairwise_radius_unchecked(g1, g2))
}

pub(crate) fn pairwise_radius_unchecked(g1: &TangentLine, g2: &TangentLine) -> Radius {
    let f = |r: f64| clearance(g1, g2, r);
    if f(0.0) <= 0.0 {
        return Radius::Finite(0.0);
    }
    let steps = (RADIUS_SCAN_CAP / RADIUS_SCAN_STEP).round() as usize;
    let mut lo = 0.0;
    for k in 1..=steps {
        let hi = k as f64 * RADIUS_SCAN_STEP;
        if f(hi) <= 0.0 {
            // Bisect down to machine resolution; finite differences downstream rely on it.
            let root = bisect(f, lo, hi, 0.0).expect("bracket has a sign change");
            return Radius::Finite(root);
        }
        lo = hi;
    }
    Radius::Unbounded
}

/// Minimum over all pairs of [`pairwise_max_radius`].
pub fn common_radius(c: &CylinderConfig) -> Radius {
    let lines = c.lines();
    let pairs: Vec<(usize, usize)> = c.pairs().collect();
    pairs
        .par_iter()
        .map(|&(i, j)| pairwise_radius_unchecked(&lines[i], &lines[j]))
        .reduce(|| Radius::Unbounded, Radius::min)
}

/// All pairwise radii in `pairs()` order.
pub fn pairwise_radii(c: &CylinderConfig) -> Vec<((usize, usize), Radius)> {
    let lines = c.lines();
    c.pairs().map(|(i, j)| ((i, j), pairwise_radius_unchecked(&lines[i], &lines[j]))).collect()
}

/// Pairs whose pairwise radius is within `tol` of the common radius.
pub fn contact_graph(c: &CylinderConfig, tol: f64) -> ContactGraph {
    let r = common_radius(c).as_f64();
    let pairs = pairwise_radii(c).into_iter().filter(|(_, p)| p.as_f64() <= r + tol).map(|(ij, _)| ij).collect();
    ContactGraph { n: c.len(), pairs }
}

/// Six generatrices on the equator at longitudes k·60°, all pointing north.
pub fn c6_config() -> CylinderConfig {
    CylinderConfig::new_unchecked((0..6).map(|k| TangentLine::north_at(0.0, k as f64 * PI / 3.0)).collect())
}

/// The tetrahedral configuration: the δ-process on tetrahedron edges at δ = π/4.
pub fn o6_config() -> CylinderConfig {
    crate::platonic_sweep::delta_config(crate::platonic_sweep::DualPair::TT, PI / 4.0)
}

/// A reduced fraction `p/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub p: i64,
    pub q: i64,
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Best rational approximation `p/q` (`q ≤ qmax`) of `x ≥ 0` among the continued-fraction
/// convergents and semiconvergents.
pub fn best_rational(x: f64, qmax: i64) -> Rational {
    assert!(qmax >= 1);
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut best = Rational { p: x.round() as i64, q: 1 };
    let consider = |p: i64, q: i64, best: &mut Rational| {
        if q >= 1 && q <= qmax && (x - p as f64 / q as f64).abs() < (x - best.p as f64 / best.q as f64).abs() {
            *best = Rational { p, q };
        }
    };
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a > i64::MAX as f64 / 4.0 {
            break;
        }
        let a = a as i64;
        // semiconvergents between the previous and next convergent
        let m_cap = if k1 > 0 { ((qmax - k0) / k1).min(a - 1) } else { a - 1 };
        for m in (a / 2).max(1)..=m_cap {
            consider(m * h1 + h0, m * k1 + k0, &mut best);
        }
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > qmax {
            break;
        }
        consider(h2, k2, &mut best);
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a as f64;
        if frac < 1e-15 {
            break;
        }
        y = 1.0 / frac;
    }
    best
}

/// `Some(p/q)` when sin²(angle) is within `tol` of a fraction with denominator at most `qmax`.
pub fn is_pure_geodetic(angle: f64, qmax: i64, tol: f64) -> Option<Rational> {
    let s2 = angle.sin().powi(2);
    let r = best_rational(s2, qmax);
    ((s2 - r.p as f64 / r.q as f64).abs() < tol).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom3::{UnitVec3, Vec3};

    fn closed_form(g1: &TangentLine, g2: &TangentLine) -> Radius {
        // clearance is affine in r: (1 + r)·d − 2r with d the generatrix distance
        let d = line_distance(&g1.as_line(), &g2.as_line());
        if d >= 2.0 {
            Radius::Unbounded
        } else {
            Radius::Finite(d / (2.0 - d))
        }
    }

    #[test]
    fn axis_examples() {
        let g = TangentLine::new(UnitVec3::X, UnitVec3::Z).unwrap();
        let a = axis_at_radius(&g, 1.0).unwrap();
        assert_eq!(a.point, Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(a.direction, UnitVec3::Z);
        assert_eq!(axis_at_radius(&g, 0.0).unwrap(), g.as_line());
        assert_eq!(axis_at_radius(&g, -0.1), Err(CylinderError::NegativeRadius(-0.1)));
        let h = TangentLine::from_raw(Vec3::new(0.3, -0.5, 0.8), Vec3::new(1.0, 1.0, 0.0)).unwrap();
        let d = axis_at_radius(&h, 0.7).unwrap().distance_to_point(Vec3::ZERO);
        assert!((d - 1.7).abs() < 1e-14);
    }

    #[test]
    fn pairwise_examples() {
        let c6 = c6_config();
        let l = c6.lines();
        let r = pairwise_max_radius(&l[0], &l[1]).unwrap().finite().unwrap();
        assert!((r - 1.0).abs() < 1e-14);
        assert_eq!(pairwise_max_radius(&l[0], &l[3]).unwrap(), Radius::Unbounded);
        let a = TangentLine::new(UnitVec3::Z, UnitVec3::X).unwrap();
        let b = TangentLine::new(UnitVec3::Z, UnitVec3::Y).unwrap();
        assert_eq!(pairwise_max_radius(&a, &b).unwrap(), Radius::Finite(0.0));
        assert!(matches!(pairwise_max_radius(&a, &a.flipped()), Err(CylinderError::IdenticalGeneratrices(..))));
    }

    #[test]
    fn pairwise_matches_closed_form() {
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for _ in 0..300 {
            let g1 = TangentLine::from_raw(Vec3::new(rnd(), rnd(), rnd()), Vec3::new(rnd(), rnd(), rnd())).unwrap();
            let g2 = TangentLine::from_raw(Vec3::new(rnd(), rnd(), rnd()), Vec3::new(rnd(), rnd(), rnd())).unwrap();
            let got = pairwise_max_radius(&g1, &g2).unwrap();
            match (got, closed_form(&g1, &g2)) {
                (Radius::Finite(a), Radius::Finite(b)) if b < RADIUS_SCAN_CAP => {
                    assert!((a - b).abs() < 1e-12 * (1.0 + b), "{a} vs {b}")
                }
                (Radius::Unbounded, Radius::Finite(b)) => assert!(b > RADIUS_SCAN_CAP),
                (x, y) => assert_eq!(x, y),
            }
        }
    }

    #[test]
    fn builtin_radii() {
        assert!((common_radius(&c6_config()).finite().unwrap() - 1.0).abs() < 1e-14);
        assert!((common_radius(&o6_config()).finite().unwrap() - 1.0).abs() < 1e-12);
        let a = TangentLine::new(UnitVec3::Z, UnitVec3::X).unwrap();
        let b = TangentLine::new(UnitVec3::X, UnitVec3::Z).unwrap();
        assert_eq!(common_radius(&CylinderConfig::new(vec![a, b]).unwrap()), Radius::Finite(0.0));
    }

    #[test]
    fn c6_contacts_and_symmetry() {
        let g = contact_graph(&c6_config(), 1e-9);
        assert_eq!(g.pairs.len(), 6);
        assert_eq!(g.degrees(), vec![2; 6]);
        for &(i, j) in &g.pairs {
            assert!(j - i == 1 || (i, j) == (0, 5));
        }
        let r = Rotation::about_axis(UnitVec3::Z, PI / 3.0);
        assert!(crate::geom3::same_line_set(c6_config().rotate(&r).lines(), c6_config().lines(), 1e-12));
    }

    #[test]
    fn o6_tangent_points_form_an_octahedron() {
        let o6 = o6_config();
        let pts: Vec<UnitVec3> = o6.lines().iter().map(|g| g.tangent_point()).collect();
        // each point has exactly one antipode and four neighbors at 90°
        for p in &pts {
            let mut dots: Vec<f64> = pts.iter().map(|q| p.dot(*q)).collect();
            dots.sort_by(|a, b| a.total_cmp(b));
            assert!((dots[0] + 1.0).abs() < 1e-12);
            for d in &dots[1..5] {
                assert!(d.abs() < 1e-12);
            }
            assert!((dots[5] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn config_rejects_duplicates() {
        let a = TangentLine::new(UnitVec3::Z, UnitVec3::X).unwrap();
        assert_eq!(CylinderConfig::new(vec![a, a.flipped()]), Err(CylinderError::IdenticalGeneratrices(0, 1)));
        assert_eq!(CylinderConfig::new(vec![a]), Err(CylinderError::TooFewCylinders(1)));
    }

    #[test]
    fn geodetic_examples() {
        assert_eq!(is_pure_geodetic(PI / 4.0, 10, 1e-12), Some(Rational { p: 1, q: 2 }));
        assert_eq!(is_pure_geodetic(PI / 3.0, 10, 1e-12), Some(Rational { p: 3, q: 4 }));
        let oc = (3.0_f64.powf(0.25) / 2.0_f64.sqrt()).atan();
        // sin² = 2√3 − 3 is irrational
        assert!(((oc.sin().powi(2)) - (2.0 * 3.0_f64.sqrt() - 3.0)).abs() < 1e-15);
        assert_eq!(is_pure_geodetic(oc, 50, 1e-9), None);
    }

    #[test]
    fn best_rational_is_best_by_enumeration() {
        for &x in &[0.2727272727, 0.4641016151, 0.3125, 0.618033988, 0.0123] {
            for qmax in [7, 11, 50] {
                let got = best_rational(x, qmax);
                let mut best_err = f64::INFINITY;
                for q in 1..=qmax {
                    let p = (x * q as f64).round();
                    best_err = best_err.min((x - p / q as f64).abs());
                }
                let err = (x - got.p as f64 / got.q as f64).abs();
                assert!(err <= best_err + 1e-15, "x={x} qmax={qmax} got {got} err {err} best {best_err}");
            }
        }
    }
}

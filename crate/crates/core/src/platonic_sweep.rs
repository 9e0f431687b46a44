//! The δ-process: every edge line of a Platonic solid, moved to touch the unit
//! sphere at its edge midpoint, is turned by δ about the diameter through that
//! midpoint. The common radius r(δ) of the resulting cylinders is swept,
//! maximized, and its zeros are classified for the icosahedral pair.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cylinders::{common_radius, CylinderConfig};
use crate::geom3::{line_distance, platonic_edges, rotate_line_about_radial_axis, signed_line_distance, Solid};
use crate::optimize::{bisect, golden_max};

/// Grid used by [`maximize`] before golden-section refinement.
pub const MAXIMIZE_GRID: usize = 512;
/// Grid used by [`id_zeros`] to locate the dips of r(δ).
pub const ZEROS_GRID: usize = 2048;
/// Lines closer than this are treated as intersecting when clustering.
pub const INTERSECTION_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("no sign change of the polynomial on [{0}, {1}]")]
    NoSignChange(f64, f64),
    #[error("unknown dual pair `{0}` (expected tt, oc or id)")]
    UnknownPair(String),
}

/// A dual pair of Platonic solids, represented by the solid whose edges are turned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualPair {
    /// tetrahedron / tetrahedron
    TT,
    /// octahedron / cube
    OC,
    /// icosahedron / dodecahedron
    ID,
}

impl DualPair {
    pub const ALL: [DualPair; 3] = [DualPair::TT, DualPair::OC, DualPair::ID];

    pub fn base_solid(self) -> Solid {
        match self {
            DualPair::TT => Solid::Tetrahedron,
            DualPair::OC => Solid::Octahedron,
            DualPair::ID => Solid::Icosahedron,
        }
    }

    pub fn line_count(self) -> usize {
        self.base_solid().edge_count()
    }

    pub fn name(self) -> &'static str {
        match self {
            DualPair::TT => "tt",
            DualPair::OC => "oc",
            DualPair::ID => "id",
        }
    }
}

impl std::str::FromStr for DualPair {
    type Err = SweepError;
    fn from_str(s: &str) -> Result<Self, SweepError> {
        match s.to_ascii_lowercase().as_str() {
            "tt" => Ok(DualPair::TT),
            "oc" => Ok(DualPair::OC),
            "id" => Ok(DualPair::ID),
            _ => Err(SweepError::UnknownPair(s.to_string())),
        }
    }
}

/// Sampled `(δ, r(δ))` pairs with strictly increasing δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub pair: DualPair,
    pub samples: Vec<(f64, f64)>,
}

impl SweepCurve {
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, s) in self.samples.iter().enumerate() {
            if s.1 > self.samples[best].1 {
                best = i;
            }
        }
        best
    }

    pub fn max(&self) -> (f64, f64) {
        self.samples[self.argmax()]
    }
}

/// Edge lines of the base solid, each turned by `delta` about its radial axis.
pub fn delta_config(pair: DualPair, delta: f64) -> CylinderConfig {
    let lines = platonic_edges(pair.base_solid())
        .edges
        .iter()
        .map(|e| rotate_line_about_radial_axis(&e.tangent_line(), delta))
        .collect();
    CylinderConfig::new_unchecked(lines)
}

/// r(δ) for one δ.
pub fn radius_at(pair: DualPair, delta: f64) -> f64 {
    common_radius(&delta_config(pair, delta)).as_f64()
}

/// Uniform samples of r(δ) over `[0, π/2]`, endpoints included.
pub fn radius_curve(pair: DualPair, grid: usize) -> SweepCurve {
    assert!(grid >= 2, "radius_curve needs at least 2 samples");
    let step = FRAC_PI_2 / (grid - 1) as f64;
    let samples = (0..grid)
        .into_par_iter()
        .map(|i| {
            let d = if i + 1 == grid { FRAC_PI_2 } else { i as f64 * step };
            (d, radius_at(pair, d))
        })
        .collect();
    SweepCurve { pair, samples }
}

fn generatrix_distances(c: &CylinderConfig) -> Vec<((usize, usize), f64)> {
    let l = c.lines();
    c.pairs().map(|(i, j)| ((i, j), line_distance(&l[i].as_line(), &l[j].as_line()))).collect()
}

/// Maximizer and maximum of r(δ) over `[0, π/2]`.
///
/// The grid maximum is refined by golden section; the result is then polished by
/// solving for the stationary point of one active distance class, or for the
/// crossing of two classes, whichever attains the larger radius.
pub fn maximize(pair: DualPair) -> (f64, f64) {
    let curve = radius_curve(pair, MAXIMIZE_GRID);
    let k = curve.argmax();
    let step = FRAC_PI_2 / (MAXIMIZE_GRID - 1) as f64;
    let lo = (curve.samples[k].0 - step).max(0.0);
    let hi = (curve.samples[k].0 + step).min(FRAC_PI_2);
    let (dg, rg) = golden_max(|d| radius_at(pair, d), lo, hi, 1e-12);

    let dist = |d: f64, ij: (usize, usize)| {
        let c = delta_config(pair, d);
        let l = c.lines();
        line_distance(&l[ij.0].as_line(), &l[ij.1].as_line())
    };
    let at = generatrix_distances(&delta_config(pair, dg));
    let dmin = at.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    // one representative per distinct distance function among the active pairs
    let probe = 1e-3;
    let mut classes: Vec<(usize, usize)> = Vec::new();
    for &(ij, d) in &at {
        if d > dmin + 1e-6 {
            continue;
        }
        let sig = (dist(dg - probe, ij), dist(dg + probe, ij));
        let dup = classes
            .iter()
            .any(|&c| (dist(dg - probe, c) - sig.0).abs() < 1e-10 && (dist(dg + probe, c) - sig.1).abs() < 1e-10);
        if !dup {
            classes.push(ij);
        }
    }
    let (a, b) = (dg - step, dg + step);
    let mut candidates = Vec::new();
    let h = 1e-6;
    for &c in &classes {
        let slope = |d: f64| (dist(d + h, c) - dist(d - h, c)) / (2.0 * h);
        if let Some(x) = bisect(slope, a, b, 0.0) {
            candidates.push(x);
        }
    }
    for (i, &p) in classes.iter().enumerate() {
        for &q in &classes[i + 1..] {
            if let Some(x) = bisect(|d| dist(d, p) - dist(d, q), a, b, 0.0) {
                candidates.push(x);
            }
        }
    }
    let mut best = (dg, rg);
    let mut best_polished: Option<(f64, f64)> = None;
    for x in candidates {
        let r = radius_at(pair, x);
        if r >= rg - 1e-13 && best_polished.is_none_or(|bp| r > bp.1) {
            best_polished = Some((x, r));
        }
    }
    if let Some(bp) = best_polished {
        best = bp;
    }
    best
}

fn t0_polynomial(t: f64) -> f64 {
    [5.0, -80.0, 0.0, 190.0, -4.0, -84.0, 9.0].iter().fold(0.0, |acc, c| acc * t + c)
}

/// Root of 5t⁶ − 80t⁵ + 190t³ − 4t² − 84t + 9 in [0.6, 0.8].
pub fn find_t0() -> Result<f64, SweepError> {
    find_polynomial_root(0.6, 0.8)
}

fn find_polynomial_root(a: f64, b: f64) -> Result<f64, SweepError> {
    bisect(t0_polynomial, a, b, 1e-15).ok_or(SweepError::NoSignChange(a, b))
}

/// Value of the t₀ polynomial; exposed for residual checks.
pub fn t0_polynomial_value(t: f64) -> f64 {
    t0_polynomial(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroPattern {
    pub delta: f64,
    /// `(component count, component size)`, sorted by size.
    pub components: Vec<(usize, usize)>,
}

/// Connected components of the "lines intersect" graph, summarized as (count, size).
pub fn intersection_components(c: &CylinderConfig, tol: f64) -> Vec<(usize, usize)> {
    let n = c.len();
    let l = c.lines();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if line_distance(&l[i].as_line(), &l[j].as_line()) < tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..n {
        *sizes.entry(find(&mut parent, i)).or_default() += 1;
    }
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for s in sizes.values() {
        *hist.entry(*s).or_default() += 1;
    }
    hist.into_iter().map(|(size, count)| (count, size)).collect()
}

/// Interior zeros of r(δ) for the icosahedron/dodecahedron pair, with the
/// intersection pattern of the 30 lines at each zero.
///
/// Dips of the sampled curve are bracketed, the closest pair's signed distance is
/// bisected to its sign change, and the zero is kept when r there is below `tol`.
pub fn id_zeros(tol: f64) -> Vec<ZeroPattern> {
    zeros_of(DualPair::ID, tol)
}

pub fn zeros_of(pair: DualPair, tol: f64) -> Vec<ZeroPattern> {
    assert!(tol > 0.0);
    let curve = radius_curve(pair, ZEROS_GRID);
    let s = &curve.samples;
    let mut out: Vec<ZeroPattern> = Vec::new();
    for k in 1..s.len() - 1 {
        if !(s[k].1 <= s[k - 1].1 && s[k].1 < s[k + 1].1) {
            continue;
        }
        let (a, b) = (s[k - 1].0, s[k + 1].0);
        let closest = generatrix_distances(&delta_config(pair, s[k].0))
            .into_iter()
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .map(|x| x.0)
            .expect("at least one pair");
        let signed = |d: f64| {
            let c = delta_config(pair, d);
            let l = c.lines();
            signed_line_distance(&l[closest.0].as_line(), &l[closest.1].as_line()).unwrap_or(f64::NAN)
        };
        let root = match bisect(signed, a, b, 0.0) {
            Some(x) if x.is_finite() => x,
            _ => s[k].0,
        };
        if radius_at(pair, root) >= tol {
            continue;
        }
        if out.last().is_some_and(|z| (z.delta - root).abs() < 1e-9) {
            continue;
        }
        out.push(ZeroPattern {
            delta: root,
            components: intersection_components(&delta_config(pair, root), INTERSECTION_TOL),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom3::same_line_set;
    use std::f64::consts::PI;

    #[test]
    fn pair_parsing() {
        assert_eq!("ID".parse::<DualPair>().unwrap(), DualPair::ID);
        assert!(matches!("xx".parse::<DualPair>(), Err(SweepError::UnknownPair(_))));
        assert_eq!(DualPair::OC.line_count(), 12);
    }

    #[test]
    fn tt_endpoints_and_center() {
        assert!(radius_at(DualPair::TT, 0.0) < 1e-12);
        assert!(radius_at(DualPair::TT, FRAC_PI_2) < 1e-12);
        assert!((radius_at(DualPair::TT, PI / 4.0) - 1.0).abs() < 1e-12);
        assert!(radius_at(DualPair::ID, 0.0) < 1e-12);
    }

    #[test]
    fn tt_lines_meet_at_vertices_at_zero() {
        let c = delta_config(DualPair::TT, 0.0);
        let verts = Solid::Tetrahedron.vertices();
        // each vertex, pushed out to the edge-line circumradius, lies on exactly three lines
        let scale = 3.0_f64.sqrt();
        for v in verts {
            let p = v.get() * scale;
            let on = c.lines().iter().filter(|g| g.as_line().distance_to_point(p) < 1e-12).count();
            assert_eq!(on, 3);
        }
    }

    #[test]
    fn dual_solid_gives_the_quarter_turned_family() {
        for (pair, dual) in [(DualPair::OC, Solid::Cube), (DualPair::ID, Solid::Dodecahedron)] {
            let d = 0.37;
            let from_dual: Vec<_> = platonic_edges(dual)
                .edges
                .iter()
                .map(|e| rotate_line_about_radial_axis(&e.tangent_line(), d))
                .collect();
            let shifted = delta_config(pair, d + FRAC_PI_2);
            let mirrored = delta_config(pair, d - FRAC_PI_2);
            assert!(
                same_line_set(&from_dual, shifted.lines(), 1e-9) || same_line_set(&from_dual, mirrored.lines(), 1e-9),
                "{pair:?}"
            );
        }
    }

    #[test]
    fn polynomial_root() {
        let t0 = find_t0().unwrap();
        assert!((t0 - 0.694356).abs() < 1e-6);
        assert!(t0_polynomial(t0).abs() < 1e-9);
        assert_eq!(find_polynomial_root(0.0, 0.05), Err(SweepError::NoSignChange(0.0, 0.05)));
    }

    #[test]
    fn components_of_tetrahedron_edges() {
        // at δ = 0 the six lines form one connected component
        assert_eq!(intersection_components(&delta_config(DualPair::TT, 0.0), INTERSECTION_TOL), vec![(1, 6)]);
        assert_eq!(intersection_components(&delta_config(DualPair::TT, PI / 4.0), INTERSECTION_TOL), vec![(6, 1)]);
    }
}

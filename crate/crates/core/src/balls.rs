//! Equal balls tangent to the central unit ball: FCC and HCP clusters, kissing
//! graphs, the maximal common radius at fixed contact directions, and the
//! rolling moves that unlock FCC and HCP.
//!
//! Labeling of the 12-ball clusters (all centers at norm 2 for unit balls):
//!
//! | index | FCC                    | HCP                    |
//! |-------|------------------------|------------------------|
//! | 0..6  | equator, lon k·60°     | equator, lon k·60°     |
//! | 6..9  | top, lon 30/150/270°   | top, lon 30/150/270°   |
//! | 9..12 | bottom, lon 90/210/330°| bottom, lon 30/150/270°|

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom3::{Rotation, UnitVec3, Vec3};
use crate::Radius;

/// Absolute tolerance on center distances when detecting kissing pairs.
pub const KISS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BallsError {
    #[error("need at least 2 directions, got {0}")]
    TooFewDirections(usize),
    #[error("directions {0} and {1} coincide")]
    DuplicateDirection(usize, usize),
    #[error("ball radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("balls {0} and {1} overlap (center distance {2} < {3})")]
    Overlap(usize, usize, f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallCluster {
    directions: Vec<UnitVec3>,
    radius: f64,
}

impl BallCluster {
    /// Validates positivity of the radius and non-overlap of the balls.
    pub fn new(directions: Vec<UnitVec3>, radius: f64) -> Result<Self, BallsError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(BallsError::BadRadius(radius));
        }
        let c = BallCluster { directions, radius };
        let centers = c.centers();
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                let d = (centers[i] - centers[j]).norm();
                if d < 2.0 * radius - KISS_TOL {
                    return Err(BallsError::Overlap(i, j, d, 2.0 * radius));
                }
            }
        }
        Ok(c)
    }

    fn unchecked(directions: Vec<UnitVec3>, radius: f64) -> Self {
        BallCluster { directions, radius }
    }

    pub fn directions(&self) -> &[UnitVec3] {
        &self.directions
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn centers(&self) -> Vec<Vec3> {
        self.directions.iter().map(|d| d.get() * (1.0 + self.radius)).collect()
    }

    pub fn rotate(&self, r: &Rotation) -> BallCluster {
        BallCluster::unchecked(self.directions.iter().map(|d| r.apply_unit(*d)).collect(), self.radius)
    }

    /// Smallest `|c_i - c_j| - 2ρ` over all pairs.
    pub fn min_gap(&self) -> f64 {
        self.min_gap_where(|_, _| true)
    }

    /// Smallest gap over the pairs accepted by `keep`.
    pub fn min_gap_where<F: Fn(usize, usize) -> bool>(&self, keep: F) -> f64 {
        let c = self.centers();
        let mut min = f64::INFINITY;
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                if keep(i, j) {
                    min = min.min((c[i] - c[j]).norm() - 2.0 * self.radius);
                }
            }
        }
        min
    }

    pub fn kissing_graph(&self) -> KissingGraph {
        kissing_graph_at(&self.centers(), self.radius)
    }
}

/// Unordered kissing pairs `(i, j)`, `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KissingGraph {
    pub pairs: Vec<(usize, usize)>,
}

impl KissingGraph {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sorted vertex degrees over `n` vertices.
    pub fn degree_sequence(&self, n: usize) -> Vec<usize> {
        let mut deg = vec![0; n];
        for &(i, j) in &self.pairs {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg.sort_unstable();
        deg
    }
}

fn kissing_graph_at(centers: &[Vec3], radius: f64) -> KissingGraph {
    let mut pairs = Vec::new();
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            if ((centers[i] - centers[j]).norm() - 2.0 * radius).abs() < KISS_TOL {
                pairs.push((i, j));
            }
        }
    }
    KissingGraph { pairs }
}

fn ring(lons_deg: &[f64], lat: f64) -> impl Iterator<Item = UnitVec3> + '_ {
    lons_deg.iter().map(move |&l| UnitVec3::from_lat_lon(lat, l.to_radians()))
}

/// Latitude of the top ring: cylindrical radius 2/√3 and height 2√(2/3) at center norm 2.
fn ring_latitude() -> f64 {
    (2.0_f64 / 3.0).sqrt().asin()
}

const EQUATOR: [f64; 6] = [0.0, 60.0, 120.0, 180.0, 240.0, 300.0];
const TOP: [f64; 3] = [30.0, 150.0, 270.0];
const FCC_BOTTOM: [f64; 3] = [90.0, 210.0, 330.0];

fn cluster_from_rings(bottom: &[f64]) -> BallCluster {
    let lat = ring_latitude();
    let mut dirs: Vec<UnitVec3> = ring(&EQUATOR, 0.0).collect();
    dirs.extend(ring(&TOP, lat));
    dirs.extend(ring(bottom, -lat));
    BallCluster::unchecked(dirs, 1.0)
}

/// 12 unit balls at the vertices of a cuboctahedron (top and bottom triangles staggered).
pub fn fcc_config() -> BallCluster {
    cluster_from_rings(&FCC_BOTTOM)
}

/// 12 unit balls at the vertices of a triangular orthobicupola (top and bottom aligned).
pub fn hcp_config() -> BallCluster {
    cluster_from_rings(&TOP)
}

/// 12 unit directions at the icosahedron vertices.
pub fn icosahedron_directions() -> Vec<UnitVec3> {
    crate::geom3::Solid::Icosahedron.vertices()
}

/// Largest common radius of balls tangent to the unit ball at the given directions.
pub fn max_common_radius(directions: &[UnitVec3]) -> Result<Radius, BallsError> {
    let (_, _, theta) = closest_pair(directions)?;
    let s = (theta / 2.0).sin();
    if s >= 1.0 {
        return Ok(Radius::Unbounded);
    }
    Ok(Radius::Finite(s / (1.0 - s)))
}

/// Number of kissing pairs once the balls are blown up to [`max_common_radius`].
pub fn kissing_count_at_max(directions: &[UnitVec3]) -> Result<usize, BallsError> {
    match max_common_radius(directions)? {
        Radius::Unbounded => Ok(0),
        Radius::Finite(r) => {
            let centers: Vec<Vec3> = directions.iter().map(|d| d.get() * (1.0 + r)).collect();
            Ok(kissing_graph_at(&centers, r).len())
        }
    }
}

fn closest_pair(directions: &[UnitVec3]) -> Result<(usize, usize, f64), BallsError> {
    if directions.len() < 2 {
        return Err(BallsError::TooFewDirections(directions.len()));
    }
    let mut best = (0, 1, f64::INFINITY);
    for i in 0..directions.len() {
        for j in i + 1..directions.len() {
            let a = directions[i].get().angle_to(directions[j].get());
            if a < 1e-12 {
                return Err(BallsError::DuplicateDirection(i, j));
            }
            if a < best.2 {
                best = (i, j, a);
            }
        }
    }
    Ok(best)
}

/// Which rolling move to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveKind {
    /// Three equatorial pairs roll about their shared top balls.
    Fcc,
    /// Three rhombi roll about the axes through their centers.
    Hcp,
    /// Negative control: the FCC move with the third triangle turned the other way.
    FccReversed,
}

impl std::str::FromStr for MoveKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fcc" => Ok(MoveKind::Fcc),
            "hcp" => Ok(MoveKind::Hcp),
            "fcc-reversed" => Ok(MoveKind::FccReversed),
            other => Err(format!("unknown cluster `{other}` (expected fcc, hcp or fcc-reversed)")),
        }
    }
}

/// A one-parameter rolling move of a 12-ball cluster.
///
/// Every ball belongs to at least one rigid body of the move; balls sharing a
/// body keep their mutual distance for all `t`. The FCC move keeps the six
/// top/bottom balls fixed, which counts as one more body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BallMove {
    pub kind: MoveKind,
}

impl BallMove {
    pub fn new(kind: MoveKind) -> Self {
        BallMove { kind }
    }

    pub fn base(&self) -> BallCluster {
        match self.kind {
            MoveKind::Fcc | MoveKind::FccReversed => fcc_config(),
            MoveKind::Hcp => hcp_config(),
        }
    }

    pub fn at(&self, t: f64) -> BallCluster {
        match self.kind {
            MoveKind::Fcc => fcc_move_with_senses(t, [1.0, 1.0, 1.0]),
            MoveKind::FccReversed => fcc_move_with_senses(t, [1.0, 1.0, -1.0]),
            MoveKind::Hcp => hcp_move(t),
        }
    }

    pub fn rigid_bodies(&self) -> Vec<Vec<usize>> {
        match self.kind {
            MoveKind::Fcc | MoveKind::FccReversed => {
                let mut b: Vec<Vec<usize>> = (0..3).map(|p| vec![2 * p, 2 * p + 1, 6 + p]).collect();
                b.push((6..12).collect());
                b
            }
            MoveKind::Hcp => (0..3).map(|p| vec![2 * p, 2 * p + 1, 6 + p, 9 + p]).collect(),
        }
    }

    /// True when balls `i` and `j` move together as part of one rigid body.
    pub fn rigidly_linked(&self, i: usize, j: usize) -> bool {
        self.rigid_bodies().iter().any(|b| b.contains(&i) && b.contains(&j))
    }
}

/// FCC unlocking move: equatorial pair `p` (balls 2p, 2p+1) rolls by `t` about the
/// axis through its top ball `6 + p`; top and bottom triangles stay fixed.
pub fn fcc_move(t: f64) -> BallCluster {
    fcc_move_with_senses(t, [1.0, 1.0, 1.0])
}

fn fcc_move_with_senses(t: f64, senses: [f64; 3]) -> BallCluster {
    let base = fcc_config();
    let mut dirs = base.directions.clone();
    for (p, sense) in senses.iter().enumerate() {
        let rot = Rotation::about_axis(base.directions[6 + p], sense * t);
        for k in [2 * p, 2 * p + 1] {
            dirs[k] = rot.apply_unit(base.directions[k]);
        }
    }
    BallCluster::unchecked(dirs, 1.0)
}

/// HCP unlocking move: rhombus `p` = {2p, 2p+1, 6+p, 9+p} rolls by `t` about the axis
/// through the midpoint of its two equatorial centers.
pub fn hcp_move(t: f64) -> BallCluster {
    let base = hcp_config();
    let mut dirs = base.directions.clone();
    for p in 0..3 {
        let axis = (base.directions[2 * p].get() + base.directions[2 * p + 1].get())
            .normalize()
            .expect("adjacent equatorial balls are not antipodal");
        let rot = Rotation::about_axis(axis, t);
        for k in [2 * p, 2 * p + 1, 6 + p, 9 + p] {
            dirs[k] = rot.apply_unit(base.directions[k]);
        }
    }
    BallCluster::unchecked(dirs, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnlockSample {
    pub t: f64,
    /// Smallest gap between balls of different rigid bodies; this is what the move must open.
    pub gap: f64,
    /// Smallest gap over all pairs, including the contacts each rigid body carries along.
    pub gap_all_pairs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnlockReport {
    pub kind: MoveKind,
    pub t_max: f64,
    pub steps: usize,
    pub samples: Vec<UnlockSample>,
    pub first_failure: Option<f64>,
    pub verdict: Verdict,
}

/// Samples `t = t_max·k/steps`, `k = 1..=steps`, and checks that every pair of balls
/// not carried by a common rigid body is strictly separated.
pub fn verify_unlock(mv: BallMove, t_max: f64, steps: usize) -> UnlockReport {
    assert!(steps >= 2 && t_max > 0.0, "verify_unlock needs steps >= 2 and t_max > 0");
    let samples: Vec<UnlockSample> = (1..=steps)
        .into_par_iter()
        .map(|k| {
            let t = t_max * k as f64 / steps as f64;
            let c = mv.at(t);
            UnlockSample { t, gap: c.min_gap_where(|i, j| !mv.rigidly_linked(i, j)), gap_all_pairs: c.min_gap() }
        })
        .collect();
    let first_failure = samples.iter().find(|s| !(s.gap > 0.0)).map(|s| s.t);
    UnlockReport {
        kind: mv.kind,
        t_max,
        steps,
        verdict: if first_failure.is_none() { Verdict::Pass } else { Verdict::Fail },
        first_failure,
        samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom3::Solid;

    /// Brute force: largest ρ with |c_i - c_j| ≥ 2ρ for all pairs, by bisection on ρ.
    fn radius_by_bisection(dirs: &[UnitVec3]) -> f64 {
        let ok = |r: f64| {
            let c: Vec<Vec3> = dirs.iter().map(|d| d.get() * (1.0 + r)).collect();
            (0..c.len()).all(|i| (i + 1..c.len()).all(|j| (c[i] - c[j]).norm() >= 2.0 * r))
        };
        let (mut lo, mut hi) = (0.0, 100.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if ok(m) {
                lo = m
            } else {
                hi = m
            }
        }
        lo
    }

    #[test]
    fn fcc_basics() {
        let c = fcc_config();
        assert_eq!(c.len(), 12);
        for p in c.centers() {
            assert!((p.norm() - 2.0).abs() < 1e-14);
        }
        assert!(c.min_gap().abs() < 1e-14);
        assert_eq!(c.kissing_graph().len(), 24);
    }

    #[test]
    fn hcp_basics() {
        let c = hcp_config();
        for p in c.centers() {
            assert!((p.norm() - 2.0).abs() < 1e-14);
        }
        assert!(c.min_gap().abs() < 1e-14);
        let g = c.kissing_graph();
        assert_eq!(g.len(), 24);
        assert_eq!(g.degree_sequence(12), vec![4; 12]);
        assert_eq!(fcc_config().kissing_graph().degree_sequence(12), vec![4; 12]);
    }

    #[test]
    fn fcc_matches_permutation_coordinates_up_to_rotation() {
        let s = 2.0_f64.sqrt();
        let mut perm = Vec::new();
        for a in [s, -s] {
            for b in [s, -s] {
                perm.push(Vec3::new(a, b, 0.0));
                perm.push(Vec3::new(a, 0.0, b));
                perm.push(Vec3::new(0.0, a, b));
            }
        }
        let axis = Vec3::new(1.0, 1.0, 1.0).normalize().unwrap();
        let tilt = Rotation::between(UnitVec3::Z, axis);
        let ours = fcc_config().centers();
        let found = (0..360).any(|deg| {
            let r = tilt.compose(&Rotation::about_axis(UnitVec3::Z, (deg as f64).to_radians()));
            ours.iter().all(|c| perm.iter().any(|p| (r.apply(*c) - *p).norm() < 1e-9))
        });
        assert!(found);
    }

    #[test]
    fn blowup_examples() {
        let ico = icosahedron_directions();
        let r = max_common_radius(&ico).unwrap().finite().unwrap();
        let closed = 1.0 / (((5.0 + 5.0_f64.sqrt()) / 2.0).sqrt() - 1.0);
        assert!((r - closed).abs() < 1e-12);
        assert!((r - radius_by_bisection(&ico)).abs() < 1e-12);
        assert_eq!(kissing_count_at_max(&ico).unwrap(), 30);

        let cubo = fcc_config().directions().to_vec();
        assert!((max_common_radius(&cubo).unwrap().finite().unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(kissing_count_at_max(&cubo).unwrap(), 24);

        let oct = Solid::Octahedron.vertices();
        let r = max_common_radius(&oct).unwrap().finite().unwrap();
        assert!((r - (2.0_f64.sqrt() + 1.0)).abs() < 1e-12);
        assert!((r - radius_by_bisection(&oct)).abs() < 1e-9);

        assert_eq!(kissing_count_at_max(&[UnitVec3::X, UnitVec3::Y]).unwrap(), 1);
        assert_eq!(max_common_radius(&[UnitVec3::X, UnitVec3::X.flip()]).unwrap(), Radius::Unbounded);
    }

    #[test]
    fn blowup_errors() {
        assert_eq!(max_common_radius(&[UnitVec3::X]), Err(BallsError::TooFewDirections(1)));
        assert_eq!(
            max_common_radius(&[UnitVec3::X, UnitVec3::Y, UnitVec3::X]),
            Err(BallsError::DuplicateDirection(0, 2))
        );
    }

    #[test]
    fn cluster_validation() {
        assert!(BallCluster::new(fcc_config().directions().to_vec(), 1.0).is_ok());
        assert!(matches!(BallCluster::new(fcc_config().directions().to_vec(), 1.01), Err(BallsError::Overlap(..))));
        assert!(matches!(BallCluster::new(vec![UnitVec3::X], 0.0), Err(BallsError::BadRadius(_))));
    }

    #[test]
    fn moves_start_at_base() {
        for (moved, base) in [(fcc_move(0.0), fcc_config()), (hcp_move(0.0), hcp_config())] {
            for (a, b) in moved.directions().iter().zip(base.directions()) {
                assert!((a.get() - b.get()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn moves_open_the_named_pairs() {
        // FCC: B = 2 (lon 120°), E = 9 (bottom, lon 90°), A = 1, C = 7.
        let c = fcc_move(0.1).centers();
        assert!((c[2] - c[9]).norm() > 2.0);
        assert!((c[2] - c[1]).norm() > 2.0);
        assert!(c[2].z < 0.0 && c[1].z > 0.0, "B below and A above the equator");
        assert!(((c[2] - c[7]).norm() - 2.0).abs() < 1e-14, "B keeps kissing C");
        let g = fcc_move(0.1).min_gap_where(|i, j| !BallMove::new(MoveKind::Fcc).rigidly_linked(i, j));
        assert!(g > 0.0);
        // HCP: the two top balls 6 and 7 go down together.
        let h = hcp_move(0.1).centers();
        assert!((h[6] - h[7]).norm() > 2.0);
        assert!(h[6].z < hcp_config().centers()[6].z);
        let g = hcp_move(0.1).min_gap_where(|i, j| !BallMove::new(MoveKind::Hcp).rigidly_linked(i, j));
        assert!(g > 0.0);
    }

    #[test]
    fn rigid_bodies_keep_their_contacts() {
        for kind in [MoveKind::Fcc, MoveKind::Hcp] {
            let mv = BallMove::new(kind);
            let base = mv.base().centers();
            let moved = mv.at(0.2).centers();
            for body in mv.rigid_bodies() {
                for &i in &body {
                    for &j in &body {
                        let d0 = (base[i] - base[j]).norm();
                        let d1 = (moved[i] - moved[j]).norm();
                        assert!((d0 - d1).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn unlock_verdicts() {
        assert_eq!(verify_unlock(BallMove::new(MoveKind::Fcc), 0.3, 256).verdict, Verdict::Pass);
        assert_eq!(verify_unlock(BallMove::new(MoveKind::Hcp), 0.3, 256).verdict, Verdict::Pass);
        let bad = verify_unlock(BallMove::new(MoveKind::FccReversed), 0.3, 256);
        assert_eq!(bad.verdict, Verdict::Fail);
        assert!(bad.first_failure.is_some());
    }
}

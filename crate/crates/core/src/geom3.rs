//! Three-dimensional primitives on the unit-sphere scale: vectors, rotations,
//! lines, lines tangent to the unit sphere, and Platonic-solid edge data.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for the unit-length and tangency invariants.
pub const UNIT_TOL: f64 = 1e-12;
/// Two lines closer than this (with nearly parallel directions) are the same line.
pub const LINE_EQ_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("vector has non-finite components")]
    NonFinite,
    #[error("cannot normalize a vector of length {0:e}")]
    Degenerate(f64),
    #[error("vector is not unit length (|v| = {0})")]
    NotUnit(f64),
    #[error("direction is not tangent to the sphere at the tangent point (u.t = {0:e})")]
    NotTangent(f64),
    #[error("unknown solid `{0}`")]
    UnknownSolid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const X: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn normalize(self) -> Result<UnitVec3, GeomError> {
        if !self.is_finite() {
            return Err(GeomError::NonFinite);
        }
        let n = self.norm();
        if n < 1e-300 {
            return Err(GeomError::Degenerate(n));
        }
        Ok(UnitVec3(self / n))
    }

    /// Angle between two nonzero vectors, accurate for nearly (anti)parallel inputs.
    pub fn angle_to(self, o: Vec3) -> f64 {
        self.cross(o).norm().atan2(self.dot(o))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// A vector of unit length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec3", try_from = "Vec3")]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub const X: UnitVec3 = UnitVec3(Vec3::X);
    pub const Y: UnitVec3 = UnitVec3(Vec3::Y);
    pub const Z: UnitVec3 = UnitVec3(Vec3::Z);

    /// Wraps `v` after checking |v| = 1 within [`UNIT_TOL`].
    pub fn new(v: Vec3) -> Result<Self, GeomError> {
        if !v.is_finite() {
            return Err(GeomError::NonFinite);
        }
        let n = v.norm();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(GeomError::NotUnit(n));
        }
        Ok(UnitVec3(v))
    }

    /// Unit vector from spherical coordinates (latitude, longitude).
    pub fn from_lat_lon(lat: f64, lon: f64) -> Self {
        UnitVec3(Vec3::new(lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()))
    }

    pub fn get(self) -> Vec3 {
        self.0
    }

    pub fn dot(self, o: UnitVec3) -> f64 {
        self.0.dot(o.0)
    }

    pub fn flip(self) -> UnitVec3 {
        UnitVec3(-self.0)
    }

    /// Any unit vector orthogonal to `self`, chosen deterministically.
    pub fn any_orthogonal(self) -> UnitVec3 {
        let v = self.0;
        let seed = if v.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
        let w = seed - v * v.dot(seed);
        UnitVec3(w / w.norm())
    }
}

impl From<UnitVec3> for Vec3 {
    fn from(u: UnitVec3) -> Vec3 {
        u.0
    }
}

impl TryFrom<Vec3> for UnitVec3 {
    type Error = GeomError;
    fn try_from(v: Vec3) -> Result<Self, GeomError> {
        UnitVec3::new(v)
    }
}

/// A proper rotation stored as an orthogonal 3x3 matrix (rows).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] };

    /// Right-handed rotation by `angle` about `axis` (counterclockwise seen from the tip).
    pub fn about_axis(axis: UnitVec3, angle: f64) -> Self {
        let Vec3 { x, y, z } = axis.get();
        let (s, c) = angle.sin_cos();
        let k = 1.0 - c;
        Rotation {
            m: [
                [c + x * x * k, x * y * k - z * s, x * z * k + y * s],
                [y * x * k + z * s, c + y * y * k, y * z * k - x * s],
                [z * x * k - y * s, z * y * k + x * s, c + z * z * k],
            ],
        }
    }

    /// The minimal rotation carrying unit vector `from` onto `to` (undefined for antipodes:
    /// a half turn about an arbitrary orthogonal axis is returned).
    pub fn between(from: UnitVec3, to: UnitVec3) -> Self {
        let axis = from.get().cross(to.get());
        let s = axis.norm();
        let c = from.dot(to);
        if s < 1e-300 {
            if c > 0.0 {
                return Rotation::IDENTITY;
            }
            return Rotation::about_axis(from.any_orthogonal(), std::f64::consts::PI);
        }
        Rotation::about_axis(UnitVec3(axis / s), s.atan2(c))
    }

    pub fn from_rows(m: [[f64; 3]; 3]) -> Self {
        Rotation { m }
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    /// Rotation of a unit vector; renormalized so unit length is kept to rounding.
    pub fn apply_unit(&self, u: UnitVec3) -> UnitVec3 {
        let v = self.apply(u.get());
        UnitVec3(v / v.norm())
    }

    /// `self` after `other`: `(self * other).apply(v) == self.apply(other.apply(v))`.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Rotation { m }
    }

    pub fn inverse(&self) -> Rotation {
        let m = &self.m;
        Rotation { m: [[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]] }
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// An infinite line. The sign of `direction` carries no meaning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub point: Vec3,
    pub direction: UnitVec3,
}

impl Line {
    pub fn new(point: Vec3, direction: UnitVec3) -> Self {
        Line { point, direction }
    }

    /// Distance from `p` to this line.
    pub fn distance_to_point(&self, p: Vec3) -> f64 {
        let d = p - self.point;
        let t = self.direction.get();
        (d - t * d.dot(t)).norm()
    }

    pub fn is_same_as(&self, other: &Line) -> bool {
        self.direction.dot(other.direction).abs() > 1.0 - LINE_EQ_TOL && line_distance(self, other) < LINE_EQ_TOL
    }
}

/// Minimal distance between two full lines.
pub fn line_distance(a: &Line, b: &Line) -> f64 {
    let n = a.direction.get().cross(b.direction.get());
    let nn = n.norm_squared();
    let d = b.point - a.point;
    if nn < 1e-24 {
        return a.distance_to_point(b.point);
    }
    d.dot(n).abs() / nn.sqrt()
}

/// Signed distance between two non-parallel lines, `(p_b - p_a) . (t_a x t_b) / |t_a x t_b|`.
/// Changes sign when the lines pass through each other; `None` for parallel lines.
pub fn signed_line_distance(a: &Line, b: &Line) -> Option<f64> {
    let n = a.direction.get().cross(b.direction.get());
    let nn = n.norm_squared();
    if nn < 1e-24 {
        return None;
    }
    Some((b.point - a.point).dot(n) / nn.sqrt())
}

/// A line tangent to the unit sphere: tangent point `u` and direction `t` with `u . t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentLine {
    u: UnitVec3,
    t: UnitVec3,
}

impl TangentLine {
    pub fn new(u: UnitVec3, t: UnitVec3) -> Result<Self, GeomError> {
        let c = u.dot(t);
        if c.abs() > UNIT_TOL {
            return Err(GeomError::NotTangent(c));
        }
        Ok(TangentLine { u, t })
    }

    /// Builds a tangent line from raw vectors: `u` is normalized and `t` is projected
    /// onto the tangent plane at `u` before normalization.
    pub fn from_raw(u: Vec3, t: Vec3) -> Result<Self, GeomError> {
        let u = u.normalize()?;
        let tp = t - u.get() * u.get().dot(t);
        let t = tp.normalize()?;
        Ok(TangentLine { u, t })
    }

    /// The tangent line at latitude/longitude with the local northward direction.
    pub fn north_at(lat: f64, lon: f64) -> Self {
        let u = UnitVec3::from_lat_lon(lat, lon);
        let (sl, cl) = lat.sin_cos();
        let t = UnitVec3(Vec3::new(-sl * lon.cos(), -sl * lon.sin(), cl));
        TangentLine { u, t }
    }

    pub(crate) fn from_parts_unchecked(u: UnitVec3, t: UnitVec3) -> Self {
        TangentLine { u, t }
    }

    pub fn tangent_point(&self) -> UnitVec3 {
        self.u
    }

    pub fn direction(&self) -> UnitVec3 {
        self.t
    }

    pub fn as_line(&self) -> Line {
        Line::new(self.u.get(), self.t)
    }

    pub fn rotate(&self, r: &Rotation) -> TangentLine {
        TangentLine { u: r.apply_unit(self.u), t: r.apply_unit(self.t) }
    }

    pub fn flipped(&self) -> TangentLine {
        TangentLine { u: self.u, t: self.t.flip() }
    }

    pub fn is_same_as(&self, other: &TangentLine) -> bool {
        self.as_line().is_same_as(&other.as_line())
    }
}

/// Rotates the direction of `g` by `delta` about the diameter through its tangent point,
/// counterclockwise as seen from outside the sphere.
pub fn rotate_line_about_radial_axis(g: &TangentLine, delta: f64) -> TangentLine {
    let u = g.u.get();
    let t = g.t.get();
    let (s, c) = delta.sin_cos();
    // u . t = 0, so Rodrigues reduces to the in-plane rotation.
    let v = t * c + u.cross(t) * s;
    TangentLine { u: g.u, t: UnitVec3(v / v.norm()) }
}

/// True when every line of `a` matches a distinct line of `b` (and the sizes agree).
pub fn same_line_set(a: &[TangentLine], b: &[TangentLine], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    'outer: for la in a {
        for (j, lb) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let (x, y) = (la.as_line(), lb.as_line());
            if x.direction.dot(y.direction).abs() > 1.0 - tol && line_distance(&x, &y) < tol {
                used[j] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solid {
    Tetrahedron,
    Cube,
    Octahedron,
    Icosahedron,
    Dodecahedron,
}

impl Solid {
    pub const ALL: [Solid; 5] =
        [Solid::Tetrahedron, Solid::Cube, Solid::Octahedron, Solid::Icosahedron, Solid::Dodecahedron];

    pub fn name(self) -> &'static str {
        match self {
            Solid::Tetrahedron => "tetrahedron",
            Solid::Cube => "cube",
            Solid::Octahedron => "octahedron",
            Solid::Icosahedron => "icosahedron",
            Solid::Dodecahedron => "dodecahedron",
        }
    }

    pub fn edge_count(self) -> usize {
        match self {
            Solid::Tetrahedron => 6,
            Solid::Cube | Solid::Octahedron => 12,
            Solid::Icosahedron | Solid::Dodecahedron => 30,
        }
    }

    /// Vertex directions (unit vectors) in the canonical orientation.
    pub fn vertices(self) -> Vec<UnitVec3> {
        let raw: Vec<Vec3> = match self {
            Solid::Tetrahedron => vec![
                Vec3::new(1.0, 1.0, 1.0),
                Vec3::new(1.0, -1.0, -1.0),
                Vec3::new(-1.0, 1.0, -1.0),
                Vec3::new(-1.0, -1.0, 1.0),
            ],
            Solid::Cube => {
                let mut v = Vec::with_capacity(8);
                for x in [1.0, -1.0] {
                    for y in [1.0, -1.0] {
                        for z in [1.0, -1.0] {
                            v.push(Vec3::new(x, y, z));
                        }
                    }
                }
                v
            }
            Solid::Octahedron => vec![Vec3::X, -Vec3::X, Vec3::Y, -Vec3::Y, Vec3::Z, -Vec3::Z],
            Solid::Icosahedron => {
                let phi = golden_ratio();
                let mut v = Vec::with_capacity(12);
                for a in [1.0, -1.0] {
                    for b in [phi, -phi] {
                        v.push(Vec3::new(0.0, a, b));
                        v.push(Vec3::new(a, b, 0.0));
                        v.push(Vec3::new(b, 0.0, a));
                    }
                }
                v
            }
            Solid::Dodecahedron => {
                let ico = Solid::Icosahedron.vertices();
                let edges = min_distance_pairs(&ico);
                let adjacent = |i: usize, j: usize| edges.contains(&(i.min(j), i.max(j)));
                let mut v = Vec::with_capacity(20);
                for i in 0..ico.len() {
                    for j in i + 1..ico.len() {
                        for k in j + 1..ico.len() {
                            if adjacent(i, j) && adjacent(j, k) && adjacent(i, k) {
                                v.push(ico[i].get() + ico[j].get() + ico[k].get());
                            }
                        }
                    }
                }
                v
            }
        };
        raw.into_iter().map(|v| v.normalize().expect("nonzero vertex")).collect()
    }

    /// A small generating set of the proper rotation group of the solid.
    pub fn symmetry_generators(self) -> Vec<Rotation> {
        use std::f64::consts::PI;
        let diag = Vec3::new(1.0, 1.0, 1.0).normalize().unwrap();
        match self {
            Solid::Tetrahedron => {
                vec![Rotation::about_axis(diag, 2.0 * PI / 3.0), Rotation::about_axis(UnitVec3::X, PI)]
            }
            Solid::Cube | Solid::Octahedron => {
                vec![Rotation::about_axis(UnitVec3::Z, PI / 2.0), Rotation::about_axis(diag, 2.0 * PI / 3.0)]
            }
            Solid::Icosahedron | Solid::Dodecahedron => {
                let five = Vec3::new(0.0, 1.0, golden_ratio()).normalize().unwrap();
                vec![
                    Rotation::about_axis(five, 2.0 * PI / 5.0),
                    Rotation::about_axis(diag, 2.0 * PI / 3.0),
                    Rotation::about_axis(UnitVec3::X, PI),
                ]
            }
        }
    }
}

impl fmt::Display for Solid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solid {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self, GeomError> {
        match s.to_ascii_lowercase().as_str() {
            "tetrahedron" | "tet" => Ok(Solid::Tetrahedron),
            "cube" => Ok(Solid::Cube),
            "octahedron" | "oct" => Ok(Solid::Octahedron),
            "icosahedron" | "ico" => Ok(Solid::Icosahedron),
            "dodecahedron" | "dod" => Ok(Solid::Dodecahedron),
            _ => Err(GeomError::UnknownSolid(s.to_string())),
        }
    }
}

pub fn golden_ratio() -> f64 {
    (1.0 + 5.0_f64.sqrt()) / 2.0
}

/// One edge of a solid: direction of its midpoint and its (unit) direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolidEdge {
    pub midpoint: UnitVec3,
    pub direction: UnitVec3,
}

impl SolidEdge {
    /// The line through the normalized midpoint with the edge direction.
    pub fn tangent_line(&self) -> TangentLine {
        TangentLine::from_parts_unchecked(self.midpoint, self.direction)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolidEdgeData {
    pub solid: Solid,
    pub edges: Vec<SolidEdge>,
}

/// Index pairs (i < j) of vertices at the minimal pairwise distance.
fn min_distance_pairs(v: &[UnitVec3]) -> Vec<(usize, usize)> {
    let mut min = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            min = min.min((v[i].get() - v[j].get()).norm());
        }
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if ((v[i].get() - v[j].get()).norm() - min).abs() < 1e-9 {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn platonic_edges(solid: Solid) -> SolidEdgeData {
    let v = solid.vertices();
    let edges = min_distance_pairs(&v)
        .into_iter()
        .map(|(i, j)| {
            let (a, b) = (v[i].get(), v[j].get());
            let mid = ((a + b) * 0.5).normalize().expect("edge midpoint is not the center");
            let dir = (b - a).normalize().expect("distinct vertices");
            SolidEdge { midpoint: mid, direction: dir }
        })
        .collect();
    SolidEdgeData { solid, edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(p: [f64; 3], d: [f64; 3]) -> Line {
        Line::new(Vec3::from_array(p), Vec3::from_array(d).normalize().unwrap())
    }

    #[test]
    fn distance_examples() {
        assert!(
            (line_distance(&line([0., 0., 0.], [1., 0., 0.]), &line([0., 0., 1.], [0., 1., 0.])) - 1.0).abs() < 1e-15
        );
        assert!(
            (line_distance(&line([0., 0., 0.], [1., 0., 0.]), &line([0., 2., 0.], [1., 0., 0.])) - 2.0).abs() < 1e-15
        );
        assert_eq!(line_distance(&line([1., 1., 1.], [1., 0., 0.]), &line([1., 1., 1.], [0.3, 1., -2.])), 0.0);
    }

    #[test]
    fn radial_rotation_examples() {
        let g = TangentLine::new(UnitVec3::Z, UnitVec3::X).unwrap();
        assert_eq!(rotate_line_about_radial_axis(&g, 0.0), g);
        let q = rotate_line_about_radial_axis(&g, PI / 2.0);
        assert_eq!(q.tangent_point(), g.tangent_point());
        assert!((q.direction().get() - Vec3::Y).norm() < 1e-15);
        let h = rotate_line_about_radial_axis(&g, PI);
        assert!(h.is_same_as(&g));
        assert!((h.direction().get() + g.direction().get()).norm() < 1e-15);
    }

    #[test]
    fn edge_counts_and_orthogonality() {
        for s in Solid::ALL {
            let data = platonic_edges(s);
            assert_eq!(data.edges.len(), s.edge_count(), "{s}");
            for e in &data.edges {
                assert!(e.midpoint.dot(e.direction).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cube_midpoints_are_face_diagonals() {
        let data = platonic_edges(Solid::Cube);
        let s = 1.0 / 2.0_f64.sqrt();
        for e in &data.edges {
            let mut c: Vec<f64> = e.midpoint.get().to_array().iter().map(|x| x.abs()).collect();
            c.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert!(c[0].abs() < 1e-15 && (c[1] - s).abs() < 1e-15 && (c[2] - s).abs() < 1e-15);
        }
    }

    #[test]
    fn dodecahedron_is_dual() {
        let v = Solid::Dodecahedron.vertices();
        assert_eq!(v.len(), 20);
        // every dodecahedron vertex sees exactly three neighbors at the edge length
        let pairs = min_distance_pairs(&v);
        assert_eq!(pairs.len(), 30);
    }

    #[test]
    fn unknown_solid_is_an_error() {
        assert!(matches!("prism".parse::<Solid>(), Err(GeomError::UnknownSolid(_))));
        assert_eq!("ICO".parse::<Solid>().unwrap(), Solid::Icosahedron);
    }

    #[test]
    fn rotation_is_proper() {
        let r = Rotation::about_axis(Vec3::new(1.0, -2.0, 0.5).normalize().unwrap(), 0.7);
        assert!((r.determinant() - 1.0).abs() < 1e-14);
        let v = Vec3::new(0.3, 0.4, -1.2);
        assert!((r.apply(v).norm() - v.norm()).abs() < 1e-14);
        let back = r.inverse().apply(r.apply(v));
        assert!((back - v).norm() < 1e-14);
    }

    #[test]
    fn between_maps_from_to() {
        let a = Vec3::new(0.2, 0.9, -0.1).normalize().unwrap();
        let b = Vec3::new(-0.5, 0.1, 0.8).normalize().unwrap();
        let r = Rotation::between(a, b);
        assert!((r.apply(a.get()) - b.get()).norm() < 1e-14);
        assert!((Rotation::between(a, a.flip()).apply(a.get()) + a.get()).norm() < 1e-14);
    }

    #[test]
    fn tangent_line_rejects_non_tangent() {
        let u = UnitVec3::Z;
        let t = Vec3::new(1.0, 0.0, 0.1).normalize().unwrap();
        assert!(matches!(TangentLine::new(u, t), Err(GeomError::NotTangent(_))));
        let g = TangentLine::from_raw(Vec3::new(0.0, 0.0, 2.0), Vec3::new(1.0, 0.0, 0.1)).unwrap();
        assert!(g.tangent_point().dot(g.direction()).abs() < 1e-15);
        assert!(TangentLine::from_raw(Vec3::Z, Vec3::Z).is_err());
    }
}

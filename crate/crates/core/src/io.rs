//! Configuration files, number formatting, and OBJ meshes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::balls::BallCluster;
use crate::cylinders::CylinderConfig;
use crate::geom3::{TangentLine, UnitVec3, Vec3};

/// Input vectors must have length within this of 1.
pub const LOAD_UNIT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read or write {path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("invalid OBJ at line {line}: {msg}")]
    Obj { line: usize, msg: String },
}

/// On-disk configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConfigFile {
    Cylinders { tangent_points: Vec<[f64; 3]>, directions: Vec<[f64; 3]> },
    Balls { directions: Vec<[f64; 3]>, radius: f64 },
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Loaded {
    Cylinders(CylinderConfig),
    Balls(BallCluster),
}

impl ConfigFile {
    pub fn from_cylinders(c: &CylinderConfig) -> Self {
        ConfigFile::Cylinders {
            tangent_points: c.lines().iter().map(|g| g.tangent_point().get().to_array()).collect(),
            directions: c.lines().iter().map(|g| g.direction().get().to_array()).collect(),
        }
    }

    pub fn from_balls(b: &BallCluster) -> Self {
        ConfigFile::Balls {
            directions: b.directions().iter().map(|u| u.get().to_array()).collect(),
            radius: b.radius(),
        }
    }

    /// Normalizes vectors, projects directions onto tangent planes, and builds the configuration.
    pub fn validate(&self) -> Result<Loaded, IoError> {
        let unit = |what: &str, i: usize, a: &[f64; 3]| -> Result<Vec3, IoError> {
            let v = Vec3::from_array(*a);
            let n = v.norm();
            if !v.is_finite() || (n - 1.0).abs() > LOAD_UNIT_TOL {
                return Err(IoError::Schema(format!(
                    "{what}[{i}] has length {n}, expected 1 within {LOAD_UNIT_TOL:e}"
                )));
            }
            Ok(v / n)
        };
        match self {
            ConfigFile::Cylinders { tangent_points, directions } => {
                if tangent_points.len() != directions.len() {
                    return Err(IoError::Schema(format!(
                        "{} tangent points but {} directions",
                        tangent_points.len(),
                        directions.len()
                    )));
                }
                let mut lines = Vec::with_capacity(directions.len());
                for (i, (p, d)) in tangent_points.iter().zip(directions).enumerate() {
                    let u = unit("tangent_points", i, p)?;
                    let t = unit("directions", i, d)?;
                    let tp = t - u * u.dot(t);
                    if tp.norm() < 1e-6 {
                        return Err(IoError::Schema(format!("directions[{i}] is radial at its tangent point")));
                    }
                    let t = tp / tp.norm();
                    let u = UnitVec3::new(u).map_err(|e| IoError::Schema(e.to_string()))?;
                    let t = UnitVec3::new(t).map_err(|e| IoError::Schema(e.to_string()))?;
                    lines.push(TangentLine::new(u, t).map_err(|e| IoError::Schema(format!("line {i}: {e}")))?);
                }
                Ok(Loaded::Cylinders(CylinderConfig::new(lines).map_err(|e| IoError::Schema(e.to_string()))?))
            }
            ConfigFile::Balls { directions, radius } => {
                let dirs = directions
                    .iter()
                    .enumerate()
                    .map(|(i, d)| {
                        unit("directions", i, d)
                            .and_then(|v| UnitVec3::new(v).map_err(|e| IoError::Schema(e.to_string())))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Loaded::Balls(BallCluster::new(dirs, *radius).map_err(|e| IoError::Schema(e.to_string()))?))
            }
        }
    }
}

pub fn parse_config(text: &str) -> Result<Loaded, IoError> {
    serde_json::from_str::<ConfigFile>(text)?.validate()
}

pub fn load_config(path: &Path) -> Result<Loaded, IoError> {
    parse_config(&read_to_string(path)?)
}

pub fn config_to_json(c: &ConfigFile) -> String {
    serde_json::to_string_pretty(c).expect("config serializes")
}

pub fn save_config(path: &Path, c: &ConfigFile) -> Result<(), IoError> {
    write_string(path, &(config_to_json(c) + "\n"))
}

pub fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

pub fn write_string(path: &Path, s: &str) -> Result<(), IoError> {
    std::fs::write(path, s).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

/// `x` with 12 significant digits, in the shortest of fixed or exponent notation
/// (like C's `%.12g`). Negative zero prints as `0`.
pub fn sig12(x: f64) -> String {
    sig(x, 12)
}

pub fn sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}{:02}", trim(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

/// Triangle/polygon mesh split into named objects.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Vec<usize>>,
    /// (name, first face index) of each object.
    pub objects: Vec<(String, usize)>,
}

impl Mesh {
    pub fn begin(&mut self, name: &str) {
        self.objects.push((name.to_string(), self.faces.len()));
    }

    pub fn append(&mut self, other: &Mesh) {
        let off = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.faces.extend(other.faces.iter().map(|f| f.iter().map(|i| i + off).collect()));
    }

    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            writeln!(s, "v {} {} {}", sig12(v.x), sig12(v.y), sig12(v.z)).unwrap();
        }
        let mut starts = self.objects.iter().peekable();
        for (i, f) in self.faces.iter().enumerate() {
            while let Some((name, _)) = starts.next_if(|o| o.1 == i) {
                writeln!(s, "o {name}").unwrap();
            }
            s.push('f');
            for idx in f {
                write!(s, " {}", idx + 1).unwrap();
            }
            s.push('\n');
        }
        s
    }
}

/// Regular `sides`-gon prism of radius `r` around the line `point + s·dir`, |s| ≤ half.
pub fn prism(point: Vec3, dir: UnitVec3, r: f64, half: f64, sides: usize) -> Mesh {
    let d = dir.get();
    let e1 = dir.any_orthogonal().get();
    let e2 = d.cross(e1);
    let mut m = Mesh::default();
    for end in [-half, half] {
        for k in 0..sides {
            let a = 2.0 * std::f64::consts::PI * k as f64 / sides as f64;
            m.vertices.push(point + d * end + (e1 * a.cos() + e2 * a.sin()) * r);
        }
    }
    for k in 0..sides {
        let k1 = (k + 1) % sides;
        m.faces.push(vec![k, k1, sides + k1, sides + k]);
    }
    m.faces.push((0..sides).rev().collect());
    m.faces.push((sides..2 * sides).collect());
    m
}

/// Icosphere: the icosahedron subdivided `levels` times and projected to the sphere.
pub fn icosphere(center: Vec3, r: f64, levels: usize) -> Mesh {
    let mut verts: Vec<Vec3> = crate::geom3::Solid::Icosahedron.vertices().iter().map(|u| u.get()).collect();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let n = verts.len();
    let edge = (1..n).map(|k| (verts[0] - verts[k]).norm()).fold(f64::INFINITY, f64::min);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let close = |a: usize, b: usize| ((verts[a] - verts[b]).norm() - edge).abs() < 1e-9;
                if close(i, j) && close(j, k) && close(i, k) {
                    // orient outward
                    let nrm = (verts[j] - verts[i]).cross(verts[k] - verts[i]);
                    faces.push(if nrm.dot(verts[i]) > 0.0 { [i, j, k] } else { [i, k, j] });
                }
            }
        }
    }
    for _ in 0..levels {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = (verts[a] + verts[b]) * 0.5;
                verts.push(m / m.norm());
                verts.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    Mesh {
        vertices: verts.into_iter().map(|v| center + v * r).collect(),
        faces: faces.into_iter().map(|f| f.to_vec()).collect(),
        objects: Vec::new(),
    }
}

pub const PRISM_SIDES: usize = 32;
pub const PRISM_HALF_LENGTH: f64 = 4.0;
pub const SPHERE_LEVELS: usize = 3;

/// Unit sphere plus one prism per cylinder of radius `r`, centered at the tangent
/// point of the cylinder's axis.
pub fn cylinders_mesh(c: &CylinderConfig, r: f64) -> Mesh {
    let mut m = Mesh::default();
    m.begin("unit_sphere");
    m.append(&icosphere(Vec3::ZERO, 1.0, SPHERE_LEVELS));
    for (k, g) in c.lines().iter().enumerate() {
        m.begin(&format!("cylinder_{k}"));
        m.append(&prism(g.tangent_point().get() * (1.0 + r), g.direction(), r, PRISM_HALF_LENGTH, PRISM_SIDES));
    }
    m
}

/// Unit sphere plus the outer balls.
pub fn balls_mesh(b: &BallCluster) -> Mesh {
    let mut m = Mesh::default();
    m.begin("unit_sphere");
    m.append(&icosphere(Vec3::ZERO, 1.0, SPHERE_LEVELS));
    for (k, c) in b.centers().into_iter().enumerate() {
        m.begin(&format!("ball_{k}"));
        m.append(&icosphere(c, b.radius(), 2));
    }
    m
}

/// Counts read back from an OBJ file.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjSummary {
    pub vertices: usize,
    pub faces: usize,
    /// (name, vertex count referenced, face count) per object.
    pub objects: Vec<(String, usize, usize)>,
}

/// Minimal OBJ reader supporting `v`, `f` and `o` records, used to validate exports.
pub fn read_obj(text: &str) -> Result<ObjSummary, IoError> {
    let mut vertices = 0usize;
    let mut faces = 0usize;
    let mut objects: Vec<(String, std::collections::BTreeSet<usize>, usize)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let mut it = line.split_whitespace();
        match it.next() {
            None | Some("#") => {}
            Some("v") => {
                let xs: Vec<f64> = it
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| IoError::Obj { line: line_no, msg: e.to_string() })?;
                if xs.len() != 3 || xs.iter().any(|x| !x.is_finite()) {
                    return Err(IoError::Obj { line: line_no, msg: "vertex needs 3 finite coordinates".into() });
                }
                vertices += 1;
            }
            Some("o") => objects.push((it.collect::<Vec<_>>().join(" "), Default::default(), 0)),
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|t| t.split('/').next().unwrap_or("").parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| IoError::Obj { line: line_no, msg: e.to_string() })?;
                if idx.len() < 3 || idx.iter().any(|&i| i == 0 || i > vertices) {
                    return Err(IoError::Obj { line: line_no, msg: "face index out of range".into() });
                }
                faces += 1;
                if let Some(o) = objects.last_mut() {
                    o.1.extend(idx);
                    o.2 += 1;
                }
            }
            Some(other) => return Err(IoError::Obj { line: line_no, msg: format!("unsupported record `{other}`") }),
        }
    }
    Ok(ObjSummary { vertices, faces, objects: objects.into_iter().map(|(n, v, f)| (n, v.len(), f)).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balls::fcc_config;
    use crate::cylinders::{c6_config, o6_config};
    use crate::geom3::same_line_set;

    #[test]
    fn sig12_examples() {
        assert_eq!(sig12(1.0930703308172536), "1.09307033082");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(0.5), "0.5");
        assert_eq!(sig12(1e-9), "1e-09");
        assert_eq!(sig12(123456789012345.0), "1.23456789012e+14");
        assert_eq!(sig12(9.9999999999996), "10");
        assert_eq!(sig12(-2.5e-7), "-2.5e-07");
    }

    #[test]
    fn cylinder_round_trip() {
        for c in [c6_config(), o6_config()] {
            let text = config_to_json(&ConfigFile::from_cylinders(&c));
            let Loaded::Cylinders(back) = parse_config(&text).unwrap() else { panic!("kind") };
            assert!(same_line_set(c.lines(), back.lines(), 1e-12));
        }
    }

    #[test]
    fn ball_round_trip() {
        let b = fcc_config();
        let Loaded::Balls(back) = parse_config(&config_to_json(&ConfigFile::from_balls(&b))).unwrap() else {
            panic!("kind")
        };
        assert_eq!(back.radius(), b.radius());
        for (u, v) in b.directions().iter().zip(back.directions()) {
            assert!((u.get() - v.get()).norm() < 1e-12);
        }
    }

    #[test]
    fn schema_violations() {
        let bad = [
            r#"{"kind":"cylinders","tangent_points":[[1,0,0]],"directions":[]}"#,
            r#"{"kind":"cylinders","tangent_points":[[2,0,0],[0,1,0]],"directions":[[0,0,1],[0,0,1]]}"#,
            r#"{"kind":"cylinders","tangent_points":[[1,0,0],[0,1,0]],"directions":[[1,0,0],[0,0,1]]}"#,
            r#"{"kind":"spheres","directions":[]}"#,
            r#"{"kind":"balls","directions":[[1,0,0],[1,0,0]],"radius":1}"#,
        ];
        for b in bad {
            assert!(parse_config(b).is_err(), "{b}");
        }
        // slightly non-tangent directions are projected
        let ok = r#"{"kind":"cylinders","tangent_points":[[1,0,0],[0,1,0]],"directions":[[0.0000001,0,1],[0,0,1]]}"#;
        assert!(parse_config(ok).is_ok());
    }

    #[test]
    fn obj_export_reads_back() {
        let c = o6_config();
        let text = cylinders_mesh(&c, 1.0).to_obj();
        let s = read_obj(&text).unwrap();
        assert_eq!(s.objects.len(), 7);
        assert_eq!(s.objects[0], ("unit_sphere".to_string(), 642, 1280));
        for o in &s.objects[1..] {
            assert_eq!((o.1, o.2), (64, 34));
        }
        assert!(read_obj("f 1 2 3\n").is_err());
    }
}

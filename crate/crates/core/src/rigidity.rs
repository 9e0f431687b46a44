//! Numerical second-order certificates for local maximality of the common radius.
//!
//! Pipeline: local chart on the 3n-dimensional configuration manifold → active
//! pairs → finite-difference gradients → convex dependencies of the gradients →
//! kernel subspace E modulo rotations → restricted Hessian forms of the dependence
//! combinations → negative-definiteness or infeasibility of {q_i > 0}.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cylinders::{common_radius, pairwise_radius_unchecked, CylinderConfig};
use crate::geom3::{line_distance, TangentLine, UnitVec3, Vec3};
use crate::linalg::{column_space, jacobi_eigen, left_null_space, right_null_space, singular_values};

pub const ACTIVE_EPS: f64 = 1e-6;
pub const GRADIENT_STEP: f64 = 1e-5;
pub const GRADIENT_STABILITY: f64 = 1e-4;
pub const HESSIAN_STEP: f64 = 1e-3;
pub const HESSIAN_STABILITY: f64 = 1e-3;
/// Singular-value threshold of the gradient null space.
pub const KERNEL_THRESHOLD: f64 = 1e-8;
pub const DEPENDENCE_RESIDUAL: f64 = 1e-8;
pub const DEFINITENESS_THRESHOLD: f64 = -1e-8;
pub const INFEASIBILITY_THRESHOLD: f64 = 1e-8;
pub const MIN_STARTS: usize = 1000;
/// Generatrices with |t_i × t_j| below this are treated as parallel.
pub const PARALLEL_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RigidityError {
    #[error("gradient of constraint {row} unstable in coordinate {coordinate}: relative difference {rel_diff:e} between h and h/2")]
    GradientUnstable { row: usize, coordinate: usize, rel_diff: f64 },
    #[error("Hessian unstable: relative difference {rel_diff:e} between h and h/2")]
    HessianUnstable { rel_diff: f64 },
    #[error("common radius is unbounded; no active constraints")]
    UnboundedRadius,
}

fn rodrigues(axis: Vec3, angle: f64, v: Vec3) -> Vec3 {
    let (s, c) = angle.sin_cos();
    v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c))
}

/// Local coordinates around a base configuration. Cylinder k contributes
/// (a_k, b_k, c_k): the tangent point moves along the geodesic with initial
/// velocity a·e1 + b·e2, the direction is carried along by the minimal rotation,
/// and is then twisted by c about the new radial axis.
#[derive(Debug, Clone)]
pub struct Chart {
    base: CylinderConfig,
    frames: Vec<(Vec3, Vec3)>,
}

impl Chart {
    pub fn new(base: &CylinderConfig) -> Self {
        let frames = base
            .lines()
            .iter()
            .map(|g| {
                let u = g.tangent_point().get();
                let a = if u.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
                let e1 = a - u * u.dot(a);
                let e1 = e1 / e1.norm();
                (e1, u.cross(e1))
            })
            .collect();
        Chart { base: base.clone(), frames }
    }

    pub fn base(&self) -> &CylinderConfig {
        &self.base
    }

    pub fn dim(&self) -> usize {
        3 * self.base.len()
    }

    pub fn frame(&self, k: usize) -> (Vec3, Vec3) {
        self.frames[k]
    }

    /// Line k at local coordinates (a, b, c).
    pub fn map_line(&self, k: usize, abc: &[f64]) -> TangentLine {
        let g = self.base.lines()[k];
        if abc.iter().all(|&c| c == 0.0) {
            return g;
        }
        let (e1, e2) = self.frames[k];
        let u = g.tangent_point().get();
        let t = g.direction().get();
        let v = e1 * abc[0] + e2 * abc[1];
        let th = v.norm();
        let (u2, t2) = if th == 0.0 {
            (u, t)
        } else {
            let w = v / th;
            (u * th.cos() + w * th.sin(), rodrigues(u.cross(w), th, t))
        };
        let u2 = u2 / u2.norm();
        let t2 = t2 - u2 * u2.dot(t2);
        let t2 = t2 / t2.norm();
        let (s, c) = abc[2].sin_cos();
        let t3 = t2 * c + u2.cross(t2) * s;
        TangentLine::from_parts_unchecked(
            UnitVec3::new(u2).unwrap_or_else(|_| u2.normalize().expect("unit")),
            (t3 / t3.norm()).normalize().expect("unit"),
        )
    }

    pub fn map(&self, x: &[f64]) -> CylinderConfig {
        assert_eq!(x.len(), self.dim());
        CylinderConfig::new_unchecked((0..self.base.len()).map(|k| self.map_line(k, &x[3 * k..3 * k + 3])).collect())
    }

    /// Coordinates of `lines` (which must be near the base).
    pub fn inverse(&self, lines: &[TangentLine]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        for (k, g2) in lines.iter().enumerate() {
            let g = self.base.lines()[k];
            let (e1, e2) = self.frames[k];
            let u = g.tangent_point().get();
            let t = g.direction().get();
            let u2 = g2.tangent_point().get();
            let t2 = g2.direction().get();
            let c = u.dot(u2);
            let cr = u.cross(u2);
            // atan2 keeps full precision for tiny displacements
            let th = cr.norm().atan2(c);
            let w = u2 - u * c;
            let (v, tt) = if w.norm() == 0.0 {
                (Vec3::ZERO, t)
            } else {
                let w = w / w.norm();
                (w * th, rodrigues(u.cross(w), th, t))
            };
            let ang = u2.cross(tt).dot(t2).atan2(tt.dot(t2));
            x.extend_from_slice(&[v.dot(e1), v.dot(e2), ang]);
        }
        x
    }

    /// Chart velocities of the infinitesimal rotations about X, Y, Z (3n × 3).
    pub fn rotation_generators(&self) -> DMatrix<f64> {
        let n = self.base.len();
        let mut r = DMatrix::zeros(3 * n, 3);
        for (col, w) in [Vec3::X, Vec3::Y, Vec3::Z].into_iter().enumerate() {
            for (k, g) in self.base.lines().iter().enumerate() {
                let (e1, e2) = self.frames[k];
                let u = g.tangent_point().get();
                let t = g.direction().get();
                let du = w.cross(u);
                // transport along the geodesic turns t by (u × du) × t; the rest is twist
                let dc = (w.cross(t) - u.cross(du).cross(t)).dot(u.cross(t));
                r[(3 * k, col)] = du.dot(e1);
                r[(3 * k + 1, col)] = du.dot(e2);
                r[(3 * k + 2, col)] = dc;
            }
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConstraintFamily {
    /// Distance between the generatrices.
    GeneratrixDistance,
    /// Pairwise maximal radius (the functions whose minimum is r).
    PairwiseRadius,
}

impl ConstraintFamily {
    pub fn eval(self, a: &TangentLine, b: &TangentLine) -> f64 {
        match self {
            ConstraintFamily::GeneratrixDistance => line_distance(&a.as_line(), &b.as_line()),
            ConstraintFamily::PairwiseRadius => pairwise_radius_unchecked(a, b).as_f64(),
        }
    }
}

/// Pairs whose constraint value is within `eps` of the minimum over all pairs.
pub fn active_constraints_for(c: &CylinderConfig, eps: f64, family: ConstraintFamily) -> Vec<(usize, usize)> {
    let l = c.lines();
    let vals: Vec<((usize, usize), f64)> = c.pairs().map(|(i, j)| ((i, j), family.eval(&l[i], &l[j]))).collect();
    let m = vals.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    if !m.is_finite() {
        return Vec::new();
    }
    vals.into_iter().filter(|v| v.1 <= m + eps).map(|v| v.0).collect()
}

/// Pairs whose pairwise radius is within `eps` of the common radius.
pub fn active_constraints(c: &CylinderConfig, eps: f64) -> Vec<(usize, usize)> {
    active_constraints_for(c, eps, ConstraintFamily::PairwiseRadius)
}

/// Central-difference gradient of `f` at the origin of `dim` coordinates.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, dim: usize, h: f64) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    (0..dim)
        .map(|c| {
            x[c] = h;
            let p = f(&x);
            x[c] = -h;
            let m = f(&x);
            x[c] = 0.0;
            (p - m) / (2.0 * h)
        })
        .collect()
}

fn pair_function(chart: &Chart, (i, j): (usize, usize), family: ConstraintFamily) -> impl Fn(&[f64]) -> f64 + '_ {
    move |x: &[f64]| {
        let a = chart.map_line(i, &x[3 * i..3 * i + 3]);
        let b = chart.map_line(j, &x[3 * j..3 * j + 3]);
        family.eval(&a, &b)
    }
}

/// Gradients (rows) of the active constraints in chart coordinates.
///
/// Central differences at h and h/2 must agree to [`GRADIENT_STABILITY`]; the
/// returned rows are the Richardson extrapolation (4·G(h/2) − G(h))/3.
pub fn constraint_gradients(
    chart: &Chart,
    active: &[(usize, usize)],
    family: ConstraintFamily,
) -> Result<DMatrix<f64>, RigidityError> {
    let dim = chart.dim();
    let rows: Vec<Result<Vec<f64>, RigidityError>> = active
        .par_iter()
        .enumerate()
        .map(|(row, &ij)| {
            let f = pair_function(chart, ij, family);
            let g1 = fd_gradient(&f, dim, GRADIENT_STEP);
            let g2 = fd_gradient(&f, dim, GRADIENT_STEP / 2.0);
            let norm = g1.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let (coordinate, diff) = g1
                .iter()
                .zip(&g2)
                .map(|(a, b)| (a - b).abs())
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap_or((0, 0.0));
            let rel_diff = diff / norm;
            if rel_diff > GRADIENT_STABILITY || !rel_diff.is_finite() {
                return Err(RigidityError::GradientUnstable { row, coordinate, rel_diff });
            }
            Ok(g1.iter().zip(&g2).map(|(a, b)| (4.0 * b - a) / 3.0).collect())
        })
        .collect();
    let mut g = DMatrix::zeros(active.len(), dim);
    for (r, row) in rows.into_iter().enumerate() {
        let row = row?;
        for (c, v) in row.into_iter().enumerate() {
            g[(r, c)] = v;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexDependence {
    pub weights: Vec<f64>,
    /// ‖Gᵀλ‖.
    pub residual: f64,
}

/// Extreme rays of the cone {λ ≥ 0 : Gᵀλ = 0}, normalized to Σλ = 1.
///
/// With N a basis of the left null space (dimension k), every extreme ray vanishes
/// on k − 1 coordinates, so the rays are enumerated from the (k−1)-subsets of rows.
pub fn convex_dependencies(g: &DMatrix<f64>) -> Vec<ConvexDependence> {
    let m = g.nrows();
    if m == 0 {
        return Vec::new();
    }
    let smax = singular_values(g).first().copied().unwrap_or(0.0);
    let nl = left_null_space(g, 1e-7 * smax.max(1.0));
    let k = nl.ncols();
    if k == 0 {
        return Vec::new();
    }
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    if k == 1 {
        candidates.push(nl.column(0).into_owned());
    } else {
        for subset in combinations(m, k - 1) {
            let a = DMatrix::from_fn(k - 1, k, |r, c| nl[(subset[r], c)]);
            let z = right_null_space(&a, 1e-9);
            if z.ncols() != 1 {
                continue;
            }
            candidates.push(&nl * z.column(0));
        }
    }
    let mut out: Vec<ConvexDependence> = Vec::new();
    for lam in candidates {
        for sign in [1.0, -1.0] {
            let l = &lam * sign;
            if l.min() < -1e-9 || l.sum() <= 1e-9 {
                continue;
            }
            let mut w: Vec<f64> = l.iter().map(|v| v.max(0.0)).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            if out.iter().any(|d| d.weights.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-7)) {
                continue;
            }
            let residual = (g.transpose() * DVector::from_vec(w.clone())).norm();
            if residual < DEPENDENCE_RESIDUAL {
                out.push(ConvexDependence { weights: w, residual });
            }
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[derive(Debug, Clone)]
pub struct KernelSubspace {
    /// Orthonormal basis of E as columns (3n × dim_e).
    pub basis: DMatrix<f64>,
    /// Dimension of the gradient null space before removing rotations.
    pub dim_kernel: usize,
    pub dim_e: usize,
}

/// E: null space of the gradients, projected orthogonally to the rotation generators.
pub fn kernel_subspace(g: &DMatrix<f64>, chart: &Chart) -> KernelSubspace {
    let dim = chart.dim();
    let null = if g.nrows() == 0 { DMatrix::identity(dim, dim) } else { right_null_space(g, KERNEL_THRESHOLD) };
    let rot = column_space(&chart.rotation_generators(), 1e-9);
    let projected = &null - &rot * (rot.transpose() * &null);
    let basis = column_space(&projected, 1e-6);
    KernelSubspace { dim_kernel: null.ncols(), dim_e: basis.ncols(), basis }
}

/// Second derivatives of `f` at the origin along the columns of `basis`:
/// Q_ij = ∂²/∂s∂t f(s·b_i + t·b_j), by central differences with step `h`.
pub fn directional_hessian<F: Fn(&[f64]) -> f64 + Sync>(f: &F, basis: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let (dim, k) = basis.shape();
    let f0 = f(&vec![0.0; dim]);
    let at = |a: f64, i: usize, b: f64, j: usize| {
        let x: Vec<f64> = (0..dim).map(|r| a * basis[(r, i)] + b * basis[(r, j)]).collect();
        f(&x)
    };
    let entries: Vec<(usize, usize, f64)> = (0..k)
        .flat_map(|i| (i..k).map(move |j| (i, j)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, j)| {
            let v = if i == j {
                (at(h, i, 0.0, i) - 2.0 * f0 + at(-h, i, 0.0, i)) / (h * h)
            } else {
                (at(h, i, h, j) - at(h, i, -h, j) - at(-h, i, h, j) + at(-h, i, -h, j)) / (4.0 * h * h)
            };
            (i, j, v)
        })
        .collect();
    let mut q = DMatrix::zeros(k, k);
    for (i, j, v) in entries {
        q[(i, j)] = v;
        q[(j, i)] = v;
    }
    q
}

/// [`directional_hessian`] at h and h/2, checked for agreement to
/// [`HESSIAN_STABILITY`] and combined by Richardson extrapolation.
pub fn stable_hessian<F: Fn(&[f64]) -> f64 + Sync>(
    f: &F,
    basis: &DMatrix<f64>,
    h: f64,
) -> Result<DMatrix<f64>, RigidityError> {
    let q1 = directional_hessian(f, basis, h);
    let q2 = directional_hessian(f, basis, h / 2.0);
    let scale = q1.norm().max(q2.norm());
    let rel_diff = if scale > 0.0 { (&q1 - &q2).norm() / scale } else { 0.0 };
    if rel_diff > HESSIAN_STABILITY || !rel_diff.is_finite() {
        return Err(RigidityError::HessianUnstable { rel_diff });
    }
    Ok((q2 * 4.0 - q1) / 3.0)
}

/// For each dependence λ, the form Σλ_a·Hess(g_a) restricted to E, scaled to unit
/// Frobenius norm.
pub fn restricted_hessian_forms(
    chart: &Chart,
    active: &[(usize, usize)],
    family: ConstraintFamily,
    dependencies: &[ConvexDependence],
    e: &KernelSubspace,
) -> Result<Vec<DMatrix<f64>>, RigidityError> {
    dependencies
        .iter()
        .map(|dep| {
            let f = |x: &[f64]| {
                active
                    .iter()
                    .zip(&dep.weights)
                    .filter(|(_, &w)| w != 0.0)
                    .map(|(&(i, j), &w)| {
                        let a = chart.map_line(i, &x[3 * i..3 * i + 3]);
                        let b = chart.map_line(j, &x[3 * j..3 * j + 3]);
                        w * family.eval(&a, &b)
                    })
                    .sum::<f64>()
            };
            let q = stable_hessian(&f, &e.basis, HESSIAN_STEP)?;
            Ok(normalize_form(&q))
        })
        .collect()
}

fn normalize_form(q: &DMatrix<f64>) -> DMatrix<f64> {
    let s = (q + q.transpose()) * 0.5;
    let n = s.norm();
    if n > 0.0 {
        s / n
    } else {
        s
    }
}

/// (negative definite?, max eigenvalue) of `q` after unit Frobenius normalization.
pub fn check_negative_definite(q: &DMatrix<f64>) -> (bool, f64) {
    let e = jacobi_eigen(&normalize_form(q), 1e-12);
    let m = e.max();
    (m < DEFINITENESS_THRESHOLD, m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityCheck {
    pub infeasible: bool,
    /// Largest value of min_i q_i(x) found on the unit sphere of E.
    pub max_min: f64,
    pub witness: Vec<f64>,
    pub starts: usize,
    pub grid_points: usize,
}

fn quad(q: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(q * x))
}

fn min_form(forms: &[DMatrix<f64>], x: &DVector<f64>) -> (f64, usize) {
    forms
        .iter()
        .enumerate()
        .map(|(i, q)| (quad(q, x), i))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one form")
}

fn ascend(forms: &[DMatrix<f64>], x0: DVector<f64>, iters: usize) -> (f64, DVector<f64>) {
    let mut x = x0.normalize();
    let (mut best, _) = min_form(forms, &x);
    let mut best_x = x.clone();
    for k in 0..iters {
        let (_, i) = min_form(forms, &x);
        let mut g = &forms[i] * &x * 2.0;
        g -= &x * g.dot(&x);
        let step = 0.3 / (1.0 + k as f64).sqrt();
        x += g * step;
        x = x.normalize();
        let (v, _) = min_form(forms, &x);
        if v > best {
            best = v;
            best_x = x.clone();
        }
    }
    (best, best_x)
}

fn sphere_grid(dim: usize) -> Vec<DVector<f64>> {
    match dim {
        1 => vec![DVector::from_vec(vec![1.0]), DVector::from_vec(vec![-1.0])],
        2 => (0..3600)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / 3600.0;
                DVector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect(),
        3 => {
            let mut out = Vec::new();
            for i in 0..=200 {
                let lat = -PI / 2.0 + PI * i as f64 / 200.0;
                for j in 0..400 {
                    let lon = 2.0 * PI * j as f64 / 400.0;
                    out.push(DVector::from_vec(vec![lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]));
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Searches the unit sphere of E for a point where every form is positive.
///
/// Projected subgradient ascent of min_i q_i from `starts` seeded random points and
/// from the top eigenvectors of each form and of their average, plus a fine grid
/// when dim E ≤ 3. Infeasible iff the best value found is ≤ [`INFEASIBILITY_THRESHOLD`].
pub fn check_system_infeasible(forms: &[DMatrix<f64>], starts: usize, seed: u64) -> InfeasibilityCheck {
    assert!(!forms.is_empty(), "need at least one form");
    let dim = forms[0].nrows();
    if dim == 0 {
        return InfeasibilityCheck {
            infeasible: true,
            max_min: f64::NEG_INFINITY,
            witness: Vec::new(),
            starts: 0,
            grid_points: 0,
        };
    }
    let mut seeds: Vec<DVector<f64>> = Vec::new();
    let avg = forms.iter().fold(DMatrix::zeros(dim, dim), |a, q| a + q) / forms.len() as f64;
    for q in forms.iter().chain(std::iter::once(&avg)) {
        let e = jacobi_eigen(q, 1e-12);
        for c in 0..dim {
            let v = e.vectors.column(c).into_owned();
            seeds.push(v.clone());
            seeds.push(-v);
        }
    }
    let random: Vec<(f64, DVector<f64>)> = (0..starts)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(s as u64));
            let x0 = DVector::from_fn(dim, |_, _| {
                // Box–Muller
                let (a, b): (f64, f64) = (rng.gen_range(1e-12..1.0), rng.gen());
                (-2.0 * a.ln()).sqrt() * (2.0 * PI * b).cos()
            });
            ascend(forms, x0, 400)
        })
        .collect();
    let seeded: Vec<(f64, DVector<f64>)> = seeds.into_par_iter().map(|x0| ascend(forms, x0, 400)).collect();
    let grid = sphere_grid(dim);
    let grid_points = grid.len();
    let gridded: Vec<(f64, DVector<f64>)> = grid.into_par_iter().map(|x| (min_form(forms, &x).0, x)).collect();
    let (max_min, witness) = random
        .into_iter()
        .chain(seeded)
        .chain(gridded)
        .fold((f64::NEG_INFINITY, DVector::zeros(dim)), |acc, c| if c.0 > acc.0 { c } else { acc });
    InfeasibilityCheck {
        infeasible: max_min <= INFEASIBILITY_THRESHOLD,
        max_min,
        witness: witness.iter().copied().collect(),
        starts,
        grid_points,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexGridCheck {
    pub points: usize,
    /// Smallest max-eigenvalue over the grid (most negative-definite combination).
    pub best_max_eigenvalue: f64,
    pub best_weights: Vec<f64>,
    pub any_negative_definite: bool,
}

/// Weights (i_1/n, …, i_k/n) with Σi = n.
pub fn simplex_grid(k: usize, n: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for i in 0..=left {
            cur.push(i);
            rec(left - i, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(n, k, &mut Vec::new(), &mut raw);
    raw.into_iter().map(|v| v.into_iter().map(|i| i as f64 / n as f64).collect()).collect()
}

/// Tests convex combinations of the forms on a simplex grid of at least `min_points`
/// points for negative definiteness.
pub fn check_simplex_grid(forms: &[DMatrix<f64>], min_points: usize) -> SimplexGridCheck {
    let k = forms.len();
    let mut n = 1;
    let count = |n: usize| simplex_grid(k, n).len();
    while count(n) < min_points && k > 1 {
        n += 1;
    }
    let grid = simplex_grid(k, n);
    let dim = forms[0].nrows();
    let res: Vec<(f64, Vec<f64>)> = grid
        .par_iter()
        .map(|w| {
            let q = forms.iter().zip(w).fold(DMatrix::zeros(dim, dim), |a, (f, &wi)| a + f * wi);
            (check_negative_definite(&q).1, w.clone())
        })
        .collect();
    let (best, weights) = res.into_iter().fold((f64::INFINITY, Vec::new()), |acc, c| if c.0 < acc.0 { c } else { acc });
    SimplexGridCheck {
        points: grid.len(),
        best_max_eigenvalue: best,
        best_weights: weights,
        any_negative_definite: best < DEFINITENESS_THRESHOLD,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RigidityVerdict {
    NegativeDefinite,
    SystemInfeasible,
    Inconclusive,
}

impl std::fmt::Display for RigidityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RigidityVerdict::NegativeDefinite => "NEGATIVE_DEFINITE",
            RigidityVerdict::SystemInfeasible => "SYSTEM_INFEASIBLE",
            RigidityVerdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormSummary {
    pub max_eigenvalue: f64,
    pub min_eigenvalue: f64,
    pub negative_definite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityCertificate {
    pub family: ConstraintFamily,
    pub cylinders: usize,
    pub radius: f64,
    pub active_pairs: Vec<(usize, usize)>,
    /// max |∇g_a · R| over rows and rotation generators.
    pub rotation_residual: f64,
    pub dependencies: Vec<ConvexDependence>,
    pub dim_kernel: usize,
    pub dim_e: usize,
    pub rotations_removed: usize,
    pub forms: Vec<FormSummary>,
    pub system: Option<InfeasibilityCheck>,
    pub simplex_grid: Option<SimplexGridCheck>,
    pub verdict: RigidityVerdict,
    pub reason: String,
}

impl RigidityCertificate {
    fn inconclusive(
        family: ConstraintFamily,
        c: &CylinderConfig,
        radius: f64,
        active: Vec<(usize, usize)>,
        reason: String,
    ) -> Self {
        RigidityCertificate {
            family,
            cylinders: c.len(),
            radius,
            active_pairs: active,
            rotation_residual: f64::NAN,
            dependencies: Vec::new(),
            dim_kernel: 0,
            dim_e: 0,
            rotations_removed: 0,
            forms: Vec::new(),
            system: None,
            simplex_grid: None,
            verdict: RigidityVerdict::Inconclusive,
            reason,
        }
    }
}

/// Full pipeline for one constraint family.
///
/// A gradient stability failure is not propagated: it means the constraint is not
/// differentiable at `c`, so the certificate is INCONCLUSIVE with the failure as
/// its reason. Hessian instability is propagated.
pub fn certificate(
    c: &CylinderConfig,
    family: ConstraintFamily,
    seed: u64,
) -> Result<RigidityCertificate, RigidityError> {
    let radius = common_radius(c);
    if radius.is_unbounded() {
        return Err(RigidityError::UnboundedRadius);
    }
    let radius = radius.as_f64();
    let active = active_constraints_for(c, ACTIVE_EPS, family);
    if active.is_empty() {
        return Ok(RigidityCertificate::inconclusive(family, c, radius, active, "no active constraints".into()));
    }
    let l = c.lines();
    if let Some(&(i, j)) =
        active.iter().find(|&&(i, j)| l[i].direction().get().cross(l[j].direction().get()).norm() < PARALLEL_TOL)
    {
        let reason =
            format!("active pair ({i}, {j}) has parallel generatrices; the distance is not differentiable there");
        return Ok(RigidityCertificate::inconclusive(family, c, radius, active, reason));
    }
    let chart = Chart::new(c);
    let g = match constraint_gradients(&chart, &active, family) {
        Ok(g) => g,
        Err(e @ RigidityError::GradientUnstable { .. }) => {
            return Ok(RigidityCertificate::inconclusive(family, c, radius, active, e.to_string()));
        }
        Err(e) => return Err(e),
    };
    let rotation_residual = (&g * chart.rotation_generators()).abs().max();
    let dependencies = convex_dependencies(&g);
    let e = kernel_subspace(&g, &chart);
    let mut cert = RigidityCertificate {
        family,
        cylinders: c.len(),
        radius,
        active_pairs: active.clone(),
        rotation_residual,
        dependencies: dependencies.clone(),
        dim_kernel: e.dim_kernel,
        dim_e: e.dim_e,
        rotations_removed: e.dim_kernel.saturating_sub(e.dim_e),
        forms: Vec::new(),
        system: None,
        simplex_grid: None,
        verdict: RigidityVerdict::Inconclusive,
        reason: String::new(),
    };
    if dependencies.is_empty() {
        cert.reason = "no convex dependence of the active gradients: the configuration is not critical".into();
        return Ok(cert);
    }
    let forms = restricted_hessian_forms(&chart, &active, family, &dependencies, &e)?;
    cert.forms = forms
        .iter()
        .map(|q| {
            let eig = jacobi_eigen(q, 1e-12);
            let (nd, max) = check_negative_definite(q);
            FormSummary { max_eigenvalue: max, min_eigenvalue: eig.min(), negative_definite: nd }
        })
        .collect();
    if let Some(i) = cert.forms.iter().position(|f| f.negative_definite) {
        cert.verdict = RigidityVerdict::NegativeDefinite;
        cert.reason = format!("form of dependence {i} is negative definite on E (dim {})", e.dim_e);
    }
    if forms.len() >= 2 {
        let sys = check_system_infeasible(&forms, MIN_STARTS, seed);
        let grid = check_simplex_grid(&forms, 1000);
        if cert.verdict == RigidityVerdict::Inconclusive {
            if sys.infeasible {
                cert.verdict = RigidityVerdict::SystemInfeasible;
                cert.reason = format!(
                    "max over the unit sphere of E of min_i q_i is {:.3e} <= {:e} ({} forms, {} starts)",
                    sys.max_min,
                    INFEASIBILITY_THRESHOLD,
                    forms.len(),
                    sys.starts
                );
            } else {
                cert.reason = format!("all q_i > 0 at a found point (min_i q_i = {:.3e})", sys.max_min);
            }
        }
        cert.system = Some(sys);
        cert.simplex_grid = Some(grid);
    } else if cert.verdict == RigidityVerdict::Inconclusive {
        cert.reason =
            format!("single form is not negative definite (max eigenvalue {:.3e})", cert.forms[0].max_eigenvalue);
    }
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub seed: u64,
    /// Certificate for the pairwise-radius constraints (the default family).
    pub certificate: RigidityCertificate,
    /// The same pipeline on generatrix distances.
    pub generatrix: RigidityCertificate,
    pub active_sets_agree: bool,
    pub verdicts_agree: bool,
}

impl RigidityReport {
    pub fn verdict(&self) -> RigidityVerdict {
        self.certificate.verdict
    }
}

/// Runs both constraint families and compares them.
pub fn rigidity_report(c: &CylinderConfig, seed: u64) -> Result<RigidityReport, RigidityError> {
    let certificate = certificate(c, ConstraintFamily::PairwiseRadius, seed)?;
    let generatrix = crate::rigidity::certificate(c, ConstraintFamily::GeneratrixDistance, seed)?;
    Ok(RigidityReport {
        seed,
        active_sets_agree: certificate.active_pairs == generatrix.active_pairs,
        verdicts_agree: certificate.verdict == generatrix.verdict,
        certificate,
        generatrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinders::{c6_config, o6_config};
    use crate::geom3::Rotation;

    fn sample_config() -> CylinderConfig {
        o6_config().rotate(&Rotation::about_axis(Vec3::new(0.3, -0.2, 0.9).normalize().unwrap(), 0.4))
    }

    #[test]
    fn chart_origin_and_inverse() {
        let c = sample_config();
        let chart = Chart::new(&c);
        let zero = vec![0.0; chart.dim()];
        assert_eq!(chart.map(&zero), c);
        let x: Vec<f64> = (0..chart.dim()).map(|i| 0.3 * ((i as f64) * 1.7).sin()).collect();
        let back = chart.inverse(chart.map(&x).lines());
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn rotation_generators_match_finite_differences() {
        let c = sample_config();
        let chart = Chart::new(&c);
        let r = chart.rotation_generators();
        let h = 1e-6;
        for (col, ax) in [UnitVec3::X, UnitVec3::Y, UnitVec3::Z].into_iter().enumerate() {
            let p = chart.inverse(c.rotate(&Rotation::about_axis(ax, h)).lines());
            let m = chart.inverse(c.rotate(&Rotation::about_axis(ax, -h)).lines());
            for i in 0..chart.dim() {
                assert!(((p[i] - m[i]) / (2.0 * h) - r[(i, col)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn gradients_annihilate_rotations() {
        let c = sample_config();
        let chart = Chart::new(&c);
        let act = active_constraints(&c, ACTIVE_EPS);
        for fam in [ConstraintFamily::PairwiseRadius, ConstraintFamily::GeneratrixDistance] {
            let g = constraint_gradients(&chart, &act, fam).unwrap();
            assert!((&g * chart.rotation_generators()).abs().max() < 1e-6);
        }
    }

    #[test]
    fn trivial_dependence() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]);
        let d = convex_dependencies(&g);
        assert_eq!(d.len(), 1);
        assert!((d[0].weights[0] - 0.5).abs() < 1e-15 && (d[0].weights[1] - 0.5).abs() < 1e-15);
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(convex_dependencies(&g).is_empty());
        // a dependence with a negative weight is not convex
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]);
        assert!(convex_dependencies(&g).is_empty());
    }

    #[test]
    fn empty_gradients_leave_everything_but_rotations() {
        let chart = Chart::new(&sample_config());
        let e = kernel_subspace(&DMatrix::zeros(0, chart.dim()), &chart);
        assert_eq!(e.dim_kernel, 18);
        assert_eq!(e.dim_e, 15);
    }

    #[test]
    fn hessian_of_quadratic_oracle() {
        let a = DMatrix::from_fn(5, 5, |i, j| ((i + 2 * j) as f64).cos() + ((2 * i + j) as f64).cos());
        let f = |x: &[f64]| 0.5 * DVector::from_column_slice(x).dot(&(&a * DVector::from_column_slice(x))) + x[0];
        let basis = DMatrix::identity(5, 5);
        let q = stable_hessian(&f, &basis, HESSIAN_STEP).unwrap();
        assert!((q - &a).abs().max() < 1e-6);
    }

    #[test]
    fn definiteness_examples() {
        let (nd, m) = check_negative_definite(&DMatrix::from_diagonal(&nalgebra::dvector![-1.0, -2.0]));
        assert!(nd);
        assert!((m + 1.0 / 5.0_f64.sqrt()).abs() < 1e-12);
        let (nd, m) = check_negative_definite(&DMatrix::from_diagonal(&nalgebra::dvector![-1.0, 1.0]));
        assert!(!nd && m > 0.0);
    }

    #[test]
    fn infeasibility_examples() {
        let q1 = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0]);
        let q2 = -&q1;
        let r = check_system_infeasible(&[q1.clone(), q2], 1000, 0);
        assert!(r.infeasible && r.max_min.abs() < 1e-12, "{r:?}");
        let x2 = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 0.0, 0.0]);
        let r = check_system_infeasible(&[x2], 1000, 0);
        assert!(!r.infeasible);
        assert!((r.witness[0].abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn simplex_grid_size() {
        assert_eq!(simplex_grid(3, 44).len(), 1035);
        assert!(simplex_grid(3, 44).iter().all(|w| (w.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn c6_is_inconclusive() {
        let r = rigidity_report(&c6_config(), 0).unwrap();
        assert_eq!(r.verdict(), RigidityVerdict::Inconclusive);
        assert_eq!(r.certificate.active_pairs.len(), 6);
    }
}

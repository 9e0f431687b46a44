//! The D3-symmetric three-parameter deformation of C6, the curve γ of inner
//! optima, and the record configuration C_m.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cylinders::{common_radius, is_pure_geodetic, CylinderConfig, Rational};
use crate::geom3::{line_distance, TangentLine, UnitVec3};
use crate::optimize::{golden_max, nelder_mead_max, NelderMeadOptions};

/// Search range for φ.
pub const PHI_MAX: f64 = 0.8;
/// Box for the inner search over ϰ.
pub const KAPPA_BOUND: f64 = 0.5;
/// Number of multi-start points of the inner search.
pub const INNER_STARTS: usize = 20;
/// Grid of the outer search in [`find_cm`].
pub const CM_GRID: usize = 64;
const INNER_SEED: u64 = 0x00D3_5EED;

/// (3 + √33)/8.
pub fn r_m() -> f64 {
    (3.0 + 33.0_f64.sqrt()) / 8.0
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnlockError {
    #[error("|phi| must be below pi/2, got {0}")]
    PhiOutOfRange(f64),
    #[error("inner optimization did not converge at phi = {phi} ({detail})")]
    NonConvergence { phi: f64, detail: String },
    #[error("find_cm stalled: best radius {best} is {gap:e} away from the target in every sign variant")]
    Stall { best: f64, gap: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct D3Params {
    pub phi: f64,
    pub kappa: f64,
    pub delta: f64,
}

impl D3Params {
    pub const ZERO: D3Params = D3Params { phi: 0.0, kappa: 0.0, delta: 0.0 };

    pub fn new(phi: f64, kappa: f64, delta: f64) -> Self {
        D3Params { phi, kappa, delta }
    }
}

/// Sign conventions of the family: the sense of the ϰ shift and of the δ twist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignVariant {
    pub kappa_sign: i8,
    pub delta_sign: i8,
}

impl SignVariant {
    pub const AS_WRITTEN: SignVariant = SignVariant { kappa_sign: 1, delta_sign: 1 };
    pub const ALL: [SignVariant; 4] = [
        SignVariant { kappa_sign: 1, delta_sign: 1 },
        SignVariant { kappa_sign: -1, delta_sign: 1 },
        SignVariant { kappa_sign: 1, delta_sign: -1 },
        SignVariant { kappa_sign: -1, delta_sign: -1 },
    ];
}

impl Default for SignVariant {
    fn default() -> Self {
        SignVariant::AS_WRITTEN
    }
}

fn family_lines(p: D3Params, v: SignVariant) -> Vec<TangentLine> {
    let (sd, cd) = (p.delta * v.delta_sign as f64).sin_cos();
    (0..6)
        .map(|k| {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            // `+ 0.0` folds −0 into +0 so the identity reproduces C6 bit for bit
            let lat = s * p.phi + 0.0;
            let lon = k as f64 * PI / 3.0 - s * v.kappa_sign as f64 * p.kappa;
            let north = TangentLine::north_at(lat, lon);
            let u = north.tangent_point();
            let n = north.direction().get();
            let t = n * cd + u.get().cross(n) * sd;
            TangentLine::from_parts_unchecked(u, UnitVec3::new(t).unwrap_or_else(|_| t.normalize().expect("unit")))
        })
        .collect()
}

/// The six cylinders of the family: the even triple moves up by φ and west by ϰ,
/// the odd triple mirrors it, and every direction is twisted by δ.
pub fn d3_family(p: D3Params) -> Result<CylinderConfig, UnlockError> {
    d3_family_variant(p, SignVariant::AS_WRITTEN)
}

pub fn d3_family_variant(p: D3Params, v: SignVariant) -> Result<CylinderConfig, UnlockError> {
    if !(p.phi.abs() < FRAC_PI_2) {
        return Err(UnlockError::PhiOutOfRange(p.phi));
    }
    Ok(CylinderConfig::new_unchecked(family_lines(p, v)))
}

/// Smallest generatrix distance of the family. r = d/(2 − d) is increasing in d,
/// so the inner searches maximize this cheaper quantity.
fn min_distance(p: D3Params, v: SignVariant) -> f64 {
    let l = family_lines(p, v);
    let mut m = f64::INFINITY;
    for i in 0..6 {
        for j in i + 1..6 {
            m = m.min(line_distance(&l[i].as_line(), &l[j].as_line()));
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPoint {
    pub phi: f64,
    pub kappa_star: f64,
    pub delta_star: f64,
    pub r_star: f64,
}

impl GammaPoint {
    pub fn params(&self) -> D3Params {
        D3Params::new(self.phi, self.kappa_star, self.delta_star)
    }
}

fn inner_options() -> NelderMeadOptions {
    NelderMeadOptions { scale: vec![0.05, 0.05], x_tol: 1e-12, max_evals: 6000, restarts: 6 }
}

fn inner_objective(phi: f64, v: SignVariant) -> impl Fn(&[f64]) -> f64 {
    move |x: &[f64]| {
        if x[0].abs() > KAPPA_BOUND || x[1].abs() >= FRAC_PI_2 {
            return f64::NEG_INFINITY;
        }
        min_distance(D3Params::new(phi, x[0], x[1]), v)
    }
}

/// Deterministic start points: the origin followed by seeded uniform draws in the box.
pub fn inner_starts() -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(INNER_SEED);
    let mut out = vec![[0.0, 0.0]];
    while out.len() < INNER_STARTS {
        out.push([rng.gen_range(-KAPPA_BOUND..KAPPA_BOUND), rng.gen_range(-1.5..1.5)]);
    }
    out
}

/// Maximizes the common radius over (ϰ, δ) for fixed φ by multi-start simplex search.
pub fn gamma_point(phi: f64) -> Result<GammaPoint, UnlockError> {
    gamma_point_variant(phi, SignVariant::AS_WRITTEN)
}

pub fn gamma_point_variant(phi: f64, v: SignVariant) -> Result<GammaPoint, UnlockError> {
    if !(phi.abs() < FRAC_PI_2) {
        return Err(UnlockError::PhiOutOfRange(phi));
    }
    let f = inner_objective(phi, v);
    let opts = inner_options();
    let mut best: Option<(f64, [f64; 2])> = None;
    let mut any_converged = false;
    for s in inner_starts() {
        let res = nelder_mead_max(&f, &s, &opts);
        any_converged |= res.converged;
        if best.is_none_or(|b| res.value > b.0) {
            best = Some((res.value, [res.x[0], res.x[1]]));
        }
    }
    let (d, x) = best.expect("at least one start");
    if !any_converged || !d.is_finite() {
        return Err(UnlockError::NonConvergence {
            phi,
            detail: format!("no start reached the 1e-12 simplex tolerance; best distance {d}"),
        });
    }
    local_gamma_point(phi, x, v)
}

/// Single local search from `start`, reported with the exact common radius.
fn local_gamma_point(phi: f64, start: [f64; 2], v: SignVariant) -> Result<GammaPoint, UnlockError> {
    let res = nelder_mead_max(inner_objective(phi, v), &start, &inner_options());
    let p = D3Params::new(phi, res.x[0], res.x[1]);
    let r = common_radius(&d3_family_variant(p, v)?).as_f64();
    Ok(GammaPoint { phi, kappa_star: p.kappa, delta_star: p.delta, r_star: r })
}

/// γ sampled at `n` uniform values of φ in [0, [`PHI_MAX`]].
pub fn gamma_curve(n: usize) -> Result<Vec<GammaPoint>, UnlockError> {
    gamma_curve_variant(n, SignVariant::AS_WRITTEN)
}

pub fn gamma_curve_variant(n: usize, v: SignVariant) -> Result<Vec<GammaPoint>, UnlockError> {
    assert!(n >= 2, "gamma_curve needs at least 2 samples");
    (0..n).into_par_iter().map(|i| gamma_point_variant(PHI_MAX * i as f64 / (n - 1) as f64, v)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmResult {
    pub params: D3Params,
    #[serde(skip)]
    pub config: Option<CylinderConfig>,
    pub radius: f64,
    pub variant: SignVariant,
    /// Sign variants tried before the passing one.
    pub tried: Vec<SignVariant>,
    /// Whether the final KKT polish was accepted.
    pub polished: bool,
}

impl CmResult {
    pub fn config(&self) -> CylinderConfig {
        match &self.config {
            Some(c) => c.clone(),
            None => d3_family_variant(self.params, self.variant).expect("stored parameters are valid"),
        }
    }
}

/// The record configuration: maximum of r along γ.
///
/// The outer search samples γ on a 64-point grid, refines by golden section, and
/// polishes the result by Newton's method on the first-order optimality system of
/// the distinct active distance functions over (φ, ϰ, δ).
pub fn find_cm() -> Result<CmResult, UnlockError> {
    let mut tried = Vec::new();
    let mut best: Option<CmResult> = None;
    for v in SignVariant::ALL {
        let res = find_cm_variant(v)?;
        let ok = (res.radius - r_m()).abs() <= 1e-6;
        if ok {
            return Ok(CmResult { tried, ..res });
        }
        tried.push(v);
        if best.as_ref().is_none_or(|b| res.radius > b.radius) {
            best = Some(res);
        }
    }
    let b = best.expect("four variants tried");
    Err(UnlockError::Stall { best: b.radius, gap: (b.radius - r_m()).abs() })
}

pub fn find_cm_variant(v: SignVariant) -> Result<CmResult, UnlockError> {
    let curve = gamma_curve_variant(CM_GRID, v)?;
    let k = (0..curve.len()).max_by(|&a, &b| curve[a].r_star.total_cmp(&curve[b].r_star)).expect("nonempty");
    let lo = curve[k.saturating_sub(1)].phi;
    let hi = curve[(k + 1).min(curve.len() - 1)].phi;
    let warm = [curve[k].kappa_star, curve[k].delta_star];
    let mut err = None;
    let (phi, _) = golden_max(
        |phi| match local_gamma_point(phi, warm, v) {
            Ok(g) => g.r_star,
            Err(e) => {
                err = Some(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
        1e-12,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let g = local_gamma_point(phi, warm, v)?;
    let mut params = g.params();
    let mut radius = g.r_star;
    let mut polished = false;
    if let Some(p) = kkt_polish(params, v) {
        let r = common_radius(&d3_family_variant(p, v)?).as_f64();
        if r >= radius - 1e-12 {
            params = p;
            radius = r;
            polished = true;
        }
    }
    let config = d3_family_variant(params, v)?;
    Ok(CmResult { params, config: Some(config), radius, variant: v, tried: Vec::new(), polished })
}

fn pair_distance(p: D3Params, v: SignVariant, (i, j): (usize, usize)) -> f64 {
    let l = family_lines(p, v);
    line_distance(&l[i].as_line(), &l[j].as_line())
}

fn shifted(p: D3Params, dx: [f64; 3]) -> D3Params {
    D3Params::new(p.phi + dx[0], p.kappa + dx[1], p.delta + dx[2])
}

/// One representative pair per distinct distance function among the pairs active at `p`.
fn active_classes(p: D3Params, v: SignVariant, tol: f64) -> Vec<(usize, usize)> {
    let dmin = min_distance(p, v);
    let probes = [[1e-3, 2e-3, -1.5e-3], [-2e-3, 1e-3, 1e-3]];
    let mut reps: Vec<((usize, usize), [f64; 2])> = Vec::new();
    for i in 0..6 {
        for j in i + 1..6 {
            if pair_distance(p, v, (i, j)) > dmin + tol {
                continue;
            }
            let sig =
                [pair_distance(shifted(p, probes[0]), v, (i, j)), pair_distance(shifted(p, probes[1]), v, (i, j))];
            if !reps.iter().any(|(_, s)| (s[0] - sig[0]).abs() < 1e-10 && (s[1] - sig[1]).abs() < 1e-10) {
                reps.push(((i, j), sig));
            }
        }
    }
    reps.into_iter().map(|r| r.0).collect()
}

fn class_gradient(p: D3Params, v: SignVariant, ij: (usize, usize), h: f64) -> [f64; 3] {
    let mut g = [0.0; 3];
    for (c, gc) in g.iter_mut().enumerate() {
        let mut e = [0.0; 3];
        e[c] = h;
        let plus = pair_distance(shifted(p, e), v, ij);
        e[c] = -h;
        let minus = pair_distance(shifted(p, e), v, ij);
        *gc = (plus - minus) / (2.0 * h);
    }
    g
}

/// Residual of the optimality system in unknowns (x, λ):
/// Σλ_i ∇d_i = 0, Σλ_i = 1, d_1 = d_i.
fn kkt_residual(p: D3Params, lam: &[f64], classes: &[(usize, usize)], v: SignVariant) -> DVector<f64> {
    let k = classes.len();
    let mut f = DVector::zeros(k + 3);
    let d0 = pair_distance(p, v, classes[0]);
    for (a, &ij) in classes.iter().enumerate() {
        let g = class_gradient(p, v, ij, 1e-5);
        for c in 0..3 {
            f[c] += lam[a] * g[c];
        }
        if a > 0 {
            f[3 + a] = pair_distance(p, v, ij) - d0;
        }
    }
    f[3] = lam.iter().sum::<f64>() - 1.0;
    f
}

fn kkt_polish(p0: D3Params, v: SignVariant) -> Option<D3Params> {
    let classes = active_classes(p0, v, 1e-7);
    let k = classes.len();
    if k < 2 {
        return None;
    }
    // least-squares multipliers: [∇d_i ; 1] λ = [0 ; 1]
    let mut a = DMatrix::zeros(4, k);
    for (i, &ij) in classes.iter().enumerate() {
        let g = class_gradient(p0, v, ij, 1e-5);
        for c in 0..3 {
            a[(c, i)] = g[c];
        }
        a[(3, i)] = 1.0;
    }
    let b = DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]);
    let lam0 = a.svd(true, true).solve(&b, 1e-12).ok()?;
    let mut z = DVector::zeros(3 + k);
    z[0] = p0.phi;
    z[1] = p0.kappa;
    z[2] = p0.delta;
    z.rows_mut(3, k).copy_from(&lam0);
    let unpack = |z: &DVector<f64>| (D3Params::new(z[0], z[1], z[2]), z.rows(3, k).iter().copied().collect::<Vec<_>>());
    let eval = |z: &DVector<f64>| {
        let (p, l) = unpack(z);
        kkt_residual(p, &l, &classes, v)
    };
    let mut f = eval(&z);
    for _ in 0..30 {
        if f.norm() < 1e-14 {
            break;
        }
        let n = 3 + k;
        let mut jac = DMatrix::zeros(n, n);
        for c in 0..n {
            let h = if c < 3 { 1e-4 } else { 1e-6 };
            let mut zp = z.clone();
            zp[c] += h;
            let mut zm = z.clone();
            zm[c] -= h;
            jac.set_column(c, &((eval(&zp) - eval(&zm)) / (2.0 * h)));
        }
        let step = jac.svd(true, true).solve(&f, 1e-12).ok()?;
        let znew = &z - step;
        let fnew = eval(&znew);
        if fnew.norm() >= f.norm() {
            break;
        }
        z = znew;
        f = fnew;
    }
    let (p, lam) = unpack(&z);
    let moved = ((p.phi - p0.phi).powi(2) + (p.kappa - p0.kappa).powi(2) + (p.delta - p0.delta).powi(2)).sqrt();
    (moved < 1e-4 && lam.iter().all(|&l| l > -1e-9) && f.norm() < 1e-9).then_some(p)
}

/// Rational values of sin² of the three angles, when they are pure geodetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticScan {
    pub phi: Option<Rational>,
    pub kappa: Option<Rational>,
    pub delta: Option<Rational>,
}

pub fn geodetic_scan(p: D3Params, qmax: i64, tol: f64) -> GeodeticScan {
    GeodeticScan {
        phi: is_pure_geodetic(p.phi, qmax, tol),
        kappa: is_pure_geodetic(p.kappa, qmax, tol),
        delta: is_pure_geodetic(p.delta, qmax, tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinders::{c6_config, contact_graph};
    use crate::geom3::{same_line_set, Rotation};

    fn cm_closed_form() -> D3Params {
        D3Params::new((3.0_f64 / 11.0).sqrt().asin(), -(0.25_f64).asin(), -(5.0_f64.sqrt() / 4.0).asin())
    }

    #[test]
    fn identity_is_c6_exactly() {
        assert_eq!(d3_family(D3Params::ZERO).unwrap(), c6_config());
    }

    #[test]
    fn rejects_polar_phi() {
        assert_eq!(d3_family(D3Params::new(FRAC_PI_2, 0.0, 0.0)), Err(UnlockError::PhiOutOfRange(FRAC_PI_2)));
        assert!(gamma_point(-2.0).is_err());
    }

    #[test]
    fn family_is_d3_symmetric() {
        let third = Rotation::about_axis(UnitVec3::Z, 2.0 * PI / 3.0);
        let flip = Rotation::about_axis(UnitVec3::from_lat_lon(0.0, PI / 6.0), PI);
        for p in [D3Params::new(0.3, 0.1, -0.4), D3Params::new(-0.7, -0.45, 1.2), cm_closed_form()] {
            for v in SignVariant::ALL {
                let c = d3_family_variant(p, v).unwrap();
                assert!(same_line_set(c.lines(), c.rotate(&third).lines(), 1e-10));
                assert!(same_line_set(c.lines(), c.rotate(&flip).lines(), 1e-10));
            }
        }
    }

    #[test]
    fn record_point_closed_form() {
        // the closed-form angles reproduce r_m, with 12 contacts, four per cylinder
        let c = d3_family(cm_closed_form()).unwrap();
        assert!((common_radius(&c).as_f64() - r_m()).abs() < 1e-13);
        let g = contact_graph(&c, 1e-9);
        assert_eq!(g.pairs.len(), 12);
        assert_eq!(g.degrees(), vec![4; 6]);
        for opposite in [(0, 3), (1, 4), (2, 5)] {
            assert!(!g.pairs.contains(&opposite));
        }
    }

    #[test]
    fn gamma_at_zero_is_c6() {
        let g = gamma_point(0.0).unwrap();
        assert!((g.r_star - 1.0).abs() < 1e-12, "{g:?}");
        assert!(g.kappa_star.abs() < 1e-6 && g.delta_star.abs() < 1e-6, "{g:?}");
    }

    #[test]
    fn gamma_point_is_locally_optimal() {
        for phi in [0.2, 0.5, 0.7] {
            let g = gamma_point(phi).unwrap();
            let r = |k: f64, d: f64| common_radius(&d3_family(D3Params::new(phi, k, d)).unwrap()).as_f64();
            assert!((r(g.kappa_star, g.delta_star) - g.r_star).abs() < 1e-10);
            for (dk, dd) in [(1e-4, 0.0), (-1e-4, 0.0), (0.0, 1e-4), (0.0, -1e-4)] {
                assert!(r(g.kappa_star + dk, g.delta_star + dd) <= g.r_star + 1e-7, "phi {phi}");
            }
        }
    }

    #[test]
    fn geodetic_scan_of_record_angles() {
        let s = geodetic_scan(cm_closed_form(), 64, 1e-9);
        assert_eq!(s.phi, Some(Rational { p: 3, q: 11 }));
        assert_eq!(s.kappa, Some(Rational { p: 1, q: 16 }));
        assert_eq!(s.delta, Some(Rational { p: 5, q: 16 }));
    }
}

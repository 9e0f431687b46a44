//! Derivative-free 1-D and 2-D search used by the radius maximizations.

/// Result of a local maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`,
/// stopping when the bracket is narrower than `tol`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 200 {
        iters += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let (mut best_x, mut best_f) = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [a, b] {
        let fx = f(x);
        if fx > best_f {
            best_x = x;
            best_f = fx;
        }
    }
    (best_x, best_f)
}

/// Bisection for a sign change of `f` on `[a, b]`. Runs until the midpoint
/// coincides with an endpoint or the bracket is below `tol`.
/// Returns `None` when `f(a)` and `f(b)` have the same strict sign.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) || (b - a).abs() <= tol {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    /// Initial simplex edge length per coordinate.
    pub scale: Vec<f64>,
    /// Stop when the simplex diameter falls below this.
    pub x_tol: f64,
    pub max_evals: usize,
    /// Number of restarts from the best vertex with a fresh simplex.
    pub restarts: usize,
}

/// Nelder-Mead maximization with restarts. The restarts re-expand the simplex
/// around the incumbent, which matters for the nonsmooth min-of-radii objectives.
pub fn nelder_mead_max<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> MaxResult {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut best_x = x0.to_vec();
    let mut best_f = eval(&best_x, &mut evals);
    let mut converged = false;
    for round in 0..=opts.restarts {
        let shrink = 0.25_f64.powi(round as i32);
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best_x.clone(), best_f));
        for i in 0..n {
            let mut x = best_x.clone();
            x[i] += opts.scale[i] * shrink.max(1e-6);
            let fx = eval(&x, &mut evals);
            simplex.push((x, fx));
        }
        converged = false;
        while evals < opts.max_evals {
            simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
            let diam = simplex
                .iter()
                .skip(1)
                .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if diam < opts.x_tol {
                converged = true;
                break;
            }
            let centroid: Vec<f64> =
                (0..n).map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64).collect();
            let worst = simplex[n].clone();
            let along = |c: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(m, w)| m + c * (m - w)).collect() };
            let xr = along(1.0);
            let fr = eval(&xr, &mut evals);
            if fr > simplex[0].1 {
                let xe = along(2.0);
                let fe = eval(&xe, &mut evals);
                simplex[n] = if fe > fr { (xe, fe) } else { (xr, fr) };
            } else if fr > simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr > worst.1 {
                    let x = along(0.5);
                    let v = eval(&x, &mut evals);
                    (x, v)
                } else {
                    let x = along(-0.5);
                    let v = eval(&x, &mut evals);
                    (x, v)
                };
                if fc > worst.1.max(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let b = simplex[0].0.clone();
                    for v in simplex.iter_mut().skip(1) {
                        let x: Vec<f64> = v.0.iter().zip(&b).map(|(xi, bi)| bi + 0.5 * (xi - bi)).collect();
                        let fx = eval(&x, &mut evals);
                        *v = (x, fx);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let improved = simplex[0].1 > best_f;
        if simplex[0].1 >= best_f {
            best_x = simplex[0].0.clone();
            best_f = simplex[0].1;
        }
        if round > 0 && !improved && converged {
            break;
        }
        if evals >= opts.max_evals {
            break;
        }
    }
    MaxResult { x: best_x, value: best_f, evals, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_smooth_and_kinked_maxima() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-7 && v.abs() < 1e-14);
        let (x, _) = golden_max(|x| (x - 0.1).min(0.7 - x), 0.0, 1.0, 1e-12);
        assert!((x - 0.4).abs() < 1e-11);
    }

    #[test]
    fn bisect_examples() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 0.0).unwrap();
        assert!((r - 2.0_f64.sqrt()).abs() < 1e-15);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 0.0).is_none());
    }

    #[test]
    fn nelder_mead_nonsmooth() {
        let opts = NelderMeadOptions { scale: vec![0.1, 0.1], x_tol: 1e-12, max_evals: 20_000, restarts: 4 };
        let res = nelder_mead_max(|x| -((x[0] - 1.0).abs() + 2.0 * (x[1] + 0.5).abs()), &[0.0, 0.0], &opts);
        assert!((res.x[0] - 1.0).abs() < 1e-9 && (res.x[1] + 0.5).abs() < 1e-9, "{:?}", res);
        let res = nelder_mead_max(|x| -(x[0] - 2.0).powi(2) - 10.0 * (x[1] - x[0] * x[0]).powi(2), &[0.0, 0.0], &opts);
        assert!((res.x[0] - 2.0).abs() < 1e-5, "{:?}", res);
    }
}

//! Small dense linear algebra: cyclic Jacobi eigen-solver for symmetric
//! matrices and SVD-based null spaces.

use nalgebra::DMatrix;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: DMatrix<f64>,
    pub sweeps: usize,
}

impl SymmetricEigen {
    pub fn max(&self) -> f64 {
        *self.values.last().unwrap_or(&f64::NEG_INFINITY)
    }

    pub fn min(&self) -> f64 {
        *self.values.first().unwrap_or(&f64::INFINITY)
    }
}

/// Cyclic Jacobi iteration. Rotations are applied until the off-diagonal
/// Frobenius norm falls below `tol` times the matrix Frobenius norm.
///
/// The input is symmetrized as `(A + A^T) / 2` first.
pub fn jacobi_eigen(a: &DMatrix<f64>, tol: f64) -> SymmetricEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eigen needs a square matrix");
    let mut m = (a + a.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let mut sweeps = 0;
    while sweeps < 100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= tol * scale {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    SymmetricEigen { values, vectors, sweeps }
}

/// Orthonormal basis (as columns) of `{x : A x = 0}`, using singular values below `threshold`.
pub fn right_null_space(a: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if m == 0 {
        return DMatrix::identity(n, n);
    }
    // Pad with zero rows so the thin SVD returns a complete right basis.
    let mut padded = DMatrix::zeros(m.max(n), n);
    padded.view_mut((0, 0), (m, n)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let cols: Vec<_> = (0..n).filter(|&i| svd.singular_values[i] < threshold).map(|i| vt.row(i).transpose()).collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis (as columns) of `{y : A^T y = 0}`.
pub fn left_null_space(a: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    right_null_space(&a.transpose(), threshold)
}

/// Singular values in descending order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Orthonormal basis of the column space of `a`, dropping directions with
/// singular value below `rel_threshold * max singular value`.
pub fn column_space(a: &DMatrix<f64>, rel_threshold: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if n == 0 || m == 0 {
        return DMatrix::zeros(m, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_threshold * smax)
        .map(|i| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonal_examples() {
        let e = jacobi_eigen(&DMatrix::from_diagonal(&nalgebra::dvector![-1.0, -2.0]), 1e-12);
        assert_eq!(e.values, vec![-2.0, -1.0]);
        assert_eq!(e.max(), -1.0);
        let e = jacobi_eigen(&DMatrix::from_diagonal(&nalgebra::dvector![-1.0, 1.0]), 1e-12);
        assert_eq!(e.max(), 1.0);
    }

    #[test]
    fn jacobi_matches_nalgebra_and_reconstructs() {
        let n = 7;
        let b = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64).sin() + 0.1 * (i as f64));
        let a = &b + b.transpose();
        let e = jacobi_eigen(&a, 1e-14);
        let mut reference: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(|x, y| x.total_cmp(y));
        for (x, y) in e.values.iter().zip(&reference) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone()));
        let rec = &e.vectors * d * e.vectors.transpose();
        assert!((rec - a).norm() < 1e-10);
    }

    #[test]
    fn null_spaces() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let n = right_null_space(&a, 1e-10);
        assert_eq!(n.ncols(), 1);
        assert!((n[(2, 0)].abs() - 1.0).abs() < 1e-14);
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]);
        let l = left_null_space(&g, 1e-10);
        assert_eq!(l.ncols(), 1);
        assert!((l[(0, 0)] - l[(1, 0)]).abs() < 1e-14);
        assert_eq!(right_null_space(&DMatrix::zeros(0, 4), 1e-8).ncols(), 4);
    }
}

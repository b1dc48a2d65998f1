//! Small dense helpers: a cyclic Jacobi eigensolver for symmetric matrices
//! and a few matrix utilities shared by the other modules.

use nalgebra::{DMatrix, DVector};

const MAX_SWEEPS: usize = 80;
/// Relative off-diagonal threshold, `|a_pq| <= tol * sqrt(|a_pp a_qq|)`.
const RELATIVE_TOL: f64 = 1e-15;

/// Eigen-decomposition of a symmetric matrix, eigenvalues in ascending order.
/// Column `k` of `vectors` belongs to `values[k]`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
    pub sweeps: usize,
}

/// Cyclic Jacobi sweep on a symmetric matrix.
///
/// Only the upper triangle is read. A rotation is skipped once the pivot is
/// negligible relative to the geometric mean of its diagonal entries, which
/// keeps tiny eigenvalues of positive definite (graded) matrices accurate to
/// high relative precision. This criterion implies the usual absolute one
/// (`|a_pq| < 1e-13 * max|a|`).
pub fn symmetric_eigen(matrix: &DMatrix<f64>) -> SymmetricEigen {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "symmetric_eigen needs a square matrix");
    let mut a = DMatrix::from_fn(n, n, |i, j| {
        if i <= j {
            matrix[(i, j)]
        } else {
            matrix[(j, i)]
        }
    });
    let mut v = DMatrix::<f64>::identity(n, n);

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                if apq.abs() <= RELATIVE_TOL * (app * aqq).abs().sqrt()
                    || apq.abs() < f64::MIN_POSITIVE
                {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        a[(r, p)] = c * arp - s * arq;
                        a[(p, r)] = a[(r, p)];
                        a[(r, q)] = s * arp + c * arq;
                        a[(q, r)] = a[(r, q)];
                    }
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
        sweeps += 1;
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| a[(k, k)]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut column = v.column(k).clone_owned();
        fix_sign(&mut column);
        vectors.set_column(col, &column);
    }
    SymmetricEigen {
        values,
        vectors,
        sweeps,
    }
}

/// Flips `v` so that its first non-negligible entry is positive.
pub fn fix_sign(v: &mut DVector<f64>) {
    let scale = v.amax();
    if scale == 0.0 {
        return;
    }
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * scale) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
}

/// `diag(d) * m * diag(d)`.
pub fn diag_sandwich(d: &[f64], m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| d[i] * m[(i, j)] * d[j])
}

/// Largest absolute entry, `‖M‖_max`.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input_is_untouched() {
        let m = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let eig = symmetric_eigen(&m);
        assert_eq!(eig.values.as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(eig.vectors.column(0).as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn two_by_two_swap() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let eig = symmetric_eigen(&m);
        assert!((eig.values[0] + 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((eig.vectors[(0, 0)] - h).abs() < 1e-15);
        assert!((eig.vectors[(1, 0)] + h).abs() < 1e-15);
    }

    #[test]
    fn reconstructs_hilbert_like_matrix() {
        let n = 6;
        let m = DMatrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64);
        let eig = symmetric_eigen(&m);
        let recon = &eig.vectors * DMatrix::from_diagonal(&eig.values) * eig.vectors.transpose();
        assert!(max_abs(&(recon - &m)) < 1e-14);
        let orth = eig.vectors.transpose() * &eig.vectors - DMatrix::identity(n, n);
        assert!(max_abs(&orth) < 1e-14);
        // Smallest eigenvalue of the 6x6 Hilbert matrix, relative accuracy.
        assert!((eig.values[0] / 1.082_799_484_565_5e-7 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sign_convention() {
        let mut v = DVector::from_vec(vec![0.0, -0.6, 0.8]);
        fix_sign(&mut v);
        assert_eq!(v.as_slice(), &[0.0, 0.6, -0.8]);
    }
}

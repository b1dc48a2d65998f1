//! Independent oracles and generators shared by the integration tests.
//!
//! Nothing here calls the closed forms under test: determinants and inverses
//! come from exact Gaussian elimination or nalgebra's LU, Gramians from
//! quadrature or a Kronecker-form Lyapunov solve.

#![allow(dead_code, clippy::needless_range_loop)]

use actuator_design::scalar::Rational;
use nalgebra::{DMatrix, DVector};
use num::{BigInt, One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact value of a float.
pub fn exact(x: f64) -> Rational {
    Rational::from_float(x).expect("finite")
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().expect("representable")
}

/// `[1/(αᵢ+βⱼ)]` with exact entries.
pub fn cauchy_exact(alphas: &[Rational], betas: &[Rational]) -> Vec<Vec<Rational>> {
    alphas
        .iter()
        .map(|a| betas.iter().map(|b| Rational::one() / (a + b)).collect())
        .collect()
}

/// Determinant by fraction-exact Gaussian elimination.
pub fn exact_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= &a[col][col];
        for row in col + 1..n {
            let factor = &a[row][col] / &a[col][col];
            for k in col..n {
                let delta = &factor * &a[col][k];
                a[row][k] -= delta;
            }
        }
    }
    det
}

/// Inverse by fraction-exact Gauss–Jordan elimination.
pub fn exact_inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot, col);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v /= &p;
        }
        for row in 0..n {
            if row != col && !a[row][col].is_zero() {
                let factor = a[row][col].clone();
                for k in 0..2 * n {
                    let delta = &factor * &a[col][k];
                    a[row][k] -= delta;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn lu_det(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}

/// `[[a, b], [c, d]]⁻¹ = [[d, −b], [−c, a]] / (ad − bc)`.
pub fn adjugate_inverse_2x2(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let det = a * d - b * c;
    DMatrix::from_row_slice(2, 2, &[d / det, -b / det, -c / det, a / det])
}

/// Smaller eigenvalue of a symmetric 2×2 matrix in closed form.
pub fn min_eigenvalue_2x2(m: &DMatrix<f64>) -> f64 {
    let (a, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + c * c).sqrt();
    // The product of the eigenvalues is exact enough to recover the small one.
    let large = mean + radius;
    (a * d - c * c) / large
}

pub fn psi_f64(lambda: &[f64]) -> DMatrix<f64> {
    let n = lambda.len();
    DMatrix::from_fn(n, n, |i, j| 1.0 / (lambda[i] + lambda[j]))
}

pub fn gramian_f64(lambda: &[f64], b: &[f64]) -> DMatrix<f64> {
    let n = lambda.len();
    DMatrix::from_fn(n, n, |i, j| b[i] * b[j] / (lambda[i] + lambda[j]))
}

/// Increasing spectrum with `λ₁ ∈ [lo, hi]` and consecutive gaps in
/// `[gap_lo, gap_hi]`.
pub fn random_spectrum<R: Rng>(
    rng: &mut R,
    n: usize,
    (lo, hi): (f64, f64),
    (gap_lo, gap_hi): (f64, f64),
) -> Vec<f64> {
    let mut values = vec![rng.random_range(lo..hi)];
    for _ in 1..n {
        let last = *values.last().unwrap();
        values.push(last + rng.random_range(gap_lo..gap_hi));
    }
    values
}

pub fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Haar-distributed orthogonal matrix from the QR factorization of a
/// Gaussian matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `∫₀ᵀ e^{−Λt} bbᵀ e^{−Λt} dt` by composite Simpson with `intervals` panels.
pub fn simpson_gramian(lambda: &[f64], b: &[f64], horizon: f64, intervals: usize) -> DMatrix<f64> {
    assert!(intervals.is_multiple_of(2));
    let n = lambda.len();
    let h = horizon / intervals as f64;
    let mut total = DMatrix::zeros(n, n);
    for k in 0..=intervals {
        let t = k as f64 * h;
        let weight = if k == 0 || k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let v = DVector::from_fn(n, |i, _| (-lambda[i] * t).exp() * b[i]);
        total += &v * v.transpose() * weight;
    }
    total * (h / 3.0)
}

/// Solves `AW + WAᵀ = bbᵀ` through `(I ⊗ A + A ⊗ I) vec W = vec bbᵀ`.
pub fn kronecker_lyapunov(a: &DMatrix<f64>, b: &[f64]) -> DMatrix<f64> {
    let n = b.len();
    let eye = DMatrix::<f64>::identity(n, n);
    let k = eye.kronecker(a) + a.kronecker(&eye);
    let bb = DVector::from_column_slice(b) * DVector::from_column_slice(b).transpose();
    let rhs = DVector::from_column_slice(bb.as_slice());
    let w = k.lu().solve(&rhs).expect("Lyapunov operator is invertible");
    DMatrix::from_column_slice(n, n, w.as_slice())
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

pub fn rational_sign(x: &Rational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// `(−1, 1, −1, …)`.
pub fn alternating(n: usize) -> Vec<i8> {
    (0..n).map(|i| if i % 2 == 0 { -1 } else { 1 }).collect()
}

//! The infinite-horizon Gramian `W(b) = diag(b) Ψ diag(b)` of the diagonal
//! system and its extreme eigen-data.

use nalgebra::DMatrix;

use crate::cauchy::build_psi;
use crate::error::{Error, Result};
use crate::linalg::{diag_sandwich, max_abs, symmetric_eigen, SymmetricEigen};
use crate::spectrum::{check_dim, Spectrum, UnitVector};

#[derive(Clone, Debug)]
pub struct Gramian {
    actuator: UnitVector,
    matrix: DMatrix<f64>,
}

/// An eigenvalue with a unit eigenvector.
#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: UnitVector,
}

pub fn build_gramian(spectrum: &Spectrum, b: &UnitVector) -> Result<Gramian> {
    check_dim(spectrum.dim(), b.dim())?;
    let psi = build_psi(spectrum);
    Ok(Gramian {
        actuator: b.clone(),
        matrix: diag_sandwich(b.as_slice(), psi.entries()),
    })
}

/// `diag(v) Ψ diag(v)` for an arbitrary (not necessarily unit) vector.
pub fn gramian_matrix(spectrum: &Spectrum, v: &[f64]) -> Result<DMatrix<f64>> {
    check_dim(spectrum.dim(), v.len())?;
    Ok(diag_sandwich(v, build_psi(spectrum).entries()))
}

impl Gramian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn actuator(&self) -> &UnitVector {
        &self.actuator
    }

    pub fn dim(&self) -> usize {
        self.actuator.dim()
    }

    /// Number of zero entries of `b`, which equals the rank deficiency of `W(b)`.
    pub fn rank_deficiency(&self) -> usize {
        self.actuator
            .as_slice()
            .iter()
            .filter(|&&x| x == 0.0)
            .count()
    }

    pub fn eigen(&self) -> SymmetricEigen {
        symmetric_eigen(&self.matrix)
    }

    /// Smallest eigenvalue `ξ(b)` with its eigenvector, first nonzero entry
    /// positive. Off Z the value is exactly zero and the vector is some
    /// kernel vector.
    pub fn smallest_eigenpair(&self) -> Eigenpair {
        let eig = self.eigen();
        let value = if self.actuator.zero_entry().is_some() {
            0.0
        } else {
            eig.values[0]
        };
        Eigenpair {
            value,
            vector: UnitVector::from_unit_unchecked(eig.vectors.column(0).clone_owned()),
        }
    }

    /// `max_{‖x‖=1} xᵀW(b)⁻¹x = 1/λ_min W(b)`, infinite for singular `W(b)`.
    pub fn worst_energy(&self) -> f64 {
        let xi = self.smallest_eigenpair().value;
        if xi <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / xi
        }
    }

    /// `‖ΛW + WΛ − bbᵀ‖_max`, the algebraic Lyapunov identity that the
    /// integral definition of the Gramian implies.
    pub fn lyapunov_residual(&self, spectrum: &Spectrum) -> f64 {
        let lambda = spectrum.eigenvalues();
        let b = self.actuator.as_slice();
        let n = self.dim();
        let residual = DMatrix::from_fn(n, n, |i, j| {
            (lambda[i] + lambda[j]) * self.matrix[(i, j)] - b[i] * b[j]
        });
        max_abs(&residual)
    }
}

/// Gramian of `ẋ = Ax + bu` for a general symmetric positive definite `A`,
/// from the Lyapunov equation `AW + WA = bbᵀ` solved as an `n² × n²` linear
/// system. Independent of the eigendecomposition of `A`.
pub fn lyapunov_gramian(a: &DMatrix<f64>, b: &[f64]) -> Result<DMatrix<f64>> {
    let n = b.len();
    if a.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.nrows(),
        });
    }
    let m = n * n;
    let mut kron = DMatrix::zeros(m, m);
    for j in 0..n {
        for i in 0..n {
            let row = i + n * j;
            for k in 0..n {
                kron[(row, k + n * j)] += a[(i, k)];
                kron[(row, i + n * k)] += a[(j, k)];
            }
        }
    }
    let rhs = nalgebra::DVector::from_fn(m, |row, _| b[row % n] * b[row / n]);
    let solution = kron.lu().solve(&rhs).ok_or(Error::SingularGramian)?;
    Ok(DMatrix::from_column_slice(n, n, solution.as_slice()))
}

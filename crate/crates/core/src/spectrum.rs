//! Problem definition: validated spectra, unit vectors, and the reduction of a
//! symmetric positive definite system matrix to its diagonal form.

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, symmetric_eigen};
use crate::scalar::Field;

/// Tolerance on `‖ΘΘᵀ − I‖_max` accepted from the eigensolver.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Relative tolerance on `‖ΘΛΘᵀ − A‖_max / ‖A‖_max`.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Allowed deviation of a [`UnitVector`]'s norm from one.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Eigenvalues `0 < λ₁ < … < λₙ` of a completely unstable symmetric system.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T = f64> {
    eigenvalues: Vec<T>,
}

impl<T: Field> Spectrum<T> {
    /// Sorts and validates; violations are rejected, never repaired.
    pub fn validate(values: &[T]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if values.len() > T::MAX_DIM {
            return Err(Error::DimensionTooLarge {
                n: values.len(),
                max: T::MAX_DIM,
            });
        }
        for (index, value) in values.iter().enumerate() {
            let approx = value.to_f64();
            if !approx.is_finite() {
                return Err(Error::NonFiniteValue { index });
            }
            if !(value > &T::zero()) {
                return Err(Error::NonPositiveEigenvalue {
                    index,
                    value: approx,
                });
            }
        }
        let mut eigenvalues = values.to_vec();
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).expect("finite values are ordered"));
        for pair in eigenvalues.windows(2) {
            if T::indistinct(&pair[0], &pair[1]) {
                return Err(Error::DuplicateEigenvalue {
                    first: pair[0].to_f64(),
                    second: pair[1].to_f64(),
                });
            }
        }
        Ok(Spectrum { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Float copy of the spectrum (rounded to nearest for exact spectra).
    pub fn to_float(&self) -> Spectrum<f64> {
        Spectrum {
            eigenvalues: self.eigenvalues.iter().map(Field::to_f64).collect(),
        }
    }
}

impl Spectrum<f64> {
    pub fn smallest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `Λ = diag(λ₁, …, λₙ)`.
    pub fn diagonal(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues))
    }
}

/// Float-mode validation, see [`Spectrum::validate`].
pub fn validate_spectrum(values: &[f64]) -> Result<Spectrum> {
    Spectrum::validate(values)
}

/// A point of the unit sphere `S^{n−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(DVector<f64>);

impl UnitVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(index) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        let v = DVector::from_vec(entries);
        let norm = v.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotUnitVector { norm });
        }
        Ok(UnitVector(v))
    }

    /// Scales a nonzero vector onto the sphere.
    pub fn normalize(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(index) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        let v = DVector::from_vec(entries);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(UnitVector(v / norm))
    }

    pub fn from_vector(v: DVector<f64>) -> Result<Self> {
        Self::new(v.data.into())
    }

    /// `e_index` in dimension `n`.
    pub fn basis(n: usize, index: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[index] = 1.0;
        UnitVector(v)
    }

    pub(crate) fn from_unit_unchecked(v: DVector<f64>) -> Self {
        debug_assert!((v.norm() - 1.0).abs() < 1e-9);
        UnitVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    /// Index of the first exactly-zero entry, if any (the point is then off Z).
    pub fn zero_entry(&self) -> Option<usize> {
        self.0.iter().position(|&x| x == 0.0)
    }

    pub fn negated(&self) -> Self {
        UnitVector(-&self.0)
    }

    /// Entrywise signs in {−1, 0, 1}.
    pub fn signs(&self) -> Vec<i8> {
        self.0.iter().map(|&x| sign_of(x)).collect()
    }
}

impl Serialize for UnitVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(serializer)
    }
}

pub(crate) fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// `A = ΘΛΘᵀ` with `A` symmetric positive definite.
#[derive(Clone, Debug)]
pub struct SymmetricSystem {
    matrix: DMatrix<f64>,
    theta: DMatrix<f64>,
    spectrum: Spectrum,
}

impl SymmetricSystem {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Orthogonal eigenbasis; column `k` belongs to the `k`-th smallest eigenvalue.
    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// `‖ΘΛΘᵀ − A‖_max`.
    pub fn reconstruction_residual(&self) -> f64 {
        let recon = &self.theta * self.spectrum.diagonal() * self.theta.transpose();
        max_abs(&(recon - &self.matrix))
    }

    /// `‖ΘΘᵀ − I‖_max`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.dim();
        max_abs(&(&self.theta * self.theta.transpose() - DMatrix::identity(n, n)))
    }
}

/// Decomposes a symmetric positive definite matrix into `ΘΛΘᵀ`.
pub fn diagonalize(a: &DMatrix<f64>) -> Result<SymmetricSystem> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::EmptyInput);
    }
    if rows > f64::MAX_DIM {
        return Err(Error::DimensionTooLarge {
            n: rows,
            max: f64::MAX_DIM,
        });
    }
    if let Some(index) = a.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteValue { index });
    }
    for row in 0..rows {
        for col in row + 1..cols {
            if a[(row, col)] != a[(col, row)] {
                return Err(Error::NotSymmetric { row, col });
            }
        }
    }

    let eig = symmetric_eigen(a);
    let spectrum = validate_spectrum(eig.values.as_slice())?;
    let system = SymmetricSystem {
        matrix: a.clone(),
        theta: eig.vectors,
        spectrum,
    };

    let scale = max_abs(a);
    let recon = system.reconstruction_residual();
    if recon > RECONSTRUCTION_TOL * scale {
        return Err(Error::InternalInvariant(format!(
            "eigendecomposition reconstruction residual {recon:e} exceeds {:e}",
            RECONSTRUCTION_TOL * scale
        )));
    }
    let orth = system.orthogonality_residual();
    if orth > ORTHOGONALITY_TOL {
        return Err(Error::InternalInvariant(format!(
            "eigenbasis orthogonality residual {orth:e} exceeds {ORTHOGONALITY_TOL:e}"
        )));
    }
    Ok(system)
}

/// Maps an actuator found for the diagonal system back to original
/// coordinates: `b = Θ b′`.
pub fn pull_back_actuator(system: &SymmetricSystem, b_diag: &UnitVector) -> Result<UnitVector> {
    pull_back(system, b_diag)
}

/// Same map as [`pull_back_actuator`]; used for initial states as well.
pub fn pull_back(system: &SymmetricSystem, v: &UnitVector) -> Result<UnitVector> {
    check_dim(system.dim(), v.dim())?;
    Ok(UnitVector::from_unit_unchecked(
        &system.theta * v.as_vector(),
    ))
}

/// Inverse of [`pull_back`]: `v′ = Θᵀ v`.
pub fn push_forward(system: &SymmetricSystem, v: &UnitVector) -> Result<UnitVector> {
    check_dim(system.dim(), v.dim())?;
    Ok(UnitVector::from_unit_unchecked(
        system.theta.transpose() * v.as_vector(),
    ))
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

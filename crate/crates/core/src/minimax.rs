//! Closed-form solution of the worst-case energy minimax problem.
//!
//! With `w = σ*Ψ⁻¹σ*1` (entrywise positive because `Ψ⁻¹` is a checkerboard
//! matrix), the optimal value is `φ = 1ᵀw`, the optimal actuator `v*` has
//! `v*ᵢ² = wᵢ/φ`, and the optimal (initial state, actuator) pairs are
//! `(±σv*, σσ*v*)` for every signature matrix `σ`.

use nalgebra::DVector;

use crate::cauchy::{build_psi, checkerboard_conjugate, psi_inverse, SignatureMatrix};
use crate::error::{Error, Result};
use crate::gramian::gramian_matrix;
use crate::scalar::{Field, Rational};
use crate::spectrum::{check_dim, Spectrum, UnitVector};

/// `φ`, `w = σ*Ψ⁻¹σ*1` and `v*²` in the arithmetic of the spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForm<T> {
    pub phi: T,
    pub weights: Vec<T>,
    pub v_star_squared: Vec<T>,
}

/// Row sums of `σ*Ψ⁻¹σ*`; every entry must come out strictly positive.
pub fn positivity_certificate<T: Field>(spectrum: &Spectrum<T>) -> Result<Vec<T>> {
    let conj = checkerboard_conjugate(&psi_inverse(&build_psi(spectrum)));
    let n = spectrum.dim();
    let weights: Vec<T> = (0..n)
        .map(|i| (0..n).fold(T::zero(), |acc, j| acc + conj[(i, j)].clone()))
        .collect();
    if let Some(i) = weights.iter().position(|w| !(w > &T::zero())) {
        return Err(Error::InternalInvariant(format!(
            "entry {i} of the positivity certificate is {:?}",
            weights[i]
        )));
    }
    Ok(weights)
}

pub fn closed_form<T: Field>(spectrum: &Spectrum<T>) -> Result<ClosedForm<T>> {
    let weights = positivity_certificate(spectrum)?;
    let phi = weights.iter().fold(T::zero(), |acc, w| acc + w.clone());
    let v_star_squared = weights.iter().map(|w| w.clone() / phi.clone()).collect();
    Ok(ClosedForm {
        phi,
        weights,
        v_star_squared,
    })
}

/// One element of `arg φ`: `x = sign·σv*`, `b = σσ*v*`.
#[derive(Clone, Debug)]
pub struct OptimalPair {
    pub x: UnitVector,
    pub b: UnitVector,
    pub sigma: SignatureMatrix,
    /// `+1` or `−1`, the global sign on `x`.
    pub sign: i8,
}

#[derive(Clone, Debug)]
pub struct MinimaxSolution {
    phi: f64,
    xi_star: f64,
    v_star: UnitVector,
    weights: Vec<f64>,
}

impl MinimaxSolution {
    pub fn from_closed_form<T: Field>(closed: &ClosedForm<T>) -> Result<Self> {
        let phi = closed.phi.to_f64();
        let v_star = closed
            .v_star_squared
            .iter()
            .map(|v| v.to_f64().sqrt())
            .collect();
        let v_star = UnitVector::new(v_star)
            .map_err(|e| Error::InternalInvariant(format!("v* is not a unit vector: {e}")))?;
        Ok(MinimaxSolution {
            phi,
            xi_star: 1.0 / phi,
            v_star,
            weights: closed.weights.iter().map(Field::to_f64).collect(),
        })
    }

    /// Worst-case energy of the optimal actuator.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `1/φ`, the largest attainable smallest Gramian eigenvalue.
    pub fn xi_star(&self) -> f64 {
        self.xi_star
    }

    /// The optimal actuator with all-positive entries.
    pub fn v_star(&self) -> &UnitVector {
        &self.v_star
    }

    /// `σ*Ψ⁻¹σ*1`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.v_star.dim()
    }

    /// `|arg φ| = 2^{n+1}`.
    pub fn arg_phi_count(&self) -> usize {
        1usize << (self.dim() + 1)
    }

    /// The `2ⁿ` critical points `σv*` of `ξ` on Z, indexed like
    /// [`SignatureMatrix::all`].
    pub fn critical_points(&self) -> impl Iterator<Item = UnitVector> + '_ {
        SignatureMatrix::all(self.dim()).map(move |sigma| self.signed(&sigma))
    }

    /// Lazily enumerates `arg φ` as `(±σv*, σσ*v*)`, `+` before `−` for each `σ`.
    pub fn arg_phi(&self) -> impl Iterator<Item = OptimalPair> + '_ {
        let n = self.dim();
        let alternating = SignatureMatrix::alternating(n);
        SignatureMatrix::all(n).flat_map(move |sigma| {
            let x = self.signed(&sigma);
            let b = self.signed(&sigma.compose(&alternating));
            [1i8, -1].map(|sign| OptimalPair {
                x: if sign > 0 { x.clone() } else { x.negated() },
                b: b.clone(),
                sigma: sigma.clone(),
                sign,
            })
        })
    }

    fn signed(&self, sigma: &SignatureMatrix) -> UnitVector {
        UnitVector::from_unit_unchecked(DVector::from_vec(sigma.apply(self.v_star.as_slice())))
    }
}

/// Float-mode closed-form solution.
pub fn solve(spectrum: &Spectrum) -> Result<MinimaxSolution> {
    MinimaxSolution::from_closed_form(&closed_form(spectrum)?)
}

/// Exact-mode solution; `φ` and `v*²` stay rational.
pub fn solve_exact(
    spectrum: &Spectrum<Rational>,
) -> Result<(ClosedForm<Rational>, MinimaxSolution)> {
    let closed = closed_form(spectrum)?;
    let solution = MinimaxSolution::from_closed_form(&closed)?;
    Ok((closed, solution))
}

/// Minimum steering energy `xᵀW(b)⁻¹x`, infinite when `b` has a zero entry.
pub fn energy_at(spectrum: &Spectrum, x: &UnitVector, b: &UnitVector) -> Result<f64> {
    check_dim(spectrum.dim(), x.dim())?;
    check_dim(spectrum.dim(), b.dim())?;
    Ok(energy_at_unchecked(spectrum, x.as_slice(), b.as_slice()))
}

/// [`energy_at`] for arbitrary, not necessarily normalized, vectors of the
/// right length, via `W(b)⁻¹ = diag(b)⁻¹ Ψ⁻¹ diag(b)⁻¹`.
pub fn energy_at_unchecked(spectrum: &Spectrum, x: &[f64], b: &[f64]) -> f64 {
    if b.contains(&0.0) {
        return f64::INFINITY;
    }
    let inv = psi_inverse(&build_psi(spectrum));
    let scaled: Vec<f64> = x.iter().zip(b).map(|(xi, bi)| xi / bi).collect();
    let n = scaled.len();
    let mut energy = 0.0;
    for i in 0..n {
        for j in 0..n {
            energy += scaled[i] * inv[(i, j)] * scaled[j];
        }
    }
    energy
}

/// `(‖W(b)x − ξx‖, ‖W(x)b − ξb‖)` for a candidate pair.
pub fn pair_residuals(
    spectrum: &Spectrum,
    x: &UnitVector,
    b: &UnitVector,
    xi: f64,
) -> Result<(f64, f64)> {
    let wb = gramian_matrix(spectrum, b.as_slice())?;
    let wx = gramian_matrix(spectrum, x.as_slice())?;
    let (x, b) = (x.as_vector(), b.as_vector());
    Ok(((wb * x - x * xi).norm(), (wx * b - b * xi).norm()))
}

//! The Cauchy matrix `Ψ = [1/(λᵢ+λⱼ)]`, its closed-form determinant and
//! inverse, and the signature matrices that expose its sign structure.
//!
//! Everything here is generic over [`Field`] so the same formulas run in
//! double precision and in exact rational arithmetic. Generic elimination is
//! deliberately absent: the closed forms are the computation path.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Field;
use crate::spectrum::Spectrum;

/// `Ψ` for a validated spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyGram<T: Field = f64> {
    lambdas: Vec<T>,
    entries: DMatrix<T>,
}

impl<T: Field> CauchyGram<T> {
    pub fn eigenvalues(&self) -> &[T] {
        &self.lambdas
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// `det Ψ` from the product formula.
    pub fn det(&self) -> T {
        cauchy_det(&self.lambdas, &self.lambdas).expect("validated spectrum is non-empty")
    }

    pub fn inverse(&self) -> DMatrix<T> {
        psi_inverse(self)
    }
}

pub fn build_psi<T: Field>(spectrum: &Spectrum<T>) -> CauchyGram<T> {
    let lambdas = spectrum.eigenvalues().to_vec();
    let n = lambdas.len();
    let entries = DMatrix::from_fn(n, n, |i, j| {
        T::one() / (lambdas[i].clone() + lambdas[j].clone())
    });
    CauchyGram { lambdas, entries }
}

/// Product formula
/// `∏ₖ 1/(αₖ+βₖ) · ∏_{i<j} (αⱼ−αᵢ)/(αᵢ+αⱼ) · (βⱼ−βᵢ)/(βᵢ+βⱼ)`.
///
/// For `α = β` this is exactly `det[1/(αᵢ+αⱼ)]`, the only case `Ψ` needs.
/// For `α ≠ β` it is not the determinant of `[1/(αᵢ+βⱼ)]` (the classical
/// Cauchy determinant has `(αᵢ+βⱼ)(αⱼ+βᵢ)` in the pair denominators); it
/// is still positive for increasing lists and satisfies the one-step
/// recursion [`cauchy_det_step`].
pub fn cauchy_det<T: Field>(alphas: &[T], betas: &[T]) -> Result<T> {
    if alphas.len() != betas.len() {
        return Err(Error::LengthMismatch {
            left: alphas.len(),
            right: betas.len(),
        });
    }
    if alphas.is_empty() {
        return Err(Error::EmptyInput);
    }
    let all_positive = alphas
        .iter()
        .all(|a| betas.iter().all(|b| a.clone() + b.clone() > T::zero()));
    if !all_positive {
        return Err(Error::InvalidConfig(
            "Cauchy parameters must satisfy alpha_i + beta_j > 0".into(),
        ));
    }

    let k = alphas.len();
    let mut det = T::one();
    for i in 0..k {
        det = det / (alphas[i].clone() + betas[i].clone());
    }
    for j in 0..k {
        for i in 0..j {
            det = det * pair_factor(&alphas[i], &alphas[j]) * pair_factor(&betas[i], &betas[j]);
        }
    }
    Ok(det)
}

/// Ratio `cauchy_det(α, β) / cauchy_det(α₁..ₖ, β₁..ₖ)` for lists of length `k+1`:
/// `1/(α_{k+1}+β_{k+1}) · ∏ᵢ (α_{k+1}−αᵢ)/(α_{k+1}+αᵢ) · (β_{k+1}−βᵢ)/(β_{k+1}+βᵢ)`.
pub fn cauchy_det_step<T: Field>(alphas: &[T], betas: &[T]) -> Result<T> {
    if alphas.len() != betas.len() {
        return Err(Error::LengthMismatch {
            left: alphas.len(),
            right: betas.len(),
        });
    }
    let Some(last) = alphas.len().checked_sub(1) else {
        return Err(Error::EmptyInput);
    };
    let (a_new, b_new) = (&alphas[last], &betas[last]);
    let mut step = T::one() / (a_new.clone() + b_new.clone());
    for i in 0..last {
        step = step * pair_factor(&alphas[i], a_new) * pair_factor(&betas[i], b_new);
    }
    Ok(step)
}

/// `(b − a)/(a + b)`.
fn pair_factor<T: Field>(a: &T, b: &T) -> T {
    (b.clone() - a.clone()) / (a.clone() + b.clone())
}

/// Entry `(i, j)` of `Ψ⁻¹` (0-based):
///
/// `Ψ^{ij} = (2λᵢ)(2λⱼ)/(λᵢ+λⱼ) · ∏_{k≠i} (λᵢ+λₖ)/(λᵢ−λₖ) · ∏_{k≠j} (λⱼ+λₖ)/(λⱼ−λₖ)`.
///
/// On the diagonal and the first off-diagonals the prefactor equals
/// `∏_{k=i}^{j} 2λₖ / ∏_{k=i}^{j−1} (λₖ₊₁+λₖ)`; that telescoped form does not
/// extend to `|i − j| ≥ 2`. Empty products evaluate to one.
pub fn psi_inverse_entry<T: Field>(lambdas: &[T], i: usize, j: usize) -> T {
    let two = T::two();
    let li = lambdas[i].clone();
    let lj = lambdas[j].clone();
    let mut value = two.clone() * li.clone() * two * lj.clone() / (li.clone() + lj.clone());
    for (k, lk) in lambdas.iter().enumerate() {
        if k != i {
            value = value * (li.clone() + lk.clone()) / (li.clone() - lk.clone());
        }
        if k != j {
            value = value * (lj.clone() + lk.clone()) / (lj.clone() - lk.clone());
        }
    }
    value
}

/// `Ψ⁻¹` entrywise from the closed form. It has the checkerboard sign
/// pattern `sgn Ψ⁻¹[i][j] = (−1)^{i+j}`.
pub fn psi_inverse<T: Field>(psi: &CauchyGram<T>) -> DMatrix<T> {
    let n = psi.dim();
    let mut inv = DMatrix::from_element(n, n, T::zero());
    for i in 0..n {
        for j in i..n {
            let v = psi_inverse_entry(&psi.lambdas, i, j);
            inv[(j, i)] = v.clone();
            inv[(i, j)] = v;
        }
    }
    inv
}

/// `σ* M σ*`: negates every entry with `i + j` odd.
pub fn checkerboard_conjugate<T: Field>(m: &DMatrix<T>) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        if (i + j) % 2 == 0 {
            m[(i, j)].clone()
        } else {
            -m[(i, j)].clone()
        }
    })
}

/// Diagonal matrix with ±1 on the diagonal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignatureMatrix {
    signs: Vec<i8>,
}

impl SignatureMatrix {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|s| s.abs() != 1) {
            return Err(Error::InvalidConfig(
                "signature entries must be +1 or -1".into(),
            ));
        }
        Ok(SignatureMatrix { signs })
    }

    pub fn identity(n: usize) -> Self {
        SignatureMatrix { signs: vec![1; n] }
    }

    /// `σ* = diag(−1, 1, −1, …, (−1)ⁿ)`.
    pub fn alternating(n: usize) -> Self {
        SignatureMatrix {
            signs: (0..n).map(|i| if i % 2 == 0 { -1 } else { 1 }).collect(),
        }
    }

    /// Bit `i` of `mask` set means entry `i` is −1.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        SignatureMatrix {
            signs: (0..n)
                .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                .collect(),
        }
    }

    /// All `2ⁿ` signature matrices, starting from the identity.
    pub fn all(n: usize) -> impl Iterator<Item = SignatureMatrix> {
        (0..1u64 << n).map(move |mask| SignatureMatrix::from_mask(n, mask))
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn compose(&self, other: &SignatureMatrix) -> SignatureMatrix {
        SignatureMatrix {
            signs: self
                .signs
                .iter()
                .zip(&other.signs)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn apply<T: Field>(&self, v: &[T]) -> Vec<T> {
        v.iter()
            .zip(&self.signs)
            .map(|(x, &s)| if s < 0 { -x.clone() } else { x.clone() })
            .collect()
    }

    pub fn apply_signs(&self, v: &[i8]) -> Vec<i8> {
        v.iter().zip(&self.signs).map(|(x, s)| x * s).collect()
    }
}

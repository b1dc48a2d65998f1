//! Gradient ascent of the potential `ξ(b) = λ_min W(b)` on the unit sphere.
//!
//! This is the numerical cross-check of the closed form: for `b` with no zero
//! entry the smallest eigenvalue is simple and `D_bξ(v) = 2vᵀW(x)b`, with `x`
//! the corresponding unit eigenvector. Steps move along the Riemannian
//! gradient and are retracted back to the sphere by renormalization.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::cauchy::{build_psi, SignatureMatrix};
use crate::error::{Error, Result};
use crate::linalg::{diag_sandwich, max_abs, symmetric_eigen};
use crate::minimax::MinimaxSolution;
use crate::spectrum::{check_dim, sign_of, Spectrum, UnitVector};

pub const DEFAULT_STEP_SIZE: f64 = 1.0;
pub const DEFAULT_GRADIENT_TOL: f64 = 1e-10;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;
/// Backtracking gives up below this step length.
pub const MIN_STEP: f64 = 1e-14;
/// Random starts keep every entry at least this far from zero.
pub const START_MARGIN: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct AscentConfig {
    pub initial: UnitVector,
    pub step_size: f64,
    pub max_iterations: usize,
    pub gradient_tol: f64,
    pub seed: u64,
}

impl AscentConfig {
    pub fn new(initial: UnitVector) -> Self {
        AscentConfig {
            initial,
            step_size: DEFAULT_STEP_SIZE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            gradient_tol: DEFAULT_GRADIENT_TOL,
            seed: 0,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.step_size > 0.0) {
            return Err(Error::InvalidConfig("step size must be positive".into()));
        }
        if !(self.gradient_tol > 0.0) {
            return Err(Error::InvalidConfig(
                "gradient tolerance must be positive".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Iterate {
    pub b: UnitVector,
    pub xi: f64,
    pub gradient_norm: f64,
    /// Step length that produced this iterate (zero for the start).
    pub step: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AscentTrace {
    pub iterates: Vec<Iterate>,
    pub converged: bool,
}

impl AscentTrace {
    pub fn final_iterate(&self) -> &Iterate {
        self.iterates
            .last()
            .expect("trace holds at least the start")
    }

    pub fn final_point(&self) -> &UnitVector {
        &self.final_iterate().b
    }

    pub fn final_xi(&self) -> f64 {
        self.final_iterate().xi
    }

    /// Accepted steps, not counting the start.
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }
}

/// `Ψ` cached for repeated evaluations of `ξ` and its gradient.
struct Landscape {
    psi: DMatrix<f64>,
}

struct Evaluation {
    xi: f64,
    gradient: DVector<f64>,
    gradient_norm: f64,
    /// Round-off scale of `ξ`.
    noise: f64,
}

impl Landscape {
    fn new(spectrum: &Spectrum) -> Self {
        Landscape {
            psi: build_psi(spectrum).entries().clone(),
        }
    }

    fn gramian(&self, v: &[f64]) -> DMatrix<f64> {
        diag_sandwich(v, &self.psi)
    }

    fn smallest(&self, b: &DVector<f64>) -> (f64, DVector<f64>, f64) {
        let w = self.gramian(b.as_slice());
        let eig = symmetric_eigen(&w);
        (
            eig.values[0],
            eig.vectors.column(0).clone_owned(),
            max_abs(&w),
        )
    }

    /// Riemannian gradient `g − (gᵀb)b` with `g = 2W(x)b`.
    fn evaluate(&self, b: &DVector<f64>) -> Evaluation {
        let (xi, x, scale) = self.smallest(b);
        let euclidean = self.gramian(x.as_slice()) * b * 2.0;
        let gradient = &euclidean - b * euclidean.dot(b);
        Evaluation {
            xi,
            gradient_norm: gradient.norm(),
            gradient,
            noise: 16.0 * f64::EPSILON * scale,
        }
    }
}

fn require_in_z(b: &UnitVector) -> Result<()> {
    match b.zero_entry() {
        Some(index) => Err(Error::ZeroEntryActuator { index }),
        None => Ok(()),
    }
}

/// `ξ(b) = λ_min W(b)`; exactly zero when `b` has a zero entry.
pub fn xi(spectrum: &Spectrum, b: &UnitVector) -> Result<f64> {
    check_dim(spectrum.dim(), b.dim())?;
    if b.zero_entry().is_some() {
        return Ok(0.0);
    }
    Ok(Landscape::new(spectrum).smallest(b.as_vector()).0)
}

/// `g = 2W(x)b`; its tangential part is the Riemannian gradient of `ξ`.
pub fn euclidean_gradient(spectrum: &Spectrum, b: &UnitVector) -> Result<DVector<f64>> {
    check_dim(spectrum.dim(), b.dim())?;
    require_in_z(b)?;
    let landscape = Landscape::new(spectrum);
    let (_, x, _) = landscape.smallest(b.as_vector());
    Ok(landscape.gramian(x.as_slice()) * b.as_vector() * 2.0)
}

/// Projection of [`euclidean_gradient`] onto the tangent space `{v : vᵀb = 0}`.
pub fn riemannian_gradient(spectrum: &Spectrum, b: &UnitVector) -> Result<DVector<f64>> {
    let g = euclidean_gradient(spectrum, b)?;
    let b = b.as_vector();
    Ok(&g - b * g.dot(b))
}

/// `D_bξ(v) = 2vᵀW(x)b` for a tangent vector `v`.
pub fn directional_derivative(
    spectrum: &Spectrum,
    b: &UnitVector,
    v: &DVector<f64>,
) -> Result<f64> {
    check_dim(b.dim(), v.len())?;
    Ok(v.dot(&euclidean_gradient(spectrum, b)?))
}

/// `(‖W(b)x − ξx‖, ‖W(x)b − ξb‖)` with `x` the smallest eigenvector of `W(b)`.
/// Both vanish exactly at critical points of `ξ`.
pub fn critical_residual(spectrum: &Spectrum, b: &UnitVector) -> Result<(f64, f64)> {
    check_dim(spectrum.dim(), b.dim())?;
    require_in_z(b)?;
    let landscape = Landscape::new(spectrum);
    let b = b.as_vector();
    let (xi, x, _) = landscape.smallest(b);
    let r1 = (landscape.gramian(b.as_slice()) * &x - &x * xi).norm();
    let r2 = (landscape.gramian(x.as_slice()) * b - b * xi).norm();
    Ok((r1, r2))
}

/// Smallest eigenvector of `W(b)` (first nonzero entry positive).
pub fn worst_state(spectrum: &Spectrum, b: &UnitVector) -> Result<UnitVector> {
    check_dim(spectrum.dim(), b.dim())?;
    let (_, x, _) = Landscape::new(spectrum).smallest(b.as_vector());
    Ok(UnitVector::from_unit_unchecked(x))
}

/// Projected gradient ascent with backtracking.
///
/// A trial step is halved until `ξ` increases, or, once `ξ` differences are
/// below round-off, until `ξ` stays within round-off and the gradient norm
/// shrinks. Trial points that change the sign pattern of `b` (and so would
/// cross the zero set of `ξ`) are halved as well. The step doubles after each
/// accepted move.
pub fn ascend(spectrum: &Spectrum, config: &AscentConfig) -> Result<AscentTrace> {
    config.check()?;
    check_dim(spectrum.dim(), config.initial.dim())?;
    require_in_z(&config.initial)?;

    let landscape = Landscape::new(spectrum);
    let mut b = config.initial.as_vector().clone();
    let signs: Vec<i8> = b.iter().map(|&v| sign_of(v)).collect();
    let mut current = landscape.evaluate(&b);
    let mut iterates = vec![Iterate {
        b: config.initial.clone(),
        xi: current.xi,
        gradient_norm: current.gradient_norm,
        step: 0.0,
    }];

    let mut step = config.step_size;
    for _ in 0..config.max_iterations {
        if current.gradient_norm <= config.gradient_tol {
            break;
        }
        let mut accepted = None;
        while step >= MIN_STEP {
            let trial = &b + &current.gradient * step;
            let trial = &trial / trial.norm();
            let same_orthant = trial.iter().zip(&signs).all(|(&v, &s)| sign_of(v) == s);
            if same_orthant {
                let eval = landscape.evaluate(&trial);
                let ascent = eval.xi > current.xi;
                let flat = eval.xi >= current.xi - current.noise
                    && eval.gradient_norm < current.gradient_norm;
                if ascent || flat {
                    accepted = Some((trial, eval));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, eval)) = accepted else {
            break;
        };
        b = trial;
        current = eval;
        iterates.push(Iterate {
            b: UnitVector::from_unit_unchecked(b.clone()),
            xi: current.xi,
            gradient_norm: current.gradient_norm,
            step,
        });
        step *= 2.0;
    }

    let converged = current.gradient_norm <= config.gradient_tol;
    let trace = AscentTrace {
        iterates,
        converged,
    };
    if converged {
        Ok(trace)
    } else {
        Err(Error::NotConverged {
            iterations: trace.iterations(),
            gradient_norm: current.gradient_norm,
            trace: Box::new(trace),
        })
    }
}

/// Uniform point on the sphere with every `|bᵢ| ≥ START_MARGIN`.
pub fn random_start<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitVector {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(u) = UnitVector::normalize(v) {
            if u.as_slice().iter().all(|x| x.abs() >= START_MARGIN) {
                return u;
            }
        }
    }
}

/// Runs `restarts` independent ascents from random starts drawn with `seed`.
/// Starts are drawn sequentially so results do not depend on scheduling.
pub fn multi_start(
    spectrum: &Spectrum,
    restarts: usize,
    seed: u64,
    template: &AscentConfig,
) -> Vec<Result<AscentTrace>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<UnitVector> = (0..restarts)
        .map(|_| random_start(spectrum.dim(), &mut rng))
        .collect();
    starts
        .into_par_iter()
        .enumerate()
        .map(|(i, initial)| {
            let config = AscentConfig {
                initial,
                seed: seed.wrapping_add(i as u64),
                ..template.clone()
            };
            ascend(spectrum, &config)
        })
        .collect()
}

/// The signature `σ` with `‖b − σv*‖_∞ ≤ tol`, if `b` is near a critical point.
pub fn match_critical_point(
    solution: &MinimaxSolution,
    b: &UnitVector,
    tol: f64,
) -> Option<SignatureMatrix> {
    let signs: Vec<i8> = b
        .signs()
        .iter()
        .map(|&s| if s < 0 { -1 } else { 1 })
        .collect();
    let sigma = SignatureMatrix::new(signs).ok()?;
    let target = sigma.apply(solution.v_star().as_slice());
    let distance = b
        .as_slice()
        .iter()
        .zip(&target)
        .fold(0.0f64, |acc, (a, t)| acc.max((a - t).abs()));
    (distance <= tol).then_some(sigma)
}

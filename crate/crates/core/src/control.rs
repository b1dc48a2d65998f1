//! Minimum-energy steering of `ẋ = Λx + bu` to the origin, simulated end to
//! end so the closed-form energy can be checked against an actual trajectory.
//!
//! Over a horizon `T` the optimal open-loop input is
//! `u(t) = −bᵀe^{−Λt}W_T⁻¹x₀`, where `W_T` is the Gramian truncated at `T`.
//! The open-loop system is unstable, so integration error in `x` grows like
//! `e^{λₙ(T−t)}`. The simulation therefore re-anchors the same law at the
//! start of each integrator step, `u(t) = −bᵀe^{−Λ(t−tₖ)}W_{T−tₖ}⁻¹x(tₖ)`,
//! which in exact arithmetic reproduces the open-loop input.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gramian::build_gramian;
use crate::linalg::symmetric_eigen;
use crate::minimax::energy_at;
use crate::ode::{self, Tolerances};
use crate::spectrum::{check_dim, Spectrum, UnitVector};

pub const DEFAULT_TERMINAL_TOL: f64 = 1e-6;
pub const MAX_SPECTRAL_RATIO: f64 = 1e3;
pub const INTEGRATOR_RTOL: f64 = 1e-10;
pub const INTEGRATOR_ATOL: f64 = 1e-14;
/// Step sizes are capped at this fraction of `1/λₙ` so the sampled
/// trajectory resolves the fastest mode.
pub const MAX_STEP_FRACTION: f64 = 0.01;
/// Re-anchoring stops once `W_{T−t}` is this badly conditioned.
const MAX_ANCHOR_CONDITION: f64 = 1e12;

/// Default horizon `40/λ₁`.
pub fn default_horizon(spectrum: &Spectrum) -> f64 {
    40.0 / spectrum.smallest()
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub controls: Vec<f64>,
    /// `∫u² dt`.
    pub total_energy: f64,
}

impl Trajectory {
    fn from_samples(times: Vec<f64>, states: Vec<Vec<f64>>, controls: Vec<f64>) -> Self {
        let squares: Vec<f64> = controls.iter().map(|u| u * u).collect();
        let total_energy = trapezoid(&times, &squares);
        Trajectory {
            times,
            states,
            controls,
            total_energy,
        }
    }

    pub fn terminal_state(&self) -> &[f64] {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn terminal_norm(&self) -> f64 {
        self.terminal_state()
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    /// CSV with header `t,x_1,…,x_n,u`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.states.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x_{i}")));
        header.push("u".into());
        writeln!(out, "{}", header.join(","))?;
        for ((t, x), u) in self.times.iter().zip(&self.states).zip(&self.controls) {
            let mut row = vec![csv_number(*t)];
            row.extend(x.iter().copied().map(csv_number));
            row.push(csv_number(*u));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Shortest round-trip decimal, in exponent form outside `[1e-4, 1e16)`;
/// non-finite values as `inf`, `-inf`, `nan`.
pub fn csv_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if v == 0.0 || (1e-4..1e16).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub(crate) fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// `W_T[i][j] = bᵢbⱼ(1 − e^{−(λᵢ+λⱼ)T})/(λᵢ+λⱼ)`.
pub fn finite_horizon_gramian(spectrum: &Spectrum, b: &[f64], horizon: f64) -> DMatrix<f64> {
    let lambda = spectrum.eigenvalues();
    let n = lambda.len();
    DMatrix::from_fn(n, n, |i, j| {
        let rate = lambda[i] + lambda[j];
        b[i] * b[j] * -(-rate * horizon).exp_m1() / rate
    })
}

fn check_spectral_ratio(spectrum: &Spectrum) -> Result<()> {
    let ratio = spectrum.largest() / spectrum.smallest();
    if ratio > MAX_SPECTRAL_RATIO {
        return Err(Error::SpectralRatioTooLarge {
            ratio,
            max: MAX_SPECTRAL_RATIO,
        });
    }
    Ok(())
}

/// Coefficients `c = W_τ⁻¹x` of the input `u(s) = −Σ bᵢe^{−λᵢs}cᵢ`, or `None`
/// when `W_τ` is too close to singular to trust.
fn anchor_coefficients(
    spectrum: &Spectrum,
    b: &[f64],
    remaining: f64,
    x: &DVector<f64>,
) -> Option<DVector<f64>> {
    let w = finite_horizon_gramian(spectrum, b, remaining);
    let eig = symmetric_eigen(&w);
    let (lo, hi) = (eig.values[0], eig.values[eig.values.len() - 1]);
    if !(lo > 0.0) || hi / lo > MAX_ANCHOR_CONDITION {
        return None;
    }
    let inv_diag = DMatrix::from_diagonal(&eig.values.map(|v| 1.0 / v));
    Some(&eig.vectors * inv_diag * (eig.vectors.transpose() * x))
}

fn input(lambda: &[f64], b: &[f64], coeffs: &DVector<f64>, elapsed: f64) -> f64 {
    -lambda
        .iter()
        .zip(b)
        .zip(coeffs.iter())
        .map(|((l, bi), c)| bi * (-l * elapsed).exp() * c)
        .sum::<f64>()
}

/// Steers `x0` to the origin over `horizon` with minimum `∫u²`.
///
/// The returned energy tends to `x0ᵀW(b)⁻¹x0` as the horizon grows.
pub fn min_energy_control(
    spectrum: &Spectrum,
    b: &UnitVector,
    x0: &UnitVector,
    horizon: f64,
) -> Result<Trajectory> {
    min_energy_control_unchecked(spectrum, b, x0.as_slice(), horizon)
}

/// [`min_energy_control`] for an initial state of any length-`n` vector.
pub fn min_energy_control_unchecked(
    spectrum: &Spectrum,
    b: &UnitVector,
    x0: &[f64],
    horizon: f64,
) -> Result<Trajectory> {
    check_dim(spectrum.dim(), b.dim())?;
    check_dim(spectrum.dim(), x0.len())?;
    if let Some(index) = x0.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { index });
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidConfig(
            "horizon must be positive and finite".into(),
        ));
    }
    if b.zero_entry().is_some() {
        return Err(Error::SingularGramian);
    }
    check_spectral_ratio(spectrum)?;

    let lambda = spectrum.eigenvalues().to_vec();
    let bv = b.as_slice().to_vec();
    let tol = Tolerances {
        rtol: INTEGRATOR_RTOL,
        atol: INTEGRATOR_ATOL,
    };
    let h_max = MAX_STEP_FRACTION / spectrum.largest();

    let n = x0.len();
    let mut t = 0.0;
    let mut x = DVector::from_column_slice(x0);
    // Accumulated ∫u², integrated alongside the state under the same error control.
    let mut energy = 0.0;
    let mut anchor_time = 0.0;
    let mut coeffs =
        anchor_coefficients(spectrum, &bv, horizon, &x).ok_or(Error::SingularGramian)?;

    let mut times = vec![0.0];
    let mut states = vec![x.as_slice().to_vec()];
    let mut controls = vec![input(&lambda, &bv, &coeffs, 0.0)];
    let mut h = h_max.min(horizon / 100.0);

    while t < horizon {
        let remaining = horizon - t;
        let last = h >= remaining || remaining - h < 0.5 * h;
        let h_try = if last { remaining } else { h };

        let rhs = |s: f64, y: &DVector<f64>| {
            let u = input(&lambda, &bv, &coeffs, s - anchor_time);
            DVector::from_fn(n + 1, |i, _| {
                if i < n {
                    lambda[i] * y[i] + bv[i] * u
                } else {
                    u * u
                }
            })
        };
        let y = x.clone().insert_row(n, energy);
        let (y_new, err) = ode::step(&rhs, t, &y, h_try, tol);
        if err <= 1.0 {
            t = if last { horizon } else { t + h_try };
            energy = y_new[n];
            x = y_new.remove_row(n);
            times.push(t);
            states.push(x.as_slice().to_vec());
            // Input at the end of the step under the anchor that produced it.
            controls.push(input(&lambda, &bv, &coeffs, t - anchor_time));
            if t < horizon {
                if let Some(c) = anchor_coefficients(spectrum, &bv, horizon - t, &x) {
                    coeffs = c;
                    anchor_time = t;
                }
            }
        }
        h = ode::next_step(h_try, err).min(h_max);
    }

    let trajectory = Trajectory {
        times,
        states,
        controls,
        total_energy: energy,
    };
    let terminal_norm = trajectory.terminal_norm();
    if terminal_norm > DEFAULT_TERMINAL_TOL {
        return Err(Error::HorizonTooShort {
            terminal_norm,
            tolerance: DEFAULT_TERMINAL_TOL,
            trajectory: Box::new(trajectory),
        });
    }
    Ok(trajectory)
}

/// Free response `ẋ = Λx` over `[0, t_end]` with the same integrator.
pub fn simulate_open_loop(spectrum: &Spectrum, x0: &UnitVector, t_end: f64) -> Result<Trajectory> {
    check_dim(spectrum.dim(), x0.dim())?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidConfig(
            "simulation time must be positive and finite".into(),
        ));
    }
    let lambda = spectrum.eigenvalues().to_vec();
    let tol = Tolerances {
        rtol: INTEGRATOR_RTOL,
        atol: INTEGRATOR_ATOL,
    };
    let path = ode::integrate(
        |_, y| DVector::from_fn(y.len(), |i, _| lambda[i] * y[i]),
        0.0,
        x0.as_vector().clone(),
        t_end,
        tol,
        MAX_STEP_FRACTION * 10.0 / spectrum.largest(),
    );
    let controls = vec![0.0; path.len()];
    let (times, states) = path
        .into_iter()
        .map(|(t, y)| (t, y.as_slice().to_vec()))
        .unzip();
    Ok(Trajectory::from_samples(times, states, controls))
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyBoundReport {
    pub trials: usize,
    /// `1/λ_min W(b)`.
    pub worst_energy: f64,
    pub max_sampled_energy: f64,
    /// `max_sampled_energy / worst_energy`.
    pub max_ratio: f64,
    /// Samples exceeding `worst_energy + 1e-9`.
    pub violations: usize,
}

impl EnergyBoundReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples random unit initial states and checks
/// `x0ᵀW(b)⁻¹x0 ≤ 1/λ_min W(b)` for each.
pub fn verify_energy_bound(
    spectrum: &Spectrum,
    b: &UnitVector,
    trials: usize,
    seed: u64,
) -> Result<EnergyBoundReport> {
    check_dim(spectrum.dim(), b.dim())?;
    if b.zero_entry().is_some() {
        return Err(Error::SingularGramian);
    }
    let worst_energy = build_gramian(spectrum, b)?.worst_energy();
    if !worst_energy.is_finite() {
        return Err(Error::SingularGramian);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_sampled_energy = 0.0f64;
    let mut violations = 0;
    for _ in 0..trials {
        let x0 = sample_unit(spectrum.dim(), &mut rng);
        let energy = energy_at(spectrum, &x0, b)?;
        if energy > worst_energy + 1e-9 {
            violations += 1;
        }
        max_sampled_energy = max_sampled_energy.max(energy);
    }
    Ok(EnergyBoundReport {
        trials,
        worst_energy,
        max_sampled_energy,
        max_ratio: max_sampled_energy / worst_energy,
        violations,
    })
}

fn sample_unit(n: usize, rng: &mut ChaCha8Rng) -> UnitVector {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(u) = UnitVector::normalize(v) {
            return u;
        }
    }
}

//! The subcommands. Each returns its rendered output and whether every
//! verification check passed; errors are left to the caller to map onto exit
//! codes.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::problem::{Mode, Problem, Solved};
use super::report::{reals, Check, Real, Timing, Verification};
use crate::cauchy::{build_psi, psi_inverse, SignatureMatrix};
use crate::control::{
    csv_number, default_horizon, min_energy_control, verify_energy_bound, Trajectory,
    DEFAULT_TERMINAL_TOL,
};
use crate::error::{Error, Result};
use crate::gramian::{build_gramian, lyapunov_gramian};
use crate::linalg::{diag_sandwich, max_abs, symmetric_eigen};
use crate::minimax::{energy_at, pair_residuals, solve, MinimaxSolution};
use crate::optimizer::{
    ascend, critical_residual, match_critical_point, multi_start, random_start, worst_state,
    AscentConfig, AscentTrace,
};
use crate::spectrum::{Spectrum, UnitVector};

/// Pairs listed explicitly in a report; the rest are only counted.
pub const MAX_REPORTED_PAIRS: usize = 128;
/// Random initial states sampled by the energy-bound check.
pub const ENERGY_BOUND_TRIALS: usize = 1000;
pub const DEFAULT_SWEEP_RESOLUTION_2D: usize = 10_000;
pub const DEFAULT_SWEEP_RESOLUTION_3D: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub struct CommandOutput {
    pub text: String,
    pub passed: bool,
}

fn json<T: Serialize>(report: &T, passed: bool) -> CommandOutput {
    CommandOutput {
        text: serde_json::to_string_pretty(report).expect("reports serialize") + "\n",
        passed,
    }
}

fn timing(started: Option<Instant>) -> Option<Timing> {
    started.map(|t| Timing {
        elapsed_ms: Real(t.elapsed().as_secs_f64() * 1e3),
    })
}

fn original(problem: &Problem, v: &UnitVector) -> Result<Vec<Real>> {
    Ok(reals(problem.to_original(v)?.as_slice()))
}

fn parse_vector(problem: &Problem, entries: &[f64]) -> Result<UnitVector> {
    if entries.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: entries.len(),
        });
    }
    problem.to_diagonal(&UnitVector::normalize(entries.to_vec())?)
}

/// `sgn(x) = ±σ* sgn(b)` with no zero entries.
fn interlaced(x: &UnitVector, b: &UnitVector) -> bool {
    let target = SignatureMatrix::alternating(x.dim()).apply_signs(&b.signs());
    let xs = x.signs();
    let flipped: Vec<i8> = target.iter().map(|s| -s).collect();
    !xs.contains(&0) && (xs == target || xs == flipped)
}

fn modulus_gap(x: &UnitVector, b: &UnitVector) -> f64 {
    x.as_slice()
        .iter()
        .zip(b.as_slice())
        .fold(0.0, |acc, (xi, bi)| acc.max((xi.abs() - bi.abs()).abs()))
}

/// Scale of `W(b)` entries, used to make residual tolerances relative.
fn residual_scale(problem: &Problem) -> f64 {
    max_abs(build_psi(&problem.spectrum).entries()).max(1.0)
}

#[derive(Serialize)]
pub struct PairReport {
    pub x: Vec<Real>,
    pub b: Vec<Real>,
    pub sigma: Vec<i8>,
    pub sign: i8,
}

#[derive(Serialize)]
pub struct ArgPhiReport {
    pub total_count: usize,
    pub truncated: bool,
    pub pairs: Vec<PairReport>,
}

#[derive(Serialize)]
pub struct RestartSummary {
    pub restarts: usize,
    pub seed: u64,
    pub converged: usize,
    pub matched: usize,
    pub distinct_critical_points: usize,
    pub distinct_up_to_sign: usize,
    pub xi_min: Real,
    pub xi_max: Real,
}

#[derive(Serialize)]
pub struct SimulationSummary {
    pub horizon: Real,
    pub x0: Vec<Real>,
    pub b: Vec<Real>,
    pub total_energy: Real,
    pub relative_error: Real,
    pub terminal_norm: Real,
    pub samples: usize,
}

#[derive(Serialize)]
pub struct SolveReport {
    pub command: &'static str,
    pub mode: Mode,
    pub coordinates: &'static str,
    pub n: usize,
    pub eigenvalues: Vec<Real>,
    pub phi: Real,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_exact: Option<String>,
    pub xi_star: Real,
    pub v_star: Vec<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_star_squared_exact: Option<Vec<String>>,
    pub arg_phi: ArgPhiReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<RestartSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSummary>,
    pub verification: Verification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

/// Checks every element of `arg φ` and fills the closed-form part of a report.
fn closed_form_report(
    problem: &Problem,
    solved: &Solved,
    verification: &mut Verification,
) -> Result<SolveReport> {
    let spectrum = &problem.spectrum;
    let sol = &solved.solution;
    let tol = &problem.tolerances;
    let n = problem.dim();

    let min_weight = sol.weights().iter().copied().fold(f64::INFINITY, f64::min);
    verification.push(Check::holds("positivity_certificate", min_weight > 0.0));

    let mut pairs = Vec::new();
    let mut count = 0;
    let mut max_residual = 0.0f64;
    let mut max_modulus = 0.0f64;
    let mut signs_ok = true;
    for pair in sol.arg_phi() {
        let (r1, r2) = pair_residuals(spectrum, &pair.x, &pair.b, sol.xi_star())?;
        max_residual = max_residual.max(r1).max(r2);
        max_modulus = max_modulus.max(modulus_gap(&pair.x, &pair.b));
        signs_ok &= interlaced(&pair.x, &pair.b);
        if count < MAX_REPORTED_PAIRS {
            pairs.push(PairReport {
                x: original(problem, &pair.x)?,
                b: original(problem, &pair.b)?,
                sigma: pair.sigma.signs().to_vec(),
                sign: pair.sign,
            });
        }
        count += 1;
    }
    verification.push(Check::holds("pair_count", count == sol.arg_phi_count()));
    verification.push(Check::at_most(
        "stationarity_residual",
        max_residual,
        tol.residual * residual_scale(problem),
    ));
    verification.push(Check::holds("sign_pattern", signs_ok));
    verification.push(Check::at_most("modulus_matching", max_modulus, tol.modulus));

    let psi = build_psi(spectrum);
    let inverse = psi_inverse(&psi);
    let identity_residual = max_abs(&(psi.entries() * &inverse - DMatrix::identity(n, n)));
    verification.delta("psi_inverse_identity", identity_residual);
    let lu_delta = match psi.entries().clone().try_inverse() {
        Some(lu) => max_abs(&(&inverse - &lu)) / max_abs(&lu),
        None => f64::INFINITY,
    };
    verification.delta("psi_inverse_vs_lu", lu_delta);
    let xi_eig = build_gramian(spectrum, sol.v_star())?
        .smallest_eigenpair()
        .value;
    verification.delta(
        "xi_star_vs_eigensolver",
        (xi_eig - sol.xi_star()).abs() / sol.xi_star(),
    );
    if solved.exact.is_some() {
        let float_delta = match solve(spectrum) {
            Ok(float) => (float.phi() - sol.phi()).abs() / sol.phi(),
            Err(_) => f64::INFINITY,
        };
        verification.delta("phi_float_vs_exact", float_delta);
    }
    if let Some(system) = &problem.system {
        verification.delta("reconstruction", system.reconstruction_residual());
        verification.delta("orthogonality", system.orthogonality_residual());
        let pair = sol.arg_phi().next().expect("arg phi is never empty");
        let x = problem.to_original(&pair.x)?.into_vector();
        let b = problem.to_original(&pair.b)?;
        let energy = lyapunov_gramian(system.matrix(), b.as_slice())?
            .lu()
            .solve(&x)
            .map(|y| x.dot(&y))
            .unwrap_or(f64::INFINITY);
        verification.delta(
            "original_energy_identity",
            (energy - sol.phi()).abs() / sol.phi(),
        );
    }

    Ok(SolveReport {
        command: "solve",
        mode: problem.mode,
        coordinates: problem.coordinates(),
        n,
        eigenvalues: reals(spectrum.eigenvalues()),
        phi: Real(sol.phi()),
        phi_exact: solved.exact.as_ref().map(|c| c.phi.to_string()),
        xi_star: Real(sol.xi_star()),
        v_star: original(problem, sol.v_star())?,
        v_star_squared_exact: solved
            .exact
            .as_ref()
            .map(|c| c.v_star_squared.iter().map(ToString::to_string).collect()),
        arg_phi: ArgPhiReport {
            total_count: sol.arg_phi_count(),
            truncated: sol.arg_phi_count() > MAX_REPORTED_PAIRS,
            pairs,
        },
        restarts: None,
        simulation: None,
        verification: Verification::default(),
        timing: None,
    })
}

pub fn cmd_solve(problem: &Problem, started: Option<Instant>) -> Result<CommandOutput> {
    let solved = problem.solve()?;
    let mut verification = Verification::default();
    let mut report = closed_form_report(problem, &solved, &mut verification)?;
    report.verification = verification.finish();
    report.timing = timing(started);
    Ok(json(&report, report.verification.passed))
}

pub struct VerifyOptions {
    pub restarts: usize,
    pub seed: u64,
    pub horizon: Option<f64>,
}

pub fn cmd_verify(
    problem: &Problem,
    options: &VerifyOptions,
    started: Option<Instant>,
) -> Result<CommandOutput> {
    let solved = problem.solve()?;
    let sol = &solved.solution;
    let spectrum = &problem.spectrum;
    let tol = &problem.tolerances;
    let n = problem.dim();
    let mut verification = Verification::default();
    let mut report = closed_form_report(problem, &solved, &mut verification)?;
    report.command = "verify";

    let template = AscentConfig {
        gradient_tol: tol.gradient,
        ..AscentConfig::new(UnitVector::basis(n, 0))
    };
    let mut traces: Vec<AscentTrace> = Vec::with_capacity(options.restarts);
    for result in multi_start(spectrum, options.restarts, options.seed, &template) {
        match result {
            Ok(trace) => traces.push(trace),
            Err(Error::NotConverged { trace, .. }) => traces.push(*trace),
            Err(e) => return Err(e),
        }
    }
    let converged = traces.iter().filter(|t| t.converged).count();
    let mut matched = 0;
    let mut distinct = BTreeSet::new();
    let mut distinct_up_to_sign = BTreeSet::new();
    let (mut xi_min, mut xi_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut xi_gap, mut max_residual, mut max_modulus) = (0.0f64, 0.0f64, 0.0f64);
    let mut signs_ok = true;
    for trace in &traces {
        let b = trace.final_point();
        if let Some(sigma) = match_critical_point(sol, b, tol.critical_point) {
            matched += 1;
            let signs = sigma.signs().to_vec();
            let canonical: Vec<i8> = signs.iter().map(|s| s * signs[0]).collect();
            distinct.insert(signs);
            distinct_up_to_sign.insert(canonical);
        }
        let xi = trace.final_xi();
        xi_min = xi_min.min(xi);
        xi_max = xi_max.max(xi);
        xi_gap = xi_gap.max((xi - sol.xi_star()).abs());
        let (r1, r2) = critical_residual(spectrum, b)?;
        max_residual = max_residual.max(r1).max(r2);
        let x = worst_state(spectrum, b)?;
        signs_ok &= interlaced(&x, b);
        max_modulus = max_modulus.max(modulus_gap(&x, b));
    }
    verification.push(
        Check::holds("restarts_converged", converged == traces.len())
            .with_detail(format!("{converged} of {}", traces.len())),
    );
    verification.push(
        Check::holds("restarts_matched", matched == traces.len()).with_detail(format!(
            "{matched} of {} within {:e}",
            traces.len(),
            tol.critical_point
        )),
    );
    if !traces.is_empty() {
        verification.push(Check::at_most("restart_xi", xi_gap, tol.xi));
        verification.push(Check::at_most(
            "restart_stationarity",
            max_residual,
            tol.residual * residual_scale(problem),
        ));
        verification.push(Check::holds("restart_sign_pattern", signs_ok));
        verification.push(Check::at_most("restart_modulus", max_modulus, tol.modulus));
    }
    report.restarts = Some(RestartSummary {
        restarts: traces.len(),
        seed: options.seed,
        converged,
        matched,
        distinct_critical_points: distinct.len(),
        distinct_up_to_sign: distinct_up_to_sign.len(),
        xi_min: Real(xi_min),
        xi_max: Real(xi_max),
    });

    let bound = verify_energy_bound(spectrum, sol.v_star(), ENERGY_BOUND_TRIALS, options.seed)?;
    verification.push(
        Check::at_most(
            "energy_bound",
            bound.max_sampled_energy - bound.worst_energy,
            1e-9,
        )
        .with_detail(format!(
            "{} samples, max ratio {}",
            bound.trials, bound.max_ratio
        )),
    );
    verification.delta(
        "worst_energy_vs_phi",
        (bound.worst_energy - sol.phi()).abs() / sol.phi(),
    );

    let b = sol.v_star().clone();
    let x0 = UnitVector::from_vector(DVector::from_vec(
        SignatureMatrix::alternating(n).apply(sol.v_star().as_slice()),
    ))?;
    let horizon = options.horizon.unwrap_or_else(|| default_horizon(spectrum));
    match simulate(spectrum, &b, &x0, horizon) {
        Ok(trajectory) => {
            let relative_error = (trajectory.total_energy - sol.phi()).abs() / sol.phi();
            verification.push(Check::at_most(
                "simulation_terminal_state",
                trajectory.terminal_norm(),
                DEFAULT_TERMINAL_TOL,
            ));
            verification.push(Check::at_most(
                "simulation_energy",
                relative_error,
                tol.energy,
            ));
            report.simulation = Some(SimulationSummary {
                horizon: Real(horizon),
                x0: original(problem, &x0)?,
                b: original(problem, &b)?,
                total_energy: Real(trajectory.total_energy),
                relative_error: Real(relative_error),
                terminal_norm: Real(trajectory.terminal_norm()),
                samples: trajectory.times.len(),
            });
        }
        Err(e @ Error::SpectralRatioTooLarge { .. }) => {
            verification.push(Check::skipped("simulation_energy", e.to_string()));
        }
        Err(e) => return Err(e),
    }

    report.verification = verification.finish();
    report.timing = timing(started);
    Ok(json(&report, report.verification.passed))
}

/// Runs the steering simulation; a too-short horizon still yields the
/// trajectory, which then fails the terminal-state check.
fn simulate(
    spectrum: &Spectrum,
    b: &UnitVector,
    x0: &UnitVector,
    horizon: f64,
) -> Result<Trajectory> {
    match min_energy_control(spectrum, b, x0, horizon) {
        Ok(trajectory) => Ok(trajectory),
        Err(Error::HorizonTooShort { trajectory, .. }) => Ok(*trajectory),
        Err(e) => Err(e),
    }
}

#[derive(Serialize)]
pub struct SweepReport {
    pub command: &'static str,
    pub n: usize,
    pub resolution: usize,
    pub points: usize,
    pub coordinates: &'static str,
    pub phi: Real,
    pub xi_star: Real,
    pub max_xi: Real,
    pub argmax_angles: Vec<Real>,
    pub argmax_b: Vec<Real>,
    pub min_worst_energy: Real,
    pub gap: Real,
    pub grid_bound: Real,
    pub verification: Verification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

struct SweepPoint {
    angles: Vec<f64>,
    b: Vec<f64>,
}

fn sweep_grid(n: usize, resolution: usize) -> Vec<SweepPoint> {
    match n {
        2 => (0..resolution)
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / resolution as f64;
                SweepPoint {
                    angles: vec![theta],
                    b: vec![theta.cos(), theta.sin()],
                }
            })
            .collect(),
        _ => {
            let mut points = Vec::with_capacity((resolution + 1) * 2 * resolution);
            for i in 0..=resolution {
                let polar = PI * i as f64 / resolution as f64;
                for j in 0..2 * resolution {
                    let azimuth = PI * j as f64 / resolution as f64;
                    points.push(SweepPoint {
                        angles: vec![polar, azimuth],
                        b: vec![
                            polar.sin() * azimuth.cos(),
                            polar.sin() * azimuth.sin(),
                            polar.cos(),
                        ],
                    });
                }
            }
            points
        }
    }
}

/// Evaluates `ξ(b)` on a grid of the circle (`n = 2`, angles `2πk/N`) or the
/// sphere (`n = 3`, polar angles `πi/N` and azimuths `πj/N`). Every point of
/// the sphere lies within geodesic distance `π/N` of the grid.
pub fn cmd_sweep(
    problem: &Problem,
    resolution: Option<usize>,
    format: Format,
    started: Option<Instant>,
) -> Result<CommandOutput> {
    let n = problem.dim();
    if !(n == 2 || n == 3) {
        return Err(Error::UnsupportedDimension { n });
    }
    let resolution = resolution.unwrap_or(if n == 2 {
        DEFAULT_SWEEP_RESOLUTION_2D
    } else {
        DEFAULT_SWEEP_RESOLUTION_3D
    });
    if resolution == 0 {
        return Err(Error::InvalidConfig("resolution must be positive".into()));
    }
    let sol = problem.solve()?.solution;
    let psi = build_psi(&problem.spectrum);
    let psi_norm = symmetric_eigen(psi.entries()).values.max();

    let grid = sweep_grid(n, resolution);
    let xis: Vec<f64> = grid
        .iter()
        .map(|p| {
            if p.b.contains(&0.0) {
                0.0
            } else {
                symmetric_eigen(&diag_sandwich(&p.b, psi.entries())).values[0]
            }
        })
        .collect();
    let best = (0..grid.len()).fold(0, |best, k| if xis[k] > xis[best] { k } else { best });
    let max_xi = xis[best];
    let gap = sol.xi_star() - max_xi;
    let grid_bound = 2.0 * psi_norm * PI / resolution as f64;

    let mut verification = Verification::default();
    verification.push(Check::at_most(
        "grid_below_optimum",
        (max_xi - sol.xi_star()).max(0.0),
        64.0 * f64::EPSILON * psi_norm,
    ));
    verification.push(Check::at_most("grid_gap", gap.max(0.0), grid_bound));
    let verification = verification.finish();
    let passed = verification.passed;

    match format {
        Format::Csv => {
            let mut text = String::new();
            text.push_str(if n == 2 { "theta" } else { "theta,phi" });
            for i in 1..=n {
                text.push_str(&format!(",b_{i}"));
            }
            text.push_str(",xi,worst_energy\n");
            for (point, xi) in grid.iter().zip(&xis) {
                let fields: Vec<String> = point
                    .angles
                    .iter()
                    .chain(&point.b)
                    .chain([xi, &worst_energy(*xi)])
                    .map(|v| csv_number(*v))
                    .collect();
                text.push_str(&fields.join(","));
                text.push('\n');
            }
            Ok(CommandOutput { text, passed })
        }
        Format::Json => {
            let report = SweepReport {
                command: "sweep",
                n,
                resolution,
                points: grid.len(),
                coordinates: "diagonal",
                phi: Real(sol.phi()),
                xi_star: Real(sol.xi_star()),
                max_xi: Real(max_xi),
                argmax_angles: reals(&grid[best].angles),
                argmax_b: reals(&grid[best].b),
                min_worst_energy: Real(worst_energy(max_xi)),
                gap: Real(gap),
                grid_bound: Real(grid_bound),
                verification,
                timing: timing(started),
            };
            Ok(json(&report, passed))
        }
    }
}

fn worst_energy(xi: f64) -> f64 {
    if xi > 0.0 {
        1.0 / xi
    } else {
        f64::INFINITY
    }
}

pub struct EnergyOptions {
    pub horizon: Option<f64>,
    pub actuator: Option<Vec<f64>>,
    pub x0: Option<Vec<f64>>,
}

#[derive(Serialize)]
pub struct EnergyReport {
    pub command: &'static str,
    pub n: usize,
    pub coordinates: &'static str,
    pub horizon: Real,
    pub actuator: Vec<Real>,
    pub x0: Vec<Real>,
    pub predicted_energy: Real,
    pub total_energy: Real,
    pub relative_error: Real,
    pub terminal_norm: Real,
    pub samples: usize,
    pub verification: Verification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

/// Simulates the minimum-energy steering input. Defaults: `b = v*` and the
/// worst-case initial state for `b`.
pub fn cmd_energy(
    problem: &Problem,
    options: &EnergyOptions,
    format: Format,
    started: Option<Instant>,
) -> Result<CommandOutput> {
    let spectrum = &problem.spectrum;
    let n = problem.dim();
    let b = match &options.actuator {
        Some(entries) => parse_vector(problem, entries)?,
        None => problem.solve()?.solution.v_star().clone(),
    };
    if let Some(index) = b.zero_entry() {
        return Err(Error::ZeroEntryActuator { index });
    }
    let x0 = match &options.x0 {
        Some(entries) => parse_vector(problem, entries)?,
        None => worst_state(spectrum, &b)?,
    };
    let horizon = options.horizon.unwrap_or_else(|| default_horizon(spectrum));
    let predicted = energy_at(spectrum, &x0, &b)?;
    let mut trajectory = simulate(spectrum, &b, &x0, horizon)?;
    let relative_error = (trajectory.total_energy - predicted).abs() / predicted;

    let mut verification = Verification::default();
    verification.push(Check::at_most(
        "terminal_state",
        trajectory.terminal_norm(),
        DEFAULT_TERMINAL_TOL,
    ));
    verification.push(Check::at_most(
        "energy",
        relative_error,
        problem.tolerances.energy,
    ));
    let verification = verification.finish();
    let passed = verification.passed;

    match format {
        Format::Csv => {
            if let Some(system) = &problem.system {
                for state in &mut trajectory.states {
                    *state = (system.theta() * DVector::from_column_slice(state))
                        .data
                        .into();
                }
            }
            let mut buffer = Vec::new();
            trajectory
                .write_csv(&mut buffer)
                .map_err(|e| Error::InternalInvariant(format!("csv rendering failed: {e}")))?;
            let text = String::from_utf8(buffer).expect("csv is utf-8");
            Ok(CommandOutput { text, passed })
        }
        Format::Json => {
            let report = EnergyReport {
                command: "energy",
                n,
                coordinates: problem.coordinates(),
                horizon: Real(horizon),
                actuator: original(problem, &b)?,
                x0: original(problem, &x0)?,
                predicted_energy: Real(predicted),
                total_energy: Real(trajectory.total_energy),
                relative_error: Real(relative_error),
                terminal_norm: Real(trajectory.terminal_norm()),
                samples: trajectory.times.len(),
                verification,
                timing: timing(started),
            };
            Ok(json(&report, passed))
        }
    }
}

pub struct OptimizeOptions {
    pub seed: u64,
    pub start: Option<Vec<f64>>,
}

#[derive(Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub xi: Real,
    pub gradient_norm: Real,
    pub step: Real,
    pub b: Vec<Real>,
}

#[derive(Serialize)]
pub struct OptimizeReport {
    pub command: &'static str,
    pub n: usize,
    pub coordinates: &'static str,
    pub seed: u64,
    pub start: Vec<Real>,
    pub converged: bool,
    pub iterations: usize,
    pub b: Vec<Real>,
    pub xi: Real,
    pub xi_star: Real,
    pub matched_sigma: Option<Vec<i8>>,
    pub trace: Vec<TraceRow>,
    pub verification: Verification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

/// One projected gradient ascent from `--start` or from a seeded random point.
pub fn cmd_optimize(
    problem: &Problem,
    options: &OptimizeOptions,
    format: Format,
    started: Option<Instant>,
) -> Result<CommandOutput> {
    let spectrum = &problem.spectrum;
    let n = problem.dim();
    let tol = &problem.tolerances;
    let sol: MinimaxSolution = problem.solve()?.solution;
    let initial = match &options.start {
        Some(entries) => parse_vector(problem, entries)?,
        None => random_start(n, &mut ChaCha8Rng::seed_from_u64(options.seed)),
    };
    let config = AscentConfig {
        gradient_tol: tol.gradient,
        seed: options.seed,
        ..AscentConfig::new(initial.clone())
    };
    let trace = match ascend(spectrum, &config) {
        Ok(trace) => trace,
        Err(Error::NotConverged { trace, .. }) => *trace,
        Err(e) => return Err(e),
    };
    let b = trace.final_point();
    let matched = match_critical_point(&sol, b, tol.critical_point);
    let (r1, r2) = critical_residual(spectrum, b)?;

    let mut verification = Verification::default();
    verification.push(Check::holds("converged", trace.converged));
    verification.push(Check::holds("critical_point_match", matched.is_some()));
    verification.push(Check::at_most(
        "xi",
        (trace.final_xi() - sol.xi_star()).abs(),
        tol.xi,
    ));
    verification.push(Check::at_most(
        "stationarity_residual",
        r1.max(r2),
        tol.residual * residual_scale(problem),
    ));
    let verification = verification.finish();
    let passed = verification.passed;

    match format {
        Format::Csv => {
            let mut text = String::from("iteration,xi,gradient_norm,step");
            for i in 1..=n {
                text.push_str(&format!(",b_{i}"));
            }
            text.push('\n');
            for (k, it) in trace.iterates.iter().enumerate() {
                let b = problem.to_original(&it.b)?;
                let mut fields = vec![k.to_string()];
                fields.extend(
                    [it.xi, it.gradient_norm, it.step]
                        .iter()
                        .chain(b.as_slice())
                        .map(|v| csv_number(*v)),
                );
                text.push_str(&fields.join(","));
                text.push('\n');
            }
            Ok(CommandOutput { text, passed })
        }
        Format::Json => {
            let rows = trace
                .iterates
                .iter()
                .enumerate()
                .map(|(iteration, it)| {
                    Ok(TraceRow {
                        iteration,
                        xi: Real(it.xi),
                        gradient_norm: Real(it.gradient_norm),
                        step: Real(it.step),
                        b: original(problem, &it.b)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let report = OptimizeReport {
                command: "optimize",
                n,
                coordinates: problem.coordinates(),
                seed: options.seed,
                start: original(problem, &initial)?,
                converged: trace.converged,
                iterations: trace.iterations(),
                b: original(problem, b)?,
                xi: Real(trace.final_xi()),
                xi_star: Real(sol.xi_star()),
                matched_sigma: matched.map(|s| s.signs().to_vec()),
                trace: rows,
                verification,
                timing: timing(started),
            };
            Ok(json(&report, passed))
        }
    }
}

//! Acceptance run: one line per criterion, non-zero exit if any fails.

mod common;

use actuator_design::cauchy::{build_psi, cauchy_det, cauchy_det_step, psi_inverse};
use actuator_design::control::min_energy_control;
use actuator_design::minimax::{solve, solve_exact};
use actuator_design::optimizer::{
    critical_residual, directional_derivative, match_critical_point, multi_start, worst_state, xi,
    AscentConfig,
};
use actuator_design::scalar::Rational;
use actuator_design::spectrum::{diagonalize, pull_back, validate_spectrum, Spectrum, UnitVector};
use common::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::time::{Duration, Instant};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome {
            passed: true,
            detail: summary,
        }
    } else {
        let shown: Vec<&str> = failures.iter().take(3).map(String::as_str).collect();
        Outcome {
            passed: false,
            detail: format!(
                "{summary}; {} failure(s): {}",
                failures.len(),
                shown.join("; ")
            ),
        }
    }
}

fn check(failures: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        failures.push(what());
    }
}

fn sign_vector(v: &[f64]) -> Vec<i8> {
    v.iter().map(|&x| sign(x)).collect()
}

fn matches_up_to_sign(a: &[i8], b: &[i8]) -> bool {
    a == b || a.iter().zip(b).all(|(x, y)| *x == -*y)
}

/// `sgn(x) = ±σ*sgn(b)` and `max ||xᵢ| − |bᵢ|| < 1e-6`.
fn sign_and_modulus(x: &[f64], b: &[f64]) -> Result<(), String> {
    let star = alternating(x.len());
    let target: Vec<i8> = sign_vector(b)
        .iter()
        .zip(&star)
        .map(|(s, t)| s * t)
        .collect();
    if !matches_up_to_sign(&sign_vector(x), &target) {
        return Err(format!("sign pattern x={x:?} b={b:?}"));
    }
    let gap = x
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (p, q)| m.max((p.abs() - q.abs()).abs()));
    if gap >= 1e-6 {
        return Err(format!("modulus gap {gap:e}"));
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let mut failures = Vec::new();
    let lambda = [1.0, 2.0];

    let exact_spectrum = Spectrum::validate(&[q(1, 1), q(2, 1)]).unwrap();
    let (closed, _) = solve_exact(&exact_spectrum).unwrap();
    check(&mut failures, closed.phi == q(102, 1), || {
        format!("exact phi {}", closed.phi)
    });
    check(
        &mut failures,
        closed.v_star_squared == vec![q(7, 17), q(10, 17)],
        || format!("exact v*² {:?}", closed.v_star_squared),
    );

    let sol = solve(&validate_spectrum(&lambda).unwrap()).unwrap();
    check(&mut failures, (sol.phi() - 102.0).abs() < 1e-9, || {
        format!("float phi {}", sol.phi())
    });
    let v = sol.v_star().as_slice();
    let v2_err = (v[0] * v[0] - 7.0 / 17.0)
        .abs()
        .max((v[1] * v[1] - 10.0 / 17.0).abs());
    check(&mut failures, v2_err < 1e-12, || {
        format!("v*² error {v2_err:e}")
    });

    let inv = adjugate_inverse_2x2(&psi_f64(&lambda));
    let adj_phi = inv[(0, 0)] - inv[(0, 1)] - inv[(1, 0)] + inv[(1, 1)];
    check(&mut failures, (adj_phi - 102.0).abs() < 1e-9, || {
        format!("adjugate phi {adj_phi}")
    });

    let points = 100_000;
    let best = (0..points)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
            min_eigenvalue_2x2(&gramian_f64(&lambda, &[theta.cos(), theta.sin()]))
        })
        .fold(0.0f64, f64::max);
    let sweep_phi = 1.0 / best;
    check(&mut failures, (sweep_phi - 102.0).abs() < 1e-3, || {
        format!("sweep phi {sweep_phi}")
    });
    check(&mut failures, sweep_phi >= 102.0 - 1e-9, || {
        format!("sweep beat optimum: {sweep_phi}")
    });

    outcome(
        failures,
        format!(
            "phi exact {}, float err {:.1e}, adjugate {adj_phi:.12}, sweep {sweep_phi:.6}",
            closed.phi,
            (sol.phi() - 102.0).abs()
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut det_err, mut float_lu_err, mut inv_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut float_lu_outliers = 0;
    for trial in 0..100 {
        let n = rng.random_range(1..=6);
        let lambda = random_spectrum(&mut rng, n, (0.1, 2.0), (0.3, 2.0));
        let det = cauchy_det(&lambda, &lambda).unwrap();

        // LU carried out in exact arithmetic on the same inputs. Floating LU
        // loses about eps·cond(Ψ) and is only reported.
        let exact_lambda: Vec<Rational> = lambda.iter().map(|&x| exact(x)).collect();
        let exact_psi = cauchy_exact(&exact_lambda, &exact_lambda);
        let lu = to_f64(&exact_det(&exact_psi));
        let e = relative(det, lu);
        det_err = det_err.max(e);
        check(&mut failures, e < 1e-8, || {
            format!("trial {trial}: det {det:e} vs LU {lu:e}")
        });
        let float_lu = relative(det, lu_det(&psi_f64(&lambda)));
        float_lu_err = float_lu_err.max(float_lu);
        if float_lu >= 1e-8 {
            float_lu_outliers += 1;
        }

        let inverse = psi_inverse(&build_psi(&validate_spectrum(&lambda).unwrap()));
        let oracle = exact_inverse(&exact_psi).unwrap();
        for i in 0..n {
            for j in 0..n {
                let e = relative(inverse[(i, j)], to_f64(&oracle[i][j]));
                inv_err = inv_err.max(e);
                check(&mut failures, e < 1e-6, || {
                    format!("trial {trial}: inverse ({i},{j}) rel {e:e}")
                });
            }
        }
    }

    let mut sign_cases = 0;
    for n in 1..=12 {
        for _ in 0..5 {
            let lambda = random_spectrum(&mut rng, n, (0.1, 2.0), (0.3, 2.0));
            let inverse = psi_inverse(&build_psi(&validate_spectrum(&lambda).unwrap()));
            for i in 0..n {
                for j in 0..n {
                    let expected = if (i + j) % 2 == 0 { 1 } else { -1 };
                    check(&mut failures, sign(inverse[(i, j)]) == expected, || {
                        format!("n={n}: sign of ({i},{j})")
                    });
                }
            }
            sign_cases += 1;
        }
    }
    outcome(
        failures,
        format!(
            "det vs exact LU max rel {det_err:.1e} (float LU {float_lu_err:.1e}, {float_lu_outliers} above 1e-8), inverse max rel {inv_err:.1e}, {sign_cases} checkerboard spectra n<=12"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let increasing =
        |rng: &mut ChaCha8Rng, k: usize| random_spectrum(rng, k, (0.05, 1.5), (0.05, 1.5));
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let k = rng.random_range(1..=6);
        let (a, b) = (increasing(&mut rng, k), increasing(&mut rng, k));
        let (an, bn) = (a[k - 1], b[k - 1]);
        let mut step = 1.0 / (an + bn);
        for i in 0..k - 1 {
            step *= (an - a[i]) / (an + a[i]) * (bn - b[i]) / (bn + b[i]);
        }
        let full = cauchy_det(&a, &b).unwrap();
        let reduced = if k == 1 {
            1.0
        } else {
            cauchy_det(&a[..k - 1], &b[..k - 1]).unwrap()
        };
        let e =
            relative(full, reduced * step).max(relative(cauchy_det_step(&a, &b).unwrap(), step));
        worst = worst.max(e);
        check(&mut failures, e < 1e-10, || {
            format!("float trial {trial}: rel {e:e}")
        });

        let qa: Vec<Rational> = a.iter().map(|&x| exact(x)).collect();
        let qb: Vec<Rational> = b.iter().map(|&x| exact(x)).collect();
        let (qan, qbn) = (&qa[k - 1], &qb[k - 1]);
        let mut qstep = q(1, 1) / (qan + qbn);
        for i in 0..k - 1 {
            qstep *= (qan - &qa[i]) / (qan + &qa[i]) * (qbn - &qb[i]) / (qbn + &qb[i]);
        }
        let qfull = cauchy_det(&qa, &qb).unwrap();
        let qreduced = if k == 1 {
            q(1, 1)
        } else {
            cauchy_det(&qa[..k - 1], &qb[..k - 1]).unwrap()
        };
        check(&mut failures, qfull == &qreduced * &qstep, || {
            format!("exact trial {trial}")
        });
        check(
            &mut failures,
            cauchy_det_step(&qa, &qb).unwrap() == qstep,
            || format!("exact step {trial}"),
        );
    }
    outcome(
        failures,
        format!("100 pairs, float max rel {worst:.1e}, rational exact"),
    )
}

fn criterion_4() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = [2, 3, 4][trial % 3];
        let lambda = random_spectrum(&mut rng, n, (0.3, 2.0), (0.3, 2.0));
        let s = validate_spectrum(&lambda).unwrap();
        let b = UnitVector::new(random_unit(&mut rng, n)).unwrap();
        let raw = DVector::from_vec(random_unit(&mut rng, n));
        let v = &raw - b.as_vector() * raw.dot(b.as_vector());
        let h = 1e-6;
        let at = |t: f64| {
            let p = b.as_vector() + &v * t;
            xi(&s, &UnitVector::normalize(p.as_slice().to_vec()).unwrap()).unwrap()
        };
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let analytic = directional_derivative(&s, &b, &v).unwrap();
        let e = (fd - analytic).abs();
        worst = worst.max(e);
        check(&mut failures, e < 1e-6, || {
            format!("trial {trial}: {analytic} vs fd {fd}")
        });
    }
    outcome(failures, format!("100 points, max abs error {worst:.1e}"))
}

/// Criteria 5 and 6 share the multi-start runs.
fn criteria_5_and_6() -> (Outcome, Outcome) {
    let mut recovery = Vec::new();
    let mut structure = Vec::new();
    let mut runs = 0;
    let mut worst_xi = 0.0f64;
    let mut worst_residual = 0.0f64;
    let mut pairs = 0;
    for (lambda, seed) in [
        (vec![1.0, 2.0], 51u64),
        (vec![1.0, 2.0, 3.0], 52),
        (vec![0.4, 1.3, 2.9], 53),
    ] {
        let s = validate_spectrum(&lambda).unwrap();
        let sol = solve(&s).unwrap();
        // 1/(1ᵀσ*Ψ⁻¹σ*1) with Ψ⁻¹ from nalgebra's LU.
        let inv = psi_f64(&lambda).try_inverse().unwrap();
        let star = alternating(lambda.len());
        let phi: f64 = (0..lambda.len())
            .flat_map(|i| (0..lambda.len()).map(move |j| (i, j)))
            .map(|(i, j)| (star[i] * star[j]) as f64 * inv[(i, j)])
            .sum();
        let target = 1.0 / phi;

        for pair in sol.arg_phi() {
            pairs += 1;
            if let Err(e) = sign_and_modulus(pair.x.as_slice(), pair.b.as_slice()) {
                structure.push(format!("{lambda:?} arg phi: {e}"));
            }
        }

        let template = AscentConfig::new(UnitVector::basis(lambda.len(), 0));
        for (k, result) in multi_start(&s, 200, seed, &template)
            .into_iter()
            .enumerate()
        {
            runs += 1;
            let trace = match result {
                Ok(t) => t,
                Err(e) => {
                    recovery.push(format!("{lambda:?} restart {k}: {e}"));
                    continue;
                }
            };
            let b = trace.final_point();
            check(
                &mut recovery,
                match_critical_point(&sol, b, 1e-5).is_some(),
                || {
                    format!(
                        "{lambda:?} restart {k}: no σv* match for {:?}",
                        b.as_slice()
                    )
                },
            );
            let e = (trace.final_xi() - target).abs();
            worst_xi = worst_xi.max(e);
            check(&mut recovery, e <= 1e-9, || {
                format!("{lambda:?} restart {k}: ξ off by {e:e}")
            });
            let (r1, r2) = critical_residual(&s, b).unwrap();
            worst_residual = worst_residual.max(r1).max(r2);
            check(&mut recovery, r1 <= 1e-9 && r2 <= 1e-9, || {
                format!("{lambda:?} restart {k}: residuals {r1:e}, {r2:e}")
            });
            let x = worst_state(&s, b).unwrap();
            if let Err(e) = sign_and_modulus(x.as_slice(), b.as_slice()) {
                structure.push(format!("{lambda:?} restart {k}: {e}"));
            }
        }
    }
    (
        outcome(
            recovery,
            format!(
                "{runs} ascents, max ξ error {worst_xi:.1e}, max residual {worst_residual:.1e}"
            ),
        ),
        outcome(
            structure,
            format!("{pairs} arg phi pairs and {runs} recovered optima"),
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    let s = validate_spectrum(&[1.0, 2.0]).unwrap();
    let sol = solve(&s).unwrap();
    let x0 = worst_state(&s, sol.v_star()).unwrap();
    let (energy, terminal) = match min_energy_control(&s, sol.v_star(), &x0, 20.0) {
        Ok(t) => (t.total_energy, t.terminal_norm()),
        Err(e) => return outcome(vec![e.to_string()], "n=2".into()),
    };
    check(&mut failures, terminal <= 1e-6, || {
        format!("terminal norm {terminal:e}")
    });
    check(&mut failures, relative(energy, 102.0) < 1e-3, || {
        format!("energy {energy}")
    });

    let scalar = validate_spectrum(&[3.0]).unwrap();
    let one = UnitVector::basis(1, 0);
    let (scalar_energy, scalar_terminal) = match min_energy_control(&scalar, &one, &one, 20.0) {
        Ok(t) => (t.total_energy, t.terminal_norm()),
        Err(e) => return outcome(vec![e.to_string()], "n=1".into()),
    };
    check(&mut failures, scalar_terminal <= 1e-6, || {
        format!("scalar terminal {scalar_terminal:e}")
    });
    check(&mut failures, relative(scalar_energy, 6.0) < 1e-3, || {
        format!("scalar energy {scalar_energy}")
    });
    outcome(
        failures,
        format!("energy {energy:.6} (terminal {terminal:.1e}), scalar {scalar_energy:.6}"),
    )
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut smallest_gap = f64::INFINITY;
    for trial in 0..50 {
        let n = rng.random_range(1..=8);
        let lambda = random_spectrum(&mut rng, n, (0.1, 2.0), (0.3, 2.0));
        // The smallest eigenpair of Ψ is the largest of Ψ⁻¹, which is
        // resolved to full relative accuracy. Ψ⁻¹ comes from exact elimination.
        let exact_lambda: Vec<Rational> = lambda.iter().map(|&x| exact(x)).collect();
        let inv = exact_inverse(&cauchy_exact(&exact_lambda, &exact_lambda)).unwrap();
        let m = DMatrix::from_fn(n, n, |i, j| to_f64(&inv[i][j]));
        let eig = nalgebra::SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        if n > 1 {
            // (μ₂ − μ₁)/μ₂ for Ψ's eigenvalues μ = 1/ν.
            let gap = 1.0 - eig.eigenvalues[order[1]] / eig.eigenvalues[order[0]];
            smallest_gap = smallest_gap.min(gap);
            check(&mut failures, gap > 1e-10, || {
                format!("trial {trial}: gap {gap:e}")
            });
        }
        let v: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
        let star = alternating(n);
        check(
            &mut failures,
            matches_up_to_sign(&sign_vector(&v), &star),
            || format!("trial {trial}: signs {:?}", sign_vector(&v)),
        );
    }
    outcome(
        failures,
        format!("50 spectra n<=8, smallest relative gap {smallest_gap:.3}"),
    )
}

fn criterion_9() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut phi_err, mut energy_err) = (0.0f64, 0.0f64);
    for trial in 0..20 {
        let n = 2 + trial % 4;
        let lambda = random_spectrum(&mut rng, n, (0.5, 2.0), (0.5, 2.0));
        let phi = solve(&validate_spectrum(&lambda).unwrap()).unwrap().phi();
        let theta = random_orthogonal(&mut rng, n);
        let a =
            &theta * DMatrix::from_diagonal(&DVector::from_vec(lambda.clone())) * theta.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let system = diagonalize(&a).unwrap();
        let sol = solve(system.spectrum()).unwrap();
        let e = relative(sol.phi(), phi);
        phi_err = phi_err.max(e);
        check(&mut failures, e < 1e-10, || {
            format!("trial {trial}: phi rel {e:e}")
        });

        let pair = sol.arg_phi().next().unwrap();
        let b = pull_back(&system, &pair.b).unwrap();
        let x = pull_back(&system, &pair.x).unwrap();
        let w = kronecker_lyapunov(&a, b.as_slice());
        let energy = x.as_vector().dot(&w.lu().solve(x.as_vector()).unwrap());
        let e = relative(energy, phi);
        energy_err = energy_err.max(e);
        check(&mut failures, e < 1e-9, || {
            format!("trial {trial}: energy rel {e:e}")
        });
    }
    outcome(
        failures,
        format!(
            "20 rotations, phi max rel {phi_err:.1e}, energy identity max rel {energy_err:.1e}"
        ),
    )
}

fn report(k: usize, result: &Outcome, elapsed: Duration, limit: Option<Duration>) -> bool {
    let in_time = limit.is_none_or(|l| elapsed < l);
    let passed = result.passed && in_time;
    let budget = match limit {
        Some(l) if !in_time => format!(", over the {:.0?} budget", l),
        _ => String::new(),
    };
    println!(
        "criterion {k}: {} ({:.3}s{budget}) {}",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        result.detail
    );
    passed
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut all = true;

    let (r, t) = timed(criterion_1);
    all &= report(1, &r, t, Some(secs(1)));
    let (r, t) = timed(criterion_2);
    all &= report(2, &r, t, Some(secs(5)));
    let (r, t) = timed(criterion_3);
    all &= report(3, &r, t, None);
    let (r, t) = timed(criterion_4);
    all &= report(4, &r, t, None);
    let ((r5, r6), t) = timed(criteria_5_and_6);
    all &= report(5, &r5, t, Some(secs(30)));
    all &= report(6, &r6, t, None);
    let (r, t) = timed(criterion_7);
    all &= report(7, &r, t, Some(secs(2)));
    let (r, t) = timed(criterion_8);
    all &= report(8, &r, t, None);
    let (r, t) = timed(criterion_9);
    all &= report(9, &r, t, None);

    if all {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}

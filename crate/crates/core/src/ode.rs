//! Dormand–Prince 5(4) explicit Runge–Kutta with embedded error estimate.

use nalgebra::DVector;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (equal to the last row of `A`, FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

/// One step from `(t, y)` of length `h`. Returns the fifth-order solution and
/// the weighted RMS error norm (accept when `≤ 1`).
pub fn step<F>(f: &F, t: f64, y: &DVector<f64>, h: f64, tol: Tolerances) -> (DVector<f64>, f64)
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);
    for stage in 0..7 {
        let mut yi = y.clone();
        for (j, kj) in k.iter().enumerate() {
            if A[stage][j] != 0.0 {
                yi.axpy(h * A[stage][j], kj, 1.0);
            }
        }
        k.push(f(t + C[stage] * h, &yi));
    }
    let mut y5 = y.clone();
    let mut err = DVector::zeros(y.len());
    for (s, ks) in k.iter().enumerate() {
        y5.axpy(h * B5[s], ks, 1.0);
        err.axpy(h * (B5[s] - B4[s]), ks, 1.0);
    }
    let n = y.len().max(1) as f64;
    let norm = (err
        .iter()
        .zip(y.iter().zip(y5.iter()))
        .map(|(e, (a, b))| {
            let scale = tol.atol + tol.rtol * a.abs().max(b.abs());
            (e / scale).powi(2)
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (y5, norm)
}

/// Standard step-size update for an order-5 pair.
pub fn next_step(h: f64, error_norm: f64) -> f64 {
    let factor = if error_norm == 0.0 {
        5.0
    } else {
        (0.9 * error_norm.powf(-0.2)).clamp(0.2, 5.0)
    };
    h * factor
}

/// Integrates `y' = f(t, y)` over `[t0, t_end]`, returning every accepted
/// `(t, y)` including both endpoints.
pub fn integrate<F>(
    f: F,
    t0: f64,
    y0: DVector<f64>,
    t_end: f64,
    tol: Tolerances,
    h_max: f64,
) -> Vec<(f64, DVector<f64>)>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    let mut out = vec![(t0, y0.clone())];
    let mut t = t0;
    let mut y = y0;
    let mut h = h_max.min((t_end - t0) / 100.0);
    while t < t_end {
        if t + h >= t_end - 1e-12 * t_end.abs().max(1.0) {
            h = t_end - t;
        }
        let (y_new, err) = step(&f, t, &y, h, tol);
        if err <= 1.0 {
            t = if h == t_end - t { t_end } else { t + h };
            y = y_new;
            out.push((t, y.clone()));
        }
        h = next_step(h, err).min(h_max);
    }
    out
}

//! Dormand-Prince 5(4) integrator for matrix-valued linear ODEs.

use crate::model::CMatrix4;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget of {0} exhausted before reaching t_final")]
    TooManySteps(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    /// Absolute and relative local error tolerance.
    pub tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            initial_step: 1e-3,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

// Butcher tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
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

/// Integrates `dy/dt = f(t, y)` from `t0` to `t_final` and returns every
/// accepted `(t, y)` including the initial point.
///
/// The local error estimate of each step is held below
/// `tol · (1 + |y|)` element-wise.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    y0: CMatrix4,
    t_final: f64,
    control: StepControl,
) -> Result<Vec<(f64, CMatrix4)>, IntegrationError>
where
    F: FnMut(f64, &CMatrix4) -> CMatrix4,
{
    let mut out = vec![(t0, y0)];
    let mut t = t0;
    let mut y = y0;
    let mut h = control.initial_step.min(t_final - t0).min(control.max_step);
    let mut k1 = f(t, &y);
    let mut steps = 0usize;

    while t < t_final {
        if steps >= control.max_steps {
            return Err(IntegrationError::TooManySteps(control.max_steps));
        }
        steps += 1;
        let last = t + h >= t_final;
        if last {
            h = t_final - t;
        }

        let mut k = [k1; 7];
        for s in 1..7 {
            let mut arg = y;
            for (r, a) in A[s].iter().enumerate().take(s) {
                if *a != 0.0 {
                    arg += k[r] * Complex64::from(h * a);
                }
            }
            k[s] = f(t + C[s] * h, &arg);
        }
        let mut y_new = y;
        let mut err = CMatrix4::zeros();
        for s in 0..7 {
            y_new += k[s] * Complex64::from(h * B5[s]);
            err += k[s] * Complex64::from(h * (B5[s] - B4[s]));
        }

        let err_norm = err
            .iter()
            .zip(y.iter().zip(y_new.iter()))
            .map(|(e, (a, b))| e.norm() / (control.tol * (1.0 + a.norm().max(b.norm()))))
            .fold(0.0, f64::max);

        if err_norm <= 1.0 {
            t = if last { t_final } else { t + h };
            y = y_new;
            // FSAL: the last stage is f at the new point.
            k1 = k[6];
            out.push((t, y));
        }
        let factor = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).min(control.max_step);
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(IntegrationError::StepSizeUnderflow { t, h });
        }
    }
    Ok(out)
}

//! Phase-space synchronization of the three steady-state coherences.
//!
//! The quasi-probability deviation on the phase torus is
//!
//! ```text
//! S(φ21, φ31) = [Re(ρ12 e^{iφ21}) + Re(ρ13 e^{iφ31}) + Re(ρ23 e^{i(φ21−φ31)})] / 16π²
//! ```
//!
//! and `S_max` is its maximum over the torus.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DensityMatrix, MaserParams};

/// `1 / 16π²`.
pub const NORMALIZATION: f64 = 1.0 / (16.0 * PI * PI);
pub const MIN_GRID: usize = 16;
pub const DEFAULT_GRID: usize = 256;
/// Refinement stops once `|∇f| ≤ GRADIENT_TOL · (|ρ12| + |ρ13| + |ρ23|)`.
pub const GRADIENT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SyncError {
    #[error("dissipation-to-driving ratio undefined for lambda = 0")]
    DivisionByZero,
    #[error("phase grid needs at least {MIN_GRID} points per axis, got {0}")]
    GridTooSmall(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// `k = γh (1 + n_h2)(1 + p) / λ`.
pub fn dissipation_to_driving_ratio(params: &MaserParams) -> Result<f64, SyncError> {
    if params.lambda_drive == 0.0 {
        return Err(SyncError::DivisionByZero);
    }
    Ok(params.gamma_h * (1.0 + params.n_h2) * (1.0 + params.p) / params.lambda_drive)
}

/// Which closed-form branch of `S_max` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncBranch {
    /// Refrigerator side: entrainment and mutual coupling align.
    Cooperative,
    /// Engine side with `k > 2`.
    EntrainmentDominant,
    /// Engine side with `k ≤ 2`.
    MutualCouplingDominant,
}

impl SyncBranch {
    /// Branch selection from the occupations (`n_h2 > n_c` is the engine side).
    pub fn select(engine: bool, k: f64) -> Self {
        match (engine, k > 2.0) {
            (false, _) => SyncBranch::Cooperative,
            (true, true) => SyncBranch::EntrainmentDominant,
            (true, false) => SyncBranch::MutualCouplingDominant,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SyncBranch::Cooperative => "cooperative",
            SyncBranch::EntrainmentDominant => "entrainment_dominant",
            SyncBranch::MutualCouplingDominant => "mutual_coupling_dominant",
        }
    }
}

/// The three coherences entering the distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coherences {
    pub rho12: Complex64,
    pub rho13: Complex64,
    pub rho23: Complex64,
}

impl Coherences {
    pub fn of(rho: &DensityMatrix) -> Self {
        Self {
            rho12: rho.get(1, 2),
            rho13: rho.get(1, 3),
            rho23: rho.get(2, 3),
        }
    }

    fn scale(&self) -> f64 {
        self.rho12.norm() + self.rho13.norm() + self.rho23.norm()
    }

    /// `S(φ21, φ31)`.
    pub fn distribution(&self, phi21: f64, phi31: f64) -> f64 {
        NORMALIZATION * self.unnormalized(phi21, phi31)
    }

    fn unnormalized(&self, x: f64, y: f64) -> f64 {
        (self.rho12 * Complex64::cis(x)).re
            + (self.rho13 * Complex64::cis(y)).re
            + (self.rho23 * Complex64::cis(x - y)).re
    }

    /// Gradient and Hessian of the unnormalized distribution.
    fn derivatives(&self, x: f64, y: f64) -> ([f64; 2], [f64; 3]) {
        let a = self.rho12 * Complex64::cis(x);
        let b = self.rho13 * Complex64::cis(y);
        let c = self.rho23 * Complex64::cis(x - y);
        // d/dφ Re(z e^{iφ}) = −Im(z e^{iφ}); second derivative −Re(z e^{iφ}).
        let grad = [-a.im - c.im, -b.im + c.im];
        let hess = [-a.re - c.re, c.re, -b.re - c.re];
        (grad, hess)
    }
}

/// Uniform grid `φ_i = −π + 2πi/N`, `i = 0..N`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| -PI + 2.0 * PI * i as f64 / n as f64).collect()
}

/// Wraps an angle into `[−π, π)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// `S` sampled on an `N × N` grid; row index runs over φ21, column over φ31.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDistribution {
    pub grid_size: usize,
    pub phases: Vec<f64>,
    pub values: Vec<f64>,
}

impl PhaseDistribution {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid_size + j]
    }

    fn extreme_index(&self, better: impl Fn(f64, f64) -> bool) -> (usize, usize) {
        let mut best = 0;
        for (idx, v) in self.values.iter().enumerate() {
            if better(*v, self.values[best]) {
                best = idx;
            }
        }
        (best / self.grid_size, best % self.grid_size)
    }

    /// Grid index of the first maximum, scanning φ21 then φ31 upward.
    pub fn argmax(&self) -> (usize, usize) {
        self.extreme_index(|a, b| a > b)
    }

    pub fn argmin(&self) -> (usize, usize) {
        self.extreme_index(|a, b| a < b)
    }

    pub fn phases_at(&self, (i, j): (usize, usize)) -> (f64, f64) {
        (self.phases[i], self.phases[j])
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `phi21,phi31,S` rows, row-major, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * self.values.len() + 16);
        out.push_str("phi21,phi31,S\n");
        for (i, phi21) in self.phases.iter().enumerate() {
            for (j, phi31) in self.phases.iter().enumerate() {
                writeln!(out, "{:.11e},{:.11e},{:.11e}", phi21, phi31, self.value(i, j)).unwrap();
            }
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}

pub fn phase_distribution(rho: &DensityMatrix, grid_size: usize) -> Result<PhaseDistribution, SyncError> {
    if grid_size < MIN_GRID {
        return Err(SyncError::GridTooSmall(grid_size));
    }
    let c = Coherences::of(rho);
    let phases = phase_grid(grid_size);
    let mut values = Vec::with_capacity(grid_size * grid_size);
    for &x in &phases {
        for &y in &phases {
            values.push(c.distribution(x, y));
        }
    }
    Ok(PhaseDistribution {
        grid_size,
        phases,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusMaximum {
    pub s_max: f64,
    /// `(φ21, φ31)` in `[−π, π)`.
    pub argmax: (f64, f64),
}

/// Maximizes `S` with the default 256-point grid scan followed by Newton
/// refinement.
pub fn smax_numeric(rho: &DensityMatrix) -> TorusMaximum {
    smax_numeric_with_grid(rho, DEFAULT_GRID).expect("default grid is large enough")
}

pub fn smax_numeric_with_grid(rho: &DensityMatrix, grid_size: usize) -> Result<TorusMaximum, SyncError> {
    let dist = phase_distribution(rho, grid_size)?;
    let start = dist.phases_at(dist.argmax());
    let c = Coherences::of(rho);
    if c.scale() == 0.0 {
        return Ok(TorusMaximum {
            s_max: 0.0,
            argmax: start,
        });
    }
    let (x, y) = refine(&c, start);
    let argmax = (wrap_phase(x), wrap_phase(y));
    let refined = c.distribution(argmax.0, argmax.1);
    Ok(if refined >= dist.max() {
        TorusMaximum { s_max: refined, argmax }
    } else {
        TorusMaximum {
            s_max: dist.max(),
            argmax: start,
        }
    })
}

/// Newton ascent with a backtracking gradient fallback.
fn refine(c: &Coherences, (mut x, mut y): (f64, f64)) -> (f64, f64) {
    let tol = GRADIENT_TOL * c.scale();
    let mut f = c.unnormalized(x, y);
    for _ in 0..200 {
        let (g, [hxx, hxy, hyy]) = c.derivatives(x, y);
        if g[0].hypot(g[1]) <= tol {
            break;
        }
        let det = hxx * hyy - hxy * hxy;
        let newton = (hxx < 0.0 && det > 0.0).then(|| {
            // Solve H d = −g.
            let dx = (-g[0] * hyy + g[1] * hxy) / det;
            let dy = (-g[1] * hxx + g[0] * hxy) / det;
            (dx, dy)
        });
        let mut accepted = false;
        if let Some((dx, dy)) = newton {
            let f_new = c.unnormalized(x + dx, y + dy);
            if f_new >= f {
                x += dx;
                y += dy;
                f = f_new;
                accepted = true;
            }
        }
        if !accepted {
            let mut step = 1.0 / c.scale();
            while step > 1e-16 {
                let f_new = c.unnormalized(x + step * g[0], y + step * g[1]);
                if f_new > f {
                    x += step * g[0];
                    y += step * g[1];
                    f = f_new;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
        }
        if !accepted {
            break;
        }
    }
    (x, y)
}

/// Closed-form `S_max` given `k` and which side of `n_h2 = n_c` the state is on.
pub fn smax_closed_form_branch(rho: &DensityMatrix, k: f64, engine: bool) -> (f64, SyncBranch) {
    let c = Coherences::of(rho);
    let (a12, a13, a23) = (c.rho12.norm(), c.rho13.norm(), c.rho23.norm());
    let branch = SyncBranch::select(engine, k);
    let s = match branch {
        SyncBranch::Cooperative => a12 + a13 + a23,
        SyncBranch::EntrainmentDominant => a12 + a13 - a23,
        SyncBranch::MutualCouplingDominant => (1.0 + k * k / 2.0) * a23,
    };
    (NORMALIZATION * s, branch)
}

/// Closed-form `S_max` for a degenerate, resonantly driven steady state.
pub fn smax_closed_form(params: &MaserParams, rho: &DensityMatrix) -> Result<(f64, SyncBranch), SyncError> {
    if !params.is_degenerate_resonant() {
        return Err(SyncError::PreconditionViolated(format!(
            "closed-form S_max needs delta = 0 and resonant drive (delta = {})",
            params.delta
        )));
    }
    let k = dissipation_to_driving_ratio(params)?;
    Ok(smax_closed_form_branch(rho, k, params.n_h2 > params.n_c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncResult {
    pub k: f64,
    /// Present only for degenerate, resonant parameters.
    pub s_max_closed: Option<f64>,
    pub s_max_numeric: f64,
    pub argmax_phases: (f64, f64),
    pub branch: SyncBranch,
}

/// Numeric `S_max` for any parameters plus the closed form where it applies.
pub fn analyze(params: &MaserParams, rho: &DensityMatrix) -> Result<SyncResult, SyncError> {
    let k = dissipation_to_driving_ratio(params)?;
    let numeric = smax_numeric(rho);
    let s_max_closed = smax_closed_form(params, rho).ok().map(|(s, _)| s);
    Ok(SyncResult {
        k,
        s_max_closed,
        s_max_numeric: numeric.s_max,
        argmax_phases: numeric.argmax,
        branch: SyncBranch::select(params.n_h2 > params.n_c, k),
    })
}

//! Power, heat currents and figures of merit.
//!
//! Sign convention: every current is positive when energy flows into the
//! system, so an engine has `P < 0`, `Q̇h > 0`, `Q̇c < 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DensityMatrix, MaserModel, MaserParams};
use crate::steady_state::closed_form_denominator;

/// Currents with magnitude at or below this are treated as zero when
/// classifying the operating regime.
pub const ZERO_CURRENT: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("{quantity} is undefined in the {regime} regime")]
    RegimeMismatch { quantity: &'static str, regime: Regime },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Engine,
    Refrigerator,
    Other,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Engine => "engine",
            Regime::Refrigerator => "refrigerator",
            Regime::Other => "other",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoCurrents {
    pub power: f64,
    pub q_hot_inc: f64,
    pub q_hot_coh: f64,
    pub q_hot: f64,
    pub q_cold: f64,
    pub regime: Regime,
}

impl ThermoCurrents {
    pub fn new(power: f64, q_hot_inc: f64, q_hot_coh: f64, q_cold: f64) -> Self {
        let q_hot = q_hot_inc + q_hot_coh;
        Self {
            power,
            q_hot_inc,
            q_hot_coh,
            q_hot,
            q_cold,
            regime: regime_of(power, q_hot, q_cold),
        }
    }

    /// Evaluates all currents on `rho`.
    pub fn from_state(model: &MaserModel, rho: &DensityMatrix) -> Self {
        let (q_inc, q_coh) = hot_heat(model, rho);
        Self::new(power(model, rho), q_inc, q_coh, cold_heat(model, rho))
    }

    /// `P + Q̇h + Q̇c`, which vanishes at a steady state.
    pub fn first_law_residual(&self) -> f64 {
        self.power + self.q_hot + self.q_cold
    }

    pub fn scale(&self) -> f64 {
        self.power.abs() + self.q_hot.abs() + self.q_cold.abs()
    }
}

fn sign(x: f64) -> i8 {
    if x > ZERO_CURRENT {
        1
    } else if x < -ZERO_CURRENT {
        -1
    } else {
        0
    }
}

fn regime_of(power: f64, q_hot: f64, q_cold: f64) -> Regime {
    match (sign(power), sign(q_hot), sign(q_cold)) {
        (-1, 1, -1) => Regime::Engine,
        (1, -1, 1) => Regime::Refrigerator,
        _ => Regime::Other,
    }
}

/// Engine needs `Q̇h > 0, Q̇c < 0, P < 0`; refrigerator the reverse. Anything
/// else, including currents within [`ZERO_CURRENT`] of zero, is `Other`.
pub fn classify_regime(currents: &ThermoCurrents) -> Regime {
    regime_of(currents.power, currents.q_hot, currents.q_cold)
}

/// `P = 2λ Σ_j (ωj − ω1) Im ρ1j`.
pub fn power(model: &MaserModel, rho: &DensityMatrix) -> f64 {
    let p = model.params();
    let w = [p.omega2, p.omega3()];
    2.0 * p.lambda_drive * (0..2).map(|k| (w[k] - p.omega1) * rho.get(1, k + 2).im).sum::<f64>()
}

/// Incoherent and coherent parts of the hot heat current.
pub fn hot_heat(model: &MaserModel, rho: &DensityMatrix) -> (f64, f64) {
    let p = model.params();
    let (n2, n3) = (model.n_hot(2), model.n_hot(3));
    let (w2, w3) = (p.omega2, p.omega3());
    let rho00 = rho.population(0);
    let q_inc = 2.0
        * p.gamma_h
        * (w2 * (n2 * rho00 - (1.0 + n2) * rho.population(2)) + w3 * (n3 * rho00 - (1.0 + n3) * rho.population(3)));
    let q_coh = -2.0 * p.gamma_h * ((1.0 + n2) * w3 + (1.0 + n3) * w2) * p.p * rho.get(2, 3).re;
    (q_inc, q_coh)
}

/// `Q̇c = 2ω1 γc [n_c ρ00 − (1 + n_c) ρ11]`.
pub fn cold_heat(model: &MaserModel, rho: &DensityMatrix) -> f64 {
    let p = model.params();
    2.0 * p.omega1 * p.gamma_c * (p.n_c * rho.population(0) - (1.0 + p.n_c) * rho.population(1))
}

/// `dE/dt = Tr(ρ̇ H0)` with the bare Hamiltonian.
pub fn energy_flux(model: &MaserModel, rho: &DensityMatrix) -> f64 {
    (model.rhs(rho.matrix()) * model.bare_hamiltonian()).trace().re
}

/// Closed-form steady-state currents at `Δ = 0`, resonant drive.
pub fn analytic_currents(params: &MaserParams) -> Result<ThermoCurrents, ThermoError> {
    if !params.is_degenerate_resonant() {
        return Err(ThermoError::PreconditionViolated(format!(
            "closed-form currents need delta = 0 and resonant drive (delta = {})",
            params.delta
        )));
    }
    let MaserParams {
        omega1: w1,
        omega2: w2,
        lambda_drive: lam,
        gamma_h: gh,
        gamma_c: gc,
        n_c: nc,
        n_h2: nh,
        p,
        ..
    } = *params;
    let f = closed_form_denominator(params);
    let common = 4.0 * lam * lam * gc * gh * (1.0 + nh) * (nh - nc) / f;
    let q_inc = w2 * common;
    Ok(ThermoCurrents::new(
        -(w2 - w1) * (1.0 + p) * common,
        q_inc,
        p * q_inc,
        -w1 * (1.0 + p) * common,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiguresOfMerit {
    /// `−P / Q̇h`, engine regime only.
    pub eta: Option<f64>,
    /// `Q̇c / P`, refrigerator regime only.
    pub chi: Option<f64>,
    pub eta_carnot: f64,
}

pub fn efficiency(currents: &ThermoCurrents) -> Result<f64, ThermoError> {
    match currents.regime {
        Regime::Engine => Ok(-currents.power / currents.q_hot),
        regime => Err(ThermoError::RegimeMismatch {
            quantity: "efficiency",
            regime,
        }),
    }
}

pub fn coefficient_of_performance(currents: &ThermoCurrents) -> Result<f64, ThermoError> {
    match currents.regime {
        Regime::Refrigerator => Ok(currents.q_cold / currents.power),
        regime => Err(ThermoError::RegimeMismatch {
            quantity: "coefficient of performance",
            regime,
        }),
    }
}

/// `1 − T_c/T_h`. A zero-temperature hot bath gives `−∞` (or NaN when both
/// baths are at zero temperature).
pub fn carnot_efficiency(model: &MaserModel) -> f64 {
    let b = model.baths();
    1.0 - b.t_c / b.t_h
}

pub fn efficiency_and_cop(currents: &ThermoCurrents, model: &MaserModel) -> FiguresOfMerit {
    FiguresOfMerit {
        eta: efficiency(currents).ok(),
        chi: coefficient_of_performance(currents).ok(),
        eta_carnot: carnot_efficiency(model),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady_state::{analytic_steady_state, numeric_steady_state};

    fn degenerate(n_h2: f64, p: f64) -> MaserParams {
        MaserParams {
            delta: 0.0,
            n_h2,
            p,
            ..MaserParams::default()
        }
    }

    fn steady(params: MaserParams) -> (MaserModel, DensityMatrix) {
        let model = MaserModel::new(params).unwrap();
        let rho = analytic_steady_state(&model).unwrap().rho;
        (model, rho)
    }

    #[test]
    fn undriven_power_vanishes() {
        let params = MaserParams {
            lambda_drive: 0.0,
            ..MaserParams::default()
        };
        let model = MaserModel::new(params).unwrap();
        assert_eq!(power(&model, &DensityMatrix::maximally_mixed()), 0.0);
    }

    #[test]
    fn ground_state_fluxes() {
        let model = MaserModel::new(MaserParams::default()).unwrap();
        let g = DensityMatrix::ground();
        let p = model.params();
        assert!((cold_heat(&model, &g) - 2.0 * p.omega1 * p.gamma_c * p.n_c).abs() < 1e-15);
        let expected = 2.0 * p.gamma_c * p.n_c * p.omega1
            + 2.0 * p.gamma_h * (model.n_hot(2) * p.omega2 + model.n_hot(3) * p.omega3());
        assert!((energy_flux(&model, &g) - expected).abs() < 1e-14);
        let (_, coh) = hot_heat(&model, &g);
        assert_eq!(coh, 0.0);
    }

    #[test]
    fn analytic_currents_match_observables() {
        for (nh, p) in [(0.5, 0.5), (0.05, 0.5), (0.5, -0.99), (0.3, 0.9), (0.02, -0.5)] {
            let params = degenerate(nh, p);
            let (model, rho) = steady(params);
            let observed = ThermoCurrents::from_state(&model, &rho);
            let closed = analytic_currents(&params).unwrap();
            for (a, b) in [
                (observed.power, closed.power),
                (observed.q_hot_inc, closed.q_hot_inc),
                (observed.q_hot_coh, closed.q_hot_coh),
                (observed.q_cold, closed.q_cold),
            ] {
                assert!((a - b).abs() < 1e-10 * closed.scale().max(1e-300), "{a} vs {b}");
            }
            assert!(closed.first_law_residual().abs() < 1e-12 * closed.scale());
        }
    }

    #[test]
    fn regimes_follow_occupations() {
        let (m, rho) = steady(degenerate(0.5, 0.5));
        let c = ThermoCurrents::from_state(&m, &rho);
        assert_eq!(c.regime, Regime::Engine);
        assert!((efficiency(&c).unwrap() - 2.0 / 3.0).abs() < 1e-10);
        assert!(efficiency(&c).unwrap() <= carnot_efficiency(&m));
        assert!(coefficient_of_performance(&c).is_err());
        assert!(c.q_hot_coh > 0.0);

        let (m, rho) = steady(degenerate(0.05, 0.5));
        let c = ThermoCurrents::from_state(&m, &rho);
        assert_eq!(c.regime, Regime::Refrigerator);
        assert!((coefficient_of_performance(&c).unwrap() - 0.5).abs() < 1e-10);
        let fom = efficiency_and_cop(&c, &m);
        assert!(fom.eta.is_none() && fom.chi.is_some());

        let (m, rho) = steady(degenerate(0.1, 0.5));
        let c = ThermoCurrents::from_state(&m, &rho);
        assert_eq!(c.regime, Regime::Other);
        assert!(matches!(efficiency(&c), Err(ThermoError::RegimeMismatch { .. })));
    }

    #[test]
    fn suppression_for_negative_p() {
        let (m, rho) = steady(degenerate(0.5, -0.5));
        let (inc, coh) = hot_heat(&m, &rho);
        assert!(coh < 0.0);
        assert!((coh / inc + 0.5).abs() < 1e-10);
    }

    #[test]
    fn first_law_away_from_degeneracy() {
        let model = MaserModel::new(MaserParams::default()).unwrap();
        let rho = numeric_steady_state(&model).unwrap().rho;
        let c = ThermoCurrents::from_state(&model, &rho);
        assert!(c.first_law_residual().abs() < 1e-10 * c.scale());
        assert!((energy_flux(&model, &rho) - c.first_law_residual()).abs() < 1e-12);
    }

    #[test]
    fn analytic_currents_require_degeneracy() {
        assert!(matches!(
            analytic_currents(&MaserParams::default()),
            Err(ThermoError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn zero_threshold() {
        let c = ThermoCurrents::new(-1e-15, 1e-3, 0.0, -1e-3);
        assert_eq!(classify_regime(&c), Regime::Other);
    }
}

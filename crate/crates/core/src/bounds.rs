//! Synchronization bounds on power, coherent heat, efficiency and COP.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::MaserParams;
use crate::sync::SyncResult;
use crate::thermo::{coefficient_of_performance, efficiency, Regime, ThermoCurrents};

/// Relative slack on `ratio ≤ 1` absorbing the maximizer tolerance.
pub const SATISFACTION_TOL: f64 = 1e-9;
/// `S_max` at or below this makes every ratio undefined.
pub const DEGENERATE_SYNC: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("S_max = {s_max:e} is too small for a meaningful ratio")]
    DegenerateSync { s_max: f64 },
    #[error("Q-S ratio is undefined for p = 0")]
    UndefinedForZeroP,
    #[error("{bound} bound needs the {expected} regime, found {found}")]
    RegimeMismatch {
        bound: &'static str,
        expected: Regime,
        found: Regime,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

/// `κ = 32π² λ (ω3 − ω1)`.
pub fn kappa(params: &MaserParams) -> f64 {
    32.0 * PI * PI * params.lambda_drive * (params.omega3() - params.omega1)
}

/// `α = 64π² γh ω3 (1 + n_h2) |p|`.
pub fn alpha(params: &MaserParams) -> f64 {
    64.0 * PI * PI * params.gamma_h * params.omega3() * (1.0 + params.n_h2) * params.p.abs()
}

pub fn is_satisfied(ratio: f64) -> bool {
    ratio <= 1.0 + SATISFACTION_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// Left-hand side over right-hand side for upper bounds, or bound over
    /// achieved value for the efficiency and COP lower bounds.
    pub ratio: f64,
    pub satisfied: bool,
}

impl BoundCheck {
    fn new(ratio: f64) -> Self {
        Self {
            ratio,
            satisfied: is_satisfied(ratio),
        }
    }
}

fn s_max(sync: &SyncResult) -> Result<f64, BoundError> {
    let s = sync.s_max_numeric;
    if s <= DEGENERATE_SYNC {
        Err(BoundError::DegenerateSync { s_max: s })
    } else {
        Ok(s)
    }
}

fn require(bound: &'static str, expected: Regime, currents: &ThermoCurrents) -> Result<(), BoundError> {
    if currents.regime == expected {
        Ok(())
    } else {
        Err(BoundError::RegimeMismatch {
            bound,
            expected,
            found: currents.regime,
        })
    }
}

/// `|P| / (κ S_max)`.
pub fn ps_bound(currents: &ThermoCurrents, sync: &SyncResult, params: &MaserParams) -> Result<BoundCheck, BoundError> {
    let s = s_max(sync)?;
    Ok(BoundCheck::new(currents.power.abs() / (kappa(params) * s)))
}

/// `|Q̇h_coh| / (α S_max)`.
pub fn qs_bound(currents: &ThermoCurrents, sync: &SyncResult, params: &MaserParams) -> Result<BoundCheck, BoundError> {
    if params.p == 0.0 {
        return Err(BoundError::UndefinedForZeroP);
    }
    let s = s_max(sync)?;
    Ok(BoundCheck::new(currents.q_hot_coh.abs() / (alpha(params) * s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    /// `η_S` or `χ_S`.
    pub value: f64,
    pub check: BoundCheck,
}

/// `η_S = κ S_max / (Q̇h_inc + α S_max)` compared with the achieved `η`.
pub fn es_bound(currents: &ThermoCurrents, sync: &SyncResult, params: &MaserParams) -> Result<LowerBound, BoundError> {
    require("E-S", Regime::Engine, currents)?;
    let s = s_max(sync)?;
    let eta = efficiency(currents).expect("engine regime checked");
    let value = kappa(params) * s / (currents.q_hot_inc + alpha(params) * s);
    Ok(LowerBound {
        value,
        check: BoundCheck::new(value / eta),
    })
}

/// `χ_S = Q̇c / (κ S_max)` compared with the achieved `χ`.
pub fn cop_bound(currents: &ThermoCurrents, sync: &SyncResult, params: &MaserParams) -> Result<LowerBound, BoundError> {
    require("COP-S", Regime::Refrigerator, currents)?;
    let s = s_max(sync)?;
    let chi = coefficient_of_performance(currents).expect("refrigerator regime checked");
    let value = currents.q_cold / (kappa(params) * s);
    Ok(LowerBound {
        value,
        check: BoundCheck::new(value / chi),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundFlags {
    pub ps: Option<bool>,
    pub qs: Option<bool>,
    pub es: Option<bool>,
    pub cop: Option<bool>,
}

/// Every bound evaluated at one steady state; inapplicable entries are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub regime: Regime,
    pub kappa: f64,
    pub alpha: f64,
    pub ratio_ps: Option<f64>,
    pub ratio_qs: Option<f64>,
    pub eta_s: Option<f64>,
    pub ratio_es: Option<f64>,
    pub chi_s: Option<f64>,
    pub ratio_cop: Option<f64>,
    pub flags: BoundFlags,
}

pub fn bound_report(currents: &ThermoCurrents, sync: &SyncResult, params: &MaserParams) -> BoundReport {
    let ps = ps_bound(currents, sync, params).ok();
    let qs = qs_bound(currents, sync, params).ok();
    let es = es_bound(currents, sync, params).ok();
    let cop = cop_bound(currents, sync, params).ok();
    BoundReport {
        regime: currents.regime,
        kappa: kappa(params),
        alpha: alpha(params),
        ratio_ps: ps.map(|b| b.ratio),
        ratio_qs: qs.map(|b| b.ratio),
        eta_s: es.map(|b| b.value),
        ratio_es: es.map(|b| b.check.ratio),
        chi_s: cop.map(|b| b.value),
        ratio_cop: cop.map(|b| b.check.ratio),
        flags: BoundFlags {
            ps: ps.map(|b| b.satisfied),
            qs: qs.map(|b| b.satisfied),
            es: es.map(|b| b.check.satisfied),
            cop: cop.map(|b| b.check.satisfied),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Violated,
}

impl Verdict {
    fn from_flags(flags: impl Iterator<Item = bool>) -> Option<Self> {
        let mut seen = false;
        for ok in flags {
            if !ok {
                return Some(Verdict::Violated);
            }
            seen = true;
        }
        seen.then_some(Verdict::Satisfied)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Satisfied => "✓",
            Verdict::Violated => "✗",
        })
    }
}

/// Satisfied/violated pattern per bound and regime. A cell is violated if any
/// point in that regime violates the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryTable {
    /// `[engine, refrigerator]`.
    pub ps: [Verdict; 2],
    pub qs: [Verdict; 2],
    /// Efficiency bound in the engine column, COP bound in the refrigerator column.
    pub es: [Verdict; 2],
}

/// Builds the table from per-point reports. Points in the `other` regime and
/// absent ratios are ignored.
pub fn summary_table(reports: &[BoundReport]) -> Result<SummaryTable, BoundError> {
    let column = |regime: Regime| reports.iter().filter(move |r| r.regime == regime);
    let cell = |name: &str, regime: Regime, pick: fn(&BoundReport) -> Option<bool>| {
        Verdict::from_flags(column(regime).filter_map(pick))
            .ok_or_else(|| BoundError::InsufficientData(format!("no {name} data in the {regime} regime")))
    };
    Ok(SummaryTable {
        ps: [
            cell("P-S", Regime::Engine, |r| r.flags.ps)?,
            cell("P-S", Regime::Refrigerator, |r| r.flags.ps)?,
        ],
        qs: [
            cell("Q-S", Regime::Engine, |r| r.flags.qs)?,
            cell("Q-S", Regime::Refrigerator, |r| r.flags.qs)?,
        ],
        es: [
            cell("E-S", Regime::Engine, |r| r.flags.es)?,
            cell("COP-S", Regime::Refrigerator, |r| r.flags.cop)?,
        ],
    })
}

impl fmt::Display for SummaryTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8}{:<8}refrigerator", "bound", "engine")?;
        for (name, row) in [("P-S", self.ps), ("Q-S", self.qs), ("E-S", self.es)] {
            writeln!(f, "{:<8}{:<8}{}", name, row[0].to_string(), row[1])?;
        }
        Ok(())
    }
}

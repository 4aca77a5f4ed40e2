//! Parameter sweeps and their CSV/JSON emission.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::analysis::analyze_point;
use crate::model::{MaserParams, ModelError};
use crate::steady_state::{SolveMethod, SolverChoice};
use crate::thermo::Regime;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error("invalid parameters at {axis} = {value}: {source}")]
    Params {
        axis: &'static str,
        value: f64,
        source: ModelError,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("nothing to emit")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Sets `n_h2 = value · n_c`.
    Nh2OverNc,
    P,
    Delta,
    Lambda,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Nh2OverNc => "nh2_over_nc",
            SweepAxis::P => "p",
            SweepAxis::Delta => "delta",
            SweepAxis::Lambda => "lambda",
        }
    }

    pub fn apply(&self, base: &MaserParams, value: f64) -> MaserParams {
        let mut params = *base;
        match self {
            SweepAxis::Nh2OverNc => params.n_h2 = value * base.n_c,
            SweepAxis::P => params.p = value,
            SweepAxis::Delta => params.delta = value,
            SweepAxis::Lambda => params.lambda_drive = value,
        }
        params
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub base: MaserParams,
    pub sweep_axis: SweepAxis,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    #[serde(default)]
    pub solver: SolverChoice,
    /// Columns to emit after the sweep value; empty means all.
    #[serde(default)]
    pub outputs: Vec<String>,
}

impl SweepConfig {
    pub fn new(base: MaserParams, sweep_axis: SweepAxis, from: f64, to: f64, points: usize) -> Self {
        Self {
            base,
            sweep_axis,
            from,
            to,
            points,
            solver: SolverChoice::Auto,
            outputs: Vec::new(),
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self, SweepError> {
        let text = fs::read_to_string(path).map_err(|source| SweepError::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| SweepError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    /// Uniformly spaced values including both endpoints.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.to
                } else {
                    self.from + (self.to - self.from) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.points < 2 {
            return Err(SweepError::Config(format!(
                "points must be at least 2, got {}",
                self.points
            )));
        }
        if self.from.partial_cmp(&self.to) != Some(std::cmp::Ordering::Less) {
            return Err(SweepError::Config(format!(
                "from ({}) must be less than to ({})",
                self.from, self.to
            )));
        }
        for name in &self.outputs {
            if !OBSERVABLE_COLUMNS.contains(&name.as_str()) {
                return Err(SweepError::Config(format!("unknown output column '{name}'")));
            }
        }
        for value in self.values() {
            let params = self.sweep_axis.apply(&self.base, value);
            params.validate().map_err(|source| SweepError::Params {
                axis: self.sweep_axis.name(),
                value,
                source,
            })?;
            if self.solver == SolverChoice::Analytic && !params.is_degenerate_resonant() {
                return Err(SweepError::Config(format!(
                    "analytic solver needs delta = 0 and resonant drive at every point ({} = {value})",
                    self.sweep_axis.name()
                )));
            }
        }
        Ok(())
    }
}

/// One evaluated sweep point. Quantities that do not apply, or could not be
/// computed, are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub params: MaserParams,
    pub k: Option<f64>,
    pub power: Option<f64>,
    pub q_hot_inc: Option<f64>,
    pub q_hot_coh: Option<f64>,
    pub q_cold: Option<f64>,
    pub s_max: Option<f64>,
    pub ratio_ps: Option<f64>,
    pub ratio_qs: Option<f64>,
    pub eta: Option<f64>,
    pub eta_s: Option<f64>,
    pub chi: Option<f64>,
    pub chi_s: Option<f64>,
    pub regime: Option<Regime>,
    pub residual: Option<f64>,
    pub ratio_es: Option<f64>,
    pub ratio_cop: Option<f64>,
    pub eta_carnot: Option<f64>,
    pub method: Option<SolveMethod>,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(value: f64, params: MaserParams, error: String) -> Self {
        Self {
            value,
            params,
            k: None,
            power: None,
            q_hot_inc: None,
            q_hot_coh: None,
            q_cold: None,
            s_max: None,
            ratio_ps: None,
            ratio_qs: None,
            eta: None,
            eta_s: None,
            chi: None,
            chi_s: None,
            regime: None,
            residual: None,
            ratio_es: None,
            ratio_cop: None,
            eta_carnot: None,
            method: None,
            error: Some(error),
        }
    }

    fn evaluate(value: f64, params: MaserParams, solver: SolverChoice) -> Self {
        match analyze_point(params, solver) {
            Ok(a) => Self {
                value,
                params,
                k: Some(a.sync.k),
                power: Some(a.currents.power),
                q_hot_inc: Some(a.currents.q_hot_inc),
                q_hot_coh: Some(a.currents.q_hot_coh),
                q_cold: Some(a.currents.q_cold),
                s_max: Some(a.sync.s_max_numeric),
                ratio_ps: a.bounds.ratio_ps,
                ratio_qs: a.bounds.ratio_qs,
                eta: a.merit.eta,
                eta_s: a.bounds.eta_s,
                chi: a.merit.chi,
                chi_s: a.bounds.chi_s,
                regime: Some(a.currents.regime),
                residual: Some(a.solution.residual),
                ratio_es: a.bounds.ratio_es,
                ratio_cop: a.bounds.ratio_cop,
                eta_carnot: Some(a.merit.eta_carnot).filter(|c| c.is_finite()),
                method: Some(a.solution.method),
                error: None,
            },
            Err(e) => Self::failed(value, params, e.to_string()),
        }
    }

    /// Value of a named column, see [`OBSERVABLE_COLUMNS`].
    pub fn column(&self, name: &str) -> Cell {
        use Cell::*;
        let p = &self.params;
        match name {
            "k" => Num(self.k),
            "P" => Num(self.power),
            "Qh_inc" => Num(self.q_hot_inc),
            "Qh_coh" => Num(self.q_hot_coh),
            "Qc" => Num(self.q_cold),
            "Smax" => Num(self.s_max),
            "ratio_ps" => Num(self.ratio_ps),
            "ratio_qs" => Num(self.ratio_qs),
            "eta" => Num(self.eta),
            "eta_S" => Num(self.eta_s),
            "chi" => Num(self.chi),
            "chi_S" => Num(self.chi_s),
            "regime" => Text(self.regime.map(|r| r.as_str().to_owned())),
            "residual" => Num(self.residual),
            "ratio_es" => Num(self.ratio_es),
            "ratio_cop" => Num(self.ratio_cop),
            "eta_carnot" => Num(self.eta_carnot),
            "method" => Text(self.method.map(|m| m.as_str().to_owned())),
            "error" => Text(self.error.clone()),
            "omega1" => Num(Some(p.omega1)),
            "omega2" => Num(Some(p.omega2)),
            "delta" => Num(Some(p.delta)),
            "Omega" => Num(Some(p.drive_frequency())),
            "lambda" => Num(Some(p.lambda_drive)),
            "gamma_h" => Num(Some(p.gamma_h)),
            "gamma_c" => Num(Some(p.gamma_c)),
            "n_c" => Num(Some(p.n_c)),
            "n_h2" => Num(Some(p.n_h2)),
            "p" => Num(Some(p.p)),
            other => panic!("unknown column {other}"),
        }
    }
}

/// Observable columns in emission order. The sweep value column precedes them.
pub const OBSERVABLE_COLUMNS: &[&str] = &[
    "k",
    "P",
    "Qh_inc",
    "Qh_coh",
    "Qc",
    "Smax",
    "ratio_ps",
    "ratio_qs",
    "eta",
    "eta_S",
    "chi",
    "chi_S",
    "regime",
    "residual",
    "ratio_es",
    "ratio_cop",
    "eta_carnot",
    "method",
    "error",
    "omega1",
    "omega2",
    "delta",
    "Omega",
    "lambda",
    "gamma_h",
    "gamma_c",
    "n_c",
    "n_h2",
    "p",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(Option<f64>),
    Text(Option<String>),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(Some(x)) if x.is_finite() => format!("{x:.11e}"),
            Cell::Text(Some(s)) => csv_escape(s),
            _ => "NA".to_owned(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(Some(x)) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Text(Some(s)) => Value::String(s.clone()),
            _ => Value::Null,
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Evaluates every sweep point in parallel; rows come back in ascending
/// sweep-value order. Point failures land in the row's `error` field.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>, SweepError> {
    config.validate()?;
    let mut rows: Vec<SweepRow> = config
        .values()
        .into_par_iter()
        .map(|value| {
            let params = config.sweep_axis.apply(&config.base, value);
            let row = SweepRow::evaluate(value, params, config.solver);
            if let Some(e) = &row.error {
                log::warn!("{} = {value}: {e}", config.sweep_axis.name());
            }
            row
        })
        .collect();
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

/// Header names: the sweep value first, then `columns` (all observables when empty).
pub fn header(axis: SweepAxis, columns: &[String]) -> Vec<&str> {
    let mut out = vec![axis.name()];
    if columns.is_empty() {
        out.extend_from_slice(OBSERVABLE_COLUMNS);
    } else {
        out.extend(columns.iter().map(String::as_str));
    }
    out
}

pub fn to_csv(rows: &[SweepRow], axis: SweepAxis, columns: &[String]) -> String {
    let names = header(axis, columns);
    let mut out = names.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = std::iter::once(Cell::Num(Some(row.value)).csv())
            .chain(names[1..].iter().map(|c| row.column(c).csv()))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(rows: &[SweepRow], axis: SweepAxis, columns: &[String]) -> Value {
    let names = header(axis, columns);
    Value::Array(
        rows.iter()
            .map(|row| {
                let mut obj = Map::new();
                obj.insert(names[0].to_owned(), Cell::Num(Some(row.value)).json());
                for c in &names[1..] {
                    obj.insert((*c).to_owned(), row.column(c).json());
                }
                Value::Object(obj)
            })
            .collect(),
    )
}

pub fn render(rows: &[SweepRow], axis: SweepAxis, columns: &[String], format: Format) -> Result<String, SweepError> {
    if rows.is_empty() {
        return Err(SweepError::Empty);
    }
    Ok(match format {
        Format::Csv => to_csv(rows, axis, columns),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&to_json(rows, axis, columns)).expect("values serialize");
            s.push('\n');
            s
        }
    })
}

/// Writes the rendered rows to `destination`.
pub fn emit(
    rows: &[SweepRow],
    axis: SweepAxis,
    columns: &[String],
    format: Format,
    destination: &Path,
) -> Result<(), SweepError> {
    let text = render(rows, axis, columns, format)?;
    write_file(destination, &text)
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), SweepError> {
    fs::write(path, text).map_err(|source| SweepError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Sweep values where the power changes sign, linearly interpolated between
/// adjacent rows.
pub fn power_sign_changes(rows: &[SweepRow]) -> Vec<f64> {
    rows.windows(2)
        .filter_map(|w| {
            let (a, b) = (w[0].power?, w[1].power?);
            (a.signum() != b.signum() && a != 0.0 && b != 0.0)
                .then(|| w[0].value + (w[1].value - w[0].value) * a / (a - b))
        })
        .collect()
}

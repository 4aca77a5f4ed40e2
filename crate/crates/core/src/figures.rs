//! Data behind each published panel, regenerated from caption parameters.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::analyze_point;
use crate::model::MaserParams;
use crate::steady_state::SolverChoice;
use crate::sweep::{emit, power_sign_changes, run_sweep, write_file, Format, SweepAxis, SweepConfig, SweepError};
use crate::sync::{phase_distribution, DEFAULT_GRID};

/// Points per axis sweep.
pub const SWEEP_POINTS: usize = 50;
pub const RATIO_RANGE: (f64, f64) = (0.2, 5.0);
pub const P_RANGE: (f64, f64) = (-0.99, 0.99);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig5a,
    Fig5b,
    Fig5c,
    Fig5d,
}

impl FigureId {
    pub const ALL: [FigureId; 12] = [
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig2c,
        FigureId::Fig2d,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig4a,
        FigureId::Fig4b,
        FigureId::Fig5a,
        FigureId::Fig5b,
        FigureId::Fig5c,
        FigureId::Fig5d,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig2c => "fig2c",
            FigureId::Fig2d => "fig2d",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
            FigureId::Fig5a => "fig5a",
            FigureId::Fig5b => "fig5b",
            FigureId::Fig5c => "fig5c",
            FigureId::Fig5d => "fig5d",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure id '{s}' (expected fig2a-d, fig3a-b, fig4a-b or fig5a-d)"))
    }
}

/// Caption parameters shared by every panel.
pub fn caption_base() -> MaserParams {
    MaserParams::default()
}

/// Parameters for a given occupation ratio, `p` and gap.
pub fn caption_params(ratio: f64, p: f64, delta: f64) -> MaserParams {
    let base = caption_base();
    MaserParams {
        n_h2: ratio * base.n_c,
        p,
        delta,
        ..base
    }
}

/// Phase-distribution panel settings `(n_h2/n_c, p)`.
pub fn phase_panel(id: FigureId) -> Option<(f64, f64)> {
    match id {
        FigureId::Fig2a => Some((5.0, 0.5)),
        FigureId::Fig2b => Some((5.0, -0.99)),
        FigureId::Fig2c => Some((0.5, 0.5)),
        FigureId::Fig2d => Some((0.5, -0.99)),
        _ => None,
    }
}

/// One curve of a ratio panel.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub config: SweepConfig,
}

/// The plotted column and the curves of a ratio panel.
pub fn ratio_panel(id: FigureId) -> Option<(&'static str, Vec<Series>)> {
    let ratio_sweep = |p: f64, delta: f64| {
        SweepConfig::new(
            caption_params(1.0, p, delta),
            SweepAxis::Nh2OverNc,
            RATIO_RANGE.0,
            RATIO_RANGE.1,
            SWEEP_POINTS,
        )
    };
    let p_sweep = |ratio: f64, delta: f64| {
        SweepConfig::new(
            caption_params(ratio, 0.0, delta),
            SweepAxis::P,
            P_RANGE.0,
            P_RANGE.1,
            SWEEP_POINTS,
        )
    };
    let series = |label: String, config: SweepConfig| Series { label, config };
    let by_delta = |deltas: &[f64], make: &dyn Fn(f64) -> SweepConfig| {
        deltas
            .iter()
            .map(|&d| series(format!("delta{d}"), make(d)))
            .collect::<Vec<_>>()
    };
    Some(match id {
        FigureId::Fig3a => ("ratio_ps", by_delta(&[0.05, 0.2], &|d| ratio_sweep(0.5, d))),
        FigureId::Fig3b => (
            "ratio_ps",
            vec![
                series("engine".into(), p_sweep(5.0, 0.05)),
                series("refrigerator".into(), p_sweep(0.5, 0.05)),
            ],
        ),
        FigureId::Fig4a => (
            "ratio_qs",
            vec![
                series("p0.5".into(), ratio_sweep(0.5, 0.05)),
                series("p-0.99".into(), ratio_sweep(-0.99, 0.05)),
            ],
        ),
        FigureId::Fig4b => (
            "ratio_qs",
            vec![
                series("engine".into(), p_sweep(5.0, 0.05)),
                series("refrigerator".into(), p_sweep(0.5, 0.05)),
            ],
        ),
        FigureId::Fig5a => ("ratio_es", by_delta(&[0.05, 0.1], &|d| ratio_sweep(0.1, d))),
        FigureId::Fig5b => ("ratio_es", by_delta(&[0.05, 0.1], &|d| p_sweep(2.0, d))),
        FigureId::Fig5c => ("ratio_cop", by_delta(&[0.05, 0.1], &|d| ratio_sweep(0.1, d))),
        FigureId::Fig5d => ("ratio_cop", by_delta(&[0.05, 0.1], &|d| p_sweep(0.5, d))),
        _ => return None,
    })
}

/// `p` at which `k = 2` for the given base parameters.
pub fn k_two_crossing(params: &MaserParams) -> f64 {
    2.0 * params.lambda_drive / (params.gamma_h * (1.0 + params.n_h2)) - 1.0
}

/// Writes `<id>.csv` (or one CSV per curve) plus an `<id>.json` metadata
/// sidecar into `out_dir`, returning every path written.
pub fn reproduce_figure(id: FigureId, out_dir: &Path) -> Result<Vec<PathBuf>, SweepError> {
    reproduce_figure_with_grid(id, out_dir, DEFAULT_GRID)
}

pub fn reproduce_figure_with_grid(id: FigureId, out_dir: &Path, grid: usize) -> Result<Vec<PathBuf>, SweepError> {
    std::fs::create_dir_all(out_dir).map_err(|source| SweepError::Io {
        path: out_dir.to_owned(),
        source,
    })?;
    let sidecar = out_dir.join(format!("{id}.json"));
    let mut written = Vec::new();

    let metadata = if let Some((ratio, p)) = phase_panel(id) {
        let params = caption_params(ratio, p, 0.05);
        let point = analyze_point(params, SolverChoice::Auto).map_err(|e| SweepError::Config(e.to_string()))?;
        let dist = phase_distribution(&point.solution.rho, grid).map_err(|e| SweepError::Config(e.to_string()))?;
        let path = out_dir.join(format!("{id}.csv"));
        write_file(&path, &dist.to_csv())?;
        written.push(path.clone());
        let (gi, gj) = dist.argmax();
        let (phi21, phi31) = dist.phases_at((gi, gj));
        json!({
            "figure": id,
            "kind": "phase_distribution",
            "data": file_name(&path),
            "grid_size": grid,
            "k": point.sync.k,
            "branch": point.sync.branch,
            "s_max": point.sync.s_max_numeric,
            "argmax_phases": point.sync.argmax_phases,
            "grid_argmax": { "phi21": phi21, "phi31": phi31, "phi23": phi21 - phi31 },
            "analysis": point.to_json(),
        })
    } else {
        let (column, series) = ratio_panel(id).expect("every figure id is a phase or ratio panel");
        let mut entries = Vec::new();
        for s in &series {
            let rows = run_sweep(&s.config)?;
            let path = out_dir.join(format!("{id}_{}.csv", s.label));
            emit(&rows, s.config.sweep_axis, &[], Format::Csv, &path)?;
            written.push(path.clone());
            let errors = rows.iter().filter(|r| r.error.is_some()).count();
            let max_residual = rows.iter().filter_map(|r| r.residual).fold(0.0, f64::max);
            let mut methods: Vec<&str> = rows.iter().filter_map(|r| r.method.map(|m| m.as_str())).collect();
            methods.sort_unstable();
            methods.dedup();
            let boundary = match s.config.sweep_axis {
                SweepAxis::P => json!({ "k_equals_2_at_p": k_two_crossing(&s.config.base) }),
                _ => json!({ "power_sign_change": power_sign_changes(&rows) }),
            };
            entries.push(json!({
                "label": s.label,
                "data": file_name(&path),
                "sweep_axis": s.config.sweep_axis,
                "from": s.config.from,
                "to": s.config.to,
                "points": s.config.points,
                "base": s.config.base,
                "boundaries": boundary,
                "diagnostics": {
                    "failed_points": errors,
                    "max_residual": max_residual,
                    "methods": methods,
                },
            }));
        }
        json!({
            "figure": id,
            "kind": "ratio_sweep",
            "plotted_column": column,
            "series": entries,
        })
    };

    let mut text = serde_json::to_string_pretty(&metadata).expect("metadata serializes");
    text.push('\n');
    write_file(&sidecar, &text)?;
    written.push(sidecar);
    Ok(written)
}

fn file_name(path: &Path) -> Value {
    Value::String(
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in FigureId::ALL {
            assert_eq!(id.name().parse::<FigureId>(), Ok(id));
        }
        assert!("fig6a".parse::<FigureId>().is_err());
    }

    #[test]
    fn every_id_has_a_panel() {
        for id in FigureId::ALL {
            assert!(phase_panel(id).is_some() != ratio_panel(id).is_some(), "{id}");
        }
    }

    #[test]
    fn k_two_crossing_value() {
        let params = caption_params(5.0, 0.0, 0.05);
        let p = k_two_crossing(&params);
        let k = params.gamma_h * (1.0 + params.n_h2) * (1.0 + p) / params.lambda_drive;
        assert!((k - 2.0).abs() < 1e-12);
    }

    #[test]
    fn phase_panel_files() {
        let dir = tempfile::tempdir().unwrap();
        let files = reproduce_figure_with_grid(FigureId::Fig2a, dir.path(), 32).unwrap();
        assert_eq!(files.len(), 2);
        let meta: Value = serde_json::from_str(&std::fs::read_to_string(&files[1]).unwrap()).unwrap();
        assert!((meta["k"].as_f64().unwrap() - 4.5).abs() < 1e-12);
        assert_eq!(meta["analysis"]["params"]["n_h2"], 0.5);
        let csv = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(csv.lines().count(), 1 + 32 * 32);
    }
}

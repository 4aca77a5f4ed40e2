//! Everything computed at a single parameter point.

use serde_json::{json, Value};
use thiserror::Error;

use crate::bounds::{bound_report, BoundReport};
use crate::model::{DensityMatrix, MaserModel, MaserParams, ModelError};
use crate::steady_state::{solve, SolverChoice, SteadyStateError, SteadyStateSolution};
use crate::sync::{analyze, SyncError, SyncResult};
use crate::thermo::{efficiency_and_cop, FiguresOfMerit, ThermoCurrents};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    SteadyState(#[from] SteadyStateError),
    #[error(transparent)]
    Sync(#[from] SyncError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointAnalysis {
    pub model: MaserModel,
    pub solution: SteadyStateSolution,
    pub currents: ThermoCurrents,
    pub sync: SyncResult,
    pub merit: FiguresOfMerit,
    pub bounds: BoundReport,
}

pub fn analyze_point(params: MaserParams, solver: SolverChoice) -> Result<PointAnalysis, AnalysisError> {
    let model = MaserModel::new(params)?;
    let solution = solve(&model, solver)?;
    let currents = ThermoCurrents::from_state(&model, &solution.rho);
    let sync = analyze(&params, &solution.rho)?;
    let merit = efficiency_and_cop(&currents, &model);
    let bounds = bound_report(&currents, &sync, &params);
    Ok(PointAnalysis {
        model,
        solution,
        currents,
        sync,
        merit,
        bounds,
    })
}

/// `[[re, im], ...]` rows.
pub fn density_matrix_json(rho: &DensityMatrix) -> Value {
    let rows: Vec<Value> = (0..4)
        .map(|i| {
            Value::Array(
                (0..4)
                    .map(|j| {
                        let z = rho.get(i, j);
                        json!([z.re, z.im])
                    })
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

impl PointAnalysis {
    pub fn to_json(&self) -> Value {
        let baths = self.model.baths();
        json!({
            "params": self.model.params(),
            "baths": { "T_h": baths.t_h, "T_c": baths.t_c, "n_h3": baths.n_h3 },
            "steady_state": {
                "method": self.solution.method,
                "residual": self.solution.residual,
                "nullspace_dim": self.solution.nullspace_dim,
                "min_eigenvalue": self.solution.min_eigenvalue,
                "rho": density_matrix_json(&self.solution.rho),
            },
            "currents": self.currents,
            "sync": self.sync,
            "figures_of_merit": self.merit,
            "bounds": self.bounds,
        })
    }
}

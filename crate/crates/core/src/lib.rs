//! Four-level maser heat machine with correlated hot-bath dissipation.
//!
//! The model lives in the frame rotating with the drive. [`model`] builds
//! the generator, [`steady_state`] solves it, and [`sync`], [`thermo`] and
//! [`bounds`] evaluate observables on the result. [`sweep`] and [`figures`]
//! run parameter scans and write CSV/JSON.

pub mod analysis;
pub mod bounds;
pub mod figures;
pub mod model;
pub mod ode;
pub mod steady_state;
pub mod sweep;
pub mod sync;
pub mod thermo;

pub use analysis::{analyze_point, AnalysisError, PointAnalysis};
pub use bounds::{BoundReport, SummaryTable};
pub use model::{DensityMatrix, DriveFrequency, GeneratorMatrix, MaserModel, MaserParams, ModelError};
pub use steady_state::{SolveMethod, SolverChoice, SteadyStateError, SteadyStateSolution};
pub use sweep::{SweepAxis, SweepConfig, SweepRow};
pub use sync::{SyncBranch, SyncResult};
pub use thermo::{Regime, ThermoCurrents};

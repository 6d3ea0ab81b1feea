//! Simulation study: data generation, interventions and the Monte-Carlo
//! comparison of the two approaches.

mod dgp;
mod intervention;
mod study;

pub use dgp::{simulate_arma, simulate_control, ControlSeries, DgpConfig};
pub use intervention::{apply_intervention, InterventionSpec, Treated, IRREGULAR_PROFILE_V1};
pub use study::{
    aggregate, run_replication, run_study, CellMetrics, ModelKind, ReplicationRecord, StudyConfig,
    StudyOutput, StudyTables, TableRow,
};

//! CLI-driven experiment engine: declarative plans, seeded Monte Carlo
//! studies, bound-coverage audits and CSV reporting.
//!
//! A study is described by an [`ExperimentPlan`] (buildable from a TOML
//! file plus command-line overrides) and executed by [`run_experiment`],
//! which returns a [`ReportTable`]. The pair `(plan, master seed)` fully
//! determines the table, independent of thread count.

mod plan;
mod report;
mod studies;

pub use plan::{BoundKind, DataModel, ExperimentPlan, PlanOverrides, StudyKind};
pub use report::{
    emit_csv, format_float, read_matrix_csv, write_matrix_csv, write_trajectory_csv,
    ReportTable, Value,
};
pub use studies::{
    bound_coverage_check, bound_report, empirical_mse, master_rng, mc_average_check, mean,
    median, median_of_means, run_experiment, trial_rng, MEDIAN_OF_MEANS_BLOCKS,
};

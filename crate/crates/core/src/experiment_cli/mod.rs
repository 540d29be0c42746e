//! Configuration loading, experiment orchestration, CSV output and the
//! oracle suites used by the command-line front end.

pub mod config;
pub mod runner;
pub mod verify;

pub use config::{ConfigFile, ExperimentSpec, SweepAxis};
pub use runner::{
    lifetime_from_csv, round_csv_string, run_experiment, summarize_lifetime, ExperimentOutput,
    RunRecord, SummaryRow, SweepPoint,
};

/// Overrides the output directory of `simulate` and `sweep`.
pub const OUT_DIR_ENV: &str = "EERPMS_OUT_DIR";

//! Monte Carlo sweeps over geometry and network size.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{ExperimentConfig, Sweep, SweepPoint, SweepVariable};
pub use experiment::{
    aggregate, run_experiment, run_experiment_with, run_trials, trial_instance, ResultRow, SchemeOutcome, TrialOutcome,
};
pub use output::{emit_csv, format_float, write_csv, CSV_HEADER};

//! Config files, experiment runs, grid evaluation and log I/O.

pub mod config;
pub mod experiment;
pub mod grid;
pub mod output;

pub use config::{load_config, Components, ExperimentConfig};
pub use experiment::{
    eval_summary, pe_check, pe_check_file, read_summary, run_experiment, sweep, ExperimentOutcome,
    PeCheckReport, RunOptions, RunStatus, RunSummary,
};
pub use grid::{eval_error_grid, GridEvalReport, GridPoint, GridSpec};
pub use output::{csv_header, read_csv, write_csv, write_json, CsvTable};

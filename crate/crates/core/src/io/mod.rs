//! Configuration files and result files.

pub mod config;
pub mod output;

pub use config::{ConfigFile, Overrides, ScenarioSpec};
pub use output::{
    cdf_csv, cdfs_from_rows, compare_table, read_steps_csv, selection_csv, selection_from_rows, steps_csv, write_outputs,
    StepRow, Summary,
};

//! Experiment grids over treebanks, transformations and seeds.

pub mod config;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, TreebankSpec};
pub use report::emit_reports;
pub use run::{run_experiment, CellResult, ExperimentReport, Summary};

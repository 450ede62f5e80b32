//! Configuration, experiment dispatch and result emission.

pub mod config;
pub mod record;
pub mod run;

pub use config::{ExperimentConfig, OutputFormat};
pub use record::{emit_results, read_jsonl, write_results, Parameters, ResultRecord, CSV_COLUMNS};
pub use run::{experiment_seed, run_experiment, EXPERIMENTS};

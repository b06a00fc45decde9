//! Command-line orchestration for `coalgen` experiments: JSON configs,
//! seeded replicate scheduling and result files.

pub mod config;
pub mod output;
pub mod run;
pub mod seeds;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use output::{emit_outputs, Artifacts};
pub use run::{run_experiment, CliError, ExperimentResults, RunOptions, RunOutcome, RunStatus};
pub use seeds::derive_seed;

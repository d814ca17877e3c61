//! Experiment harness for the RDARS-aided ISAC optimizer: configuration files, Monte
//! Carlo sweeps over the evaluation schemes, and CSV/JSON output.

pub mod channel_io;
pub mod config;
pub mod error;
pub mod harness;
pub mod output;

pub use config::{load_config, load_config_over, parse_config, to_toml, Preset};
pub use error::{Result, SimError};
pub use harness::{run_experiment, ExperimentKind, ExperimentOutput, ExperimentRecord, ExperimentSpec};
pub use output::emit_outputs;

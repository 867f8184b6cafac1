//! Experiment configuration, sweeps and CSV output for the CSI feedback
//! simulator.

pub mod config;
pub mod csv_out;
pub mod presets;
pub mod selftest;
pub mod sweep;

pub use config::{ConfigError, ExperimentConfig, Scheme};
pub use csv_out::{emit_csv, read_csv, write_csv};
pub use sweep::{run_sweep, Mode, Status, SweepRecord};

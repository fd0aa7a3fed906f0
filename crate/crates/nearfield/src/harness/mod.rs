//! Monte-Carlo harness: configuration, seeded trials, sweeps, validation
//! suites and file output.

pub mod config;
pub mod scene;
pub mod sweep;
pub mod trial;
pub mod validate;

pub use config::{ExperimentConfig, SweepAxis};
pub use scene::{sample_scene, snr_db_to_noise_var};
pub use sweep::{read_trials, run_sweep, write_outputs, SweepOutput, SweepRow};
pub use trial::{run_trial, PointContext, TrialResult};

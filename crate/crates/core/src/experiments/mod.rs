//! Experiment harness: configuration, the four experiment families and CSV output.

pub mod config;
pub mod output;
pub mod run;

pub use config::{apply_override, ExperimentConfig};
pub use output::write_outputs;
pub use run::{
    run, run_batch, run_compensation, run_frf, run_hysteron_demo, run_loop_sweep, ExperimentKind,
    ExperimentRecord, FrfCurve, Trajectory,
};

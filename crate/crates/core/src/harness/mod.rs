//! Simulation, the two reference experiments, verification and output files.

pub mod compare;
pub mod config;
pub mod emit;
pub mod experiments;
mod system;
pub mod verify;

pub use compare::{compare_widths, WidthRow, WidthTable};
pub use config::{DataSpec, ExperimentConfig, ExperimentKind, OnlineSegment};
pub use experiments::{
    run_experiment, run_experiment_1, run_experiment_2, ExperimentArtifacts, ExperimentData, LabeledRun, Scenario,
};
pub use system::{simulate, LtiSystem, SampledPoint, Trajectory, TrajectoryWitness};
pub use verify::{negative_control, verify_run, StepCheck, VerifyReport, VERIFY_TOL};

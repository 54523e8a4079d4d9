//! Model sets from noisy data and reachability with online refinement.

mod model;
mod reach;

pub use model::{model_set_from_data, noise_mat_zonotope, noise_witness, refine_model_set, DataBatch, NoiseModel};
pub use reach::{
    predicted_generators, reach_step, run_algorithm1, ModelRecord, ReachOptions, ReachProblem, ReachRun,
    StepFactors, StepMetrics, DEFAULT_GENERATOR_LIMIT,
};

//! Vector-valued sets: zonotopes, constrained zonotopes and constrained
//! polynomial zonotopes.

mod cpz;
mod cz;
pub mod sample;
mod zonotope;

pub use cpz::{ConstrainedPolyZonotope, Evaluation};
pub use cz::ConstrainedZonotope;
pub use sample::{sample_cpz, sample_cpz_with, sample_factors, PolytopeSampler, SampleOptions, RESIDUAL_TOL};
pub use zonotope::Zonotope;

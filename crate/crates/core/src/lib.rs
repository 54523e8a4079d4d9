//! Constrained polynomial zonotopes and data-driven reachability analysis
//! for linear systems with unknown dynamics.

pub mod data_driven;
pub mod error;
pub mod exact_mult;
pub mod exponents;
pub mod harness;
pub mod ids;
pub mod linalg;
pub mod matrix;
pub mod sets;

pub use error::{Result, SetError};
pub use exponents::ExponentMatrix;
pub use ids::{FactorAssignment, FactorContext, FactorId};
pub use sets::{ConstrainedPolyZonotope, ConstrainedZonotope, Evaluation, Zonotope};
pub use matrix::{ConstrainedMatZonotope, ConstrainedPolyMatZonotope, MatrixZonotope};

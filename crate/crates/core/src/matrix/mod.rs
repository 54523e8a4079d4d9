//! Matrix-valued set representations.

mod cmz;
mod cpmz;
mod ops;

pub use cmz::{ConstrainedMatZonotope, MatrixEvaluation, MatrixZonotope};
pub use cpmz::ConstrainedPolyMatZonotope;
pub use ops::{Membership, MEMBERSHIP_TOL};

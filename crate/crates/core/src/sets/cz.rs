use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SetError};
use crate::exponents::ExponentMatrix;
use crate::ids::FactorId;
use crate::sets::ConstrainedPolyZonotope;

/// Constrained zonotope `<c, G, A, b, id>`: a zonotope whose factors also
/// satisfy `A a = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedZonotope {
    center: DVector<f64>,
    generators: DMatrix<f64>,
    constraints: DMatrix<f64>,
    offset: DVector<f64>,
    ids: Vec<FactorId>,
}

impl ConstrainedZonotope {
    pub fn new(
        center: DVector<f64>,
        generators: DMatrix<f64>,
        constraints: DMatrix<f64>,
        offset: DVector<f64>,
        ids: Vec<FactorId>,
    ) -> Result<Self> {
        let h = generators.ncols();
        if generators.nrows() != center.len() {
            return Err(SetError::dims("CZ generator rows", center.len(), generators.nrows()));
        }
        if ids.len() != h {
            return Err(SetError::dims("CZ id count", h, ids.len()));
        }
        if constraints.nrows() != offset.len() || (constraints.nrows() > 0 && constraints.ncols() != h) {
            return Err(SetError::dims(
                "CZ constraint shape",
                format!("{}x{}", offset.len(), h),
                format!("{}x{}", constraints.nrows(), constraints.ncols()),
            ));
        }
        let constraints = if constraints.nrows() == 0 {
            DMatrix::zeros(0, h)
        } else {
            constraints
        };
        Ok(ConstrainedZonotope {
            center,
            generators,
            constraints,
            offset,
            ids,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn ids(&self) -> &[FactorId] {
        &self.ids
    }

    /// Same set as a CPZ with identity exponent and constraint-exponent
    /// matrices.
    pub fn to_cpz(&self) -> ConstrainedPolyZonotope {
        let h = self.ids.len();
        let (constraints, r) = if self.offset.is_empty() {
            (DMatrix::zeros(0, 0), ExponentMatrix::zeros(h, 0))
        } else {
            (self.constraints.clone(), ExponentMatrix::identity(h))
        };
        ConstrainedPolyZonotope::new(
            self.center.clone(),
            self.generators.clone(),
            ExponentMatrix::identity(h),
            constraints,
            self.offset.clone(),
            r,
            self.ids.clone(),
        )
        .expect("CZ invariants imply CPZ invariants")
    }
}

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SetError};
use crate::exponents::ExponentMatrix;
use crate::ids::{FactorAssignment, FactorId};
use crate::linalg;
use crate::matrix::{ConstrainedMatZonotope, MatrixEvaluation};

/// Constrained polynomial matrix zonotope `<C, G, E, A, b, R, id>`:
///
/// ```text
/// { C + sum_i (prod_k a_k^E(k,i)) G_i  |  sum_j (prod_k a_k^R(k,j)) A(:,j) = b }
/// ```
///
/// Constraints are kept in vectorized form.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedPolyMatZonotope {
    center: DMatrix<f64>,
    generators: Vec<DMatrix<f64>>,
    exponents: ExponentMatrix,
    constraints: DMatrix<f64>,
    offset: DVector<f64>,
    constraint_exponents: ExponentMatrix,
    ids: Vec<FactorId>,
}

impl ConstrainedPolyMatZonotope {
    pub fn new(
        center: DMatrix<f64>,
        generators: Vec<DMatrix<f64>>,
        exponents: ExponentMatrix,
        constraints: DMatrix<f64>,
        offset: DVector<f64>,
        constraint_exponents: ExponentMatrix,
        ids: Vec<FactorId>,
    ) -> Result<Self> {
        let p = ids.len();
        if let Some(g) = generators.iter().find(|g| g.shape() != center.shape()) {
            return Err(SetError::dims(
                "CPMZ generator shape",
                format!("{:?}", center.shape()),
                format!("{:?}", g.shape()),
            ));
        }
        if exponents.cols() != generators.len() || exponents.rows() != p {
            return Err(SetError::dims(
                "CPMZ exponent shape",
                format!("{}x{}", p, generators.len()),
                format!("{}x{}", exponents.rows(), exponents.cols()),
            ));
        }
        if constraint_exponents.rows() != p || constraint_exponents.cols() != constraints.ncols() {
            return Err(SetError::dims(
                "CPMZ constraint exponent shape",
                format!("{}x{}", p, constraints.ncols()),
                format!("{}x{}", constraint_exponents.rows(), constraint_exponents.cols()),
            ));
        }
        if constraints.nrows() != offset.len() {
            return Err(SetError::dims("CPMZ constraint rows", offset.len(), constraints.nrows()));
        }
        if (offset.is_empty()) != (constraints.ncols() == 0) {
            return Err(SetError::Invalid(
                "constraint terms and offset must be both empty or both present".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(id) = ids.iter().find(|id| !seen.insert(**id)) {
            return Err(SetError::Invalid(format!("duplicate factor id {id}")));
        }
        Ok(ConstrainedPolyMatZonotope {
            center,
            generators,
            exponents,
            constraints,
            offset,
            constraint_exponents,
            ids,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.center.shape()
    }

    pub fn center(&self) -> &DMatrix<f64> {
        &self.center
    }

    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    pub fn exponents(&self) -> &ExponentMatrix {
        &self.exponents
    }

    pub fn constraints(&self) -> &DMatrix<f64> {
        &self.constraints
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn constraint_exponents(&self) -> &ExponentMatrix {
        &self.constraint_exponents
    }

    pub fn ids(&self) -> &[FactorId] {
        &self.ids
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn num_factors(&self) -> usize {
        self.ids.len()
    }

    pub fn is_constrained(&self) -> bool {
        !self.offset.is_empty()
    }

    pub fn evaluate(&self, assignment: &FactorAssignment) -> Result<MatrixEvaluation> {
        let alpha = assignment.values_for(&self.ids)?;
        Ok(self.evaluate_aligned(&alpha))
    }

    pub fn evaluate_aligned(&self, alpha: &[f64]) -> MatrixEvaluation {
        assert_eq!(alpha.len(), self.ids.len(), "factor vector length");
        let mut matrix = self.center.clone();
        for (w, g) in self.exponents.monomials(alpha).iter().zip(&self.generators) {
            matrix += g * *w;
        }
        MatrixEvaluation {
            matrix,
            residual: self.constraint_residual_aligned(alpha),
        }
    }

    pub fn constraint_residual_aligned(&self, alpha: &[f64]) -> f64 {
        if !self.is_constrained() {
            return 0.0;
        }
        let w = DVector::from_vec(self.constraint_exponents.monomials(alpha));
        (&self.constraints * w - &self.offset).amax()
    }

    /// Re-expresses the set over `target`, which must contain every own id.
    pub(crate) fn with_ids(&self, target: &[FactorId]) -> Self {
        if target == self.ids.as_slice() {
            return self.clone();
        }
        ConstrainedPolyMatZonotope {
            center: self.center.clone(),
            generators: self.generators.clone(),
            exponents: self.exponents.reindex_rows(&self.ids, target),
            constraints: self.constraints.clone(),
            offset: self.offset.clone(),
            constraint_exponents: self.constraint_exponents.reindex_rows(&self.ids, target),
            ids: target.to_vec(),
        }
    }
}

impl From<&ConstrainedMatZonotope> for ConstrainedPolyMatZonotope {
    /// Identity exponent matrices: every generator and constraint column is
    /// linear in its own factor.
    fn from(n: &ConstrainedMatZonotope) -> Self {
        let gamma = n.num_generators();
        let (constraints, offset, r) = if n.is_constrained() {
            (
                n.vectorized_constraints(),
                linalg::vectorize(n.offset()),
                ExponentMatrix::identity(gamma),
            )
        } else {
            (DMatrix::zeros(0, 0), DVector::zeros(0), ExponentMatrix::zeros(gamma, 0))
        };
        ConstrainedPolyMatZonotope::new(
            n.center().clone(),
            n.generators().to_vec(),
            ExponentMatrix::identity(gamma),
            constraints,
            offset,
            r,
            n.ids().to_vec(),
        )
        .expect("CMZ invariants imply CPMZ invariants")
    }
}

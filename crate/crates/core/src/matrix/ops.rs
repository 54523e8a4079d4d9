use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SetError};
use crate::ids::{FactorAssignment, FactorContext};
use crate::linalg;
use crate::matrix::ConstrainedMatZonotope;

/// Default tolerance for [`ConstrainedMatZonotope::membership`].
pub const MEMBERSHIP_TOL: f64 = 1e-6;

const BVLS_TOL: f64 = 1e-10;
const BVLS_MAX_ITER: usize = 10_000;

/// Outcome of a membership query.
#[derive(Debug, Clone)]
pub struct Membership {
    pub is_member: bool,
    /// Best factor values found, keyed by the set's ids.
    pub witness: FactorAssignment,
    /// Max-norm residual of the combined point and constraint equations.
    pub residual: f64,
}

impl ConstrainedMatZonotope {
    /// Exact intersection. The result has the first operand's center, its
    /// generators padded with zero blocks for the second operand's factors,
    /// and vectorized constraints (`B` is a column) tying the two together.
    /// All factors are fresh.
    pub fn intersect(&self, other: &Self, ctx: &FactorContext) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(SetError::dims(
                "CMZ intersection",
                format!("{:?}", self.shape()),
                format!("{:?}", other.shape()),
            ));
        }
        let (g1, g2) = (self.num_generators(), other.num_generators());
        let (r1, r2) = (self.num_constraint_rows(), other.num_constraint_rows());
        let (m, n) = self.shape();
        let rows = r1 + r2 + m * n;

        let mut a_hat = DMatrix::zeros(rows, g1 + g2);
        a_hat.view_mut((0, 0), (r1, g1)).copy_from(&self.vectorized_constraints());
        a_hat.view_mut((r1, g1), (r2, g2)).copy_from(&other.vectorized_constraints());
        a_hat.view_mut((r1 + r2, 0), (m * n, g1)).copy_from(&self.vectorized_generators());
        a_hat
            .view_mut((r1 + r2, g1), (m * n, g2))
            .copy_from(&(-other.vectorized_generators()));

        let mut b_hat = DVector::zeros(rows);
        b_hat.rows_mut(0, r1).copy_from(&linalg::vectorize(self.offset()));
        b_hat.rows_mut(r1, r2).copy_from(&linalg::vectorize(other.offset()));
        b_hat
            .rows_mut(r1 + r2, m * n)
            .copy_from(&linalg::vectorize(&(other.center() - self.center())));

        let mut generators = self.generators().to_vec();
        generators.extend(std::iter::repeat_n(DMatrix::zeros(m, n), g2));
        let constraints = (0..g1 + g2)
            .map(|k| DMatrix::from_column_slice(rows, 1, a_hat.column(k).as_slice()))
            .collect();
        let offset = if rows == 0 {
            DMatrix::zeros(0, 0)
        } else {
            DMatrix::from_column_slice(rows, 1, b_hat.as_slice())
        };
        ConstrainedMatZonotope::new(
            self.center().clone(),
            generators,
            constraints,
            offset,
            ctx.allocate(g1 + g2),
        )
    }

    /// Checks whether `m` belongs to the set by solving the box-constrained
    /// least-squares problem over the factors.
    pub fn membership(&self, m: &DMatrix<f64>, tol: f64) -> Result<Membership> {
        if m.shape() != self.shape() {
            return Err(SetError::dims(
                "CMZ membership",
                format!("{:?}", self.shape()),
                format!("{:?}", m.shape()),
            ));
        }
        let g = self.vectorized_generators();
        let a = self.vectorized_constraints();
        let mut lhs = DMatrix::zeros(g.nrows() + a.nrows(), self.num_generators());
        lhs.rows_mut(0, g.nrows()).copy_from(&g);
        lhs.rows_mut(g.nrows(), a.nrows()).copy_from(&a);
        let rhs = linalg::vstack(
            &linalg::vectorize(&(m - self.center())),
            &linalg::vectorize(self.offset()),
        );
        let sol = linalg::bounded_least_squares(&lhs, &rhs, -1.0, 1.0, BVLS_TOL, BVLS_MAX_ITER);
        let residual = sol.residual_inf();
        let values: Vec<f64> = sol.x.iter().map(|v| v.clamp(-1.0, 1.0)).collect();
        Ok(Membership {
            is_member: residual <= tol,
            witness: FactorAssignment::from_pairs(self.ids(), &values)?,
            residual,
        })
    }

    /// True when no factor vector in the box satisfies the constraints.
    pub fn is_empty(&self, tol: f64) -> bool {
        if !self.is_constrained() {
            return false;
        }
        let a = self.vectorized_constraints();
        let b = linalg::vectorize(self.offset());
        let sol = linalg::bounded_least_squares(&a, &b, -1.0, 1.0, BVLS_TOL, BVLS_MAX_ITER);
        sol.residual_inf() > tol
    }
}

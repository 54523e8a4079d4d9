use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Result, SetError};
use crate::ids::{FactorAssignment, FactorContext, FactorId};
use crate::linalg;
use crate::sets::{PolytopeSampler, SampleOptions};

/// A matrix together with the constraint violation of the assignment that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEvaluation {
    pub matrix: DMatrix<f64>,
    pub residual: f64,
}

/// Matrix zonotope `<C, G_1..G_gamma> = { C + sum_k a_k G_k }`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixZonotope {
    center: DMatrix<f64>,
    generators: Vec<DMatrix<f64>>,
}

impl MatrixZonotope {
    pub fn new(center: DMatrix<f64>, generators: Vec<DMatrix<f64>>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.shape() != center.shape()) {
            return Err(SetError::dims(
                "MatrixZonotope generator shape",
                format!("{:?}", center.shape()),
                format!("{:?}", g.shape()),
            ));
        }
        Ok(MatrixZonotope { center, generators })
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

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn evaluate_aligned(&self, alpha: &[f64]) -> DMatrix<f64> {
        assert_eq!(alpha.len(), self.generators.len(), "factor vector length");
        let mut out = self.center.clone();
        for (a, g) in alpha.iter().zip(&self.generators) {
            out += g * *a;
        }
        out
    }

    /// Lifts onto `ids` without constraints.
    pub fn with_ids(&self, ids: Vec<FactorId>) -> Result<ConstrainedMatZonotope> {
        ConstrainedMatZonotope::new(
            self.center.clone(),
            self.generators.clone(),
            Vec::new(),
            DMatrix::zeros(0, 0),
            ids,
        )
    }

    /// Lifts onto fresh ids.
    pub fn to_cmz(&self, ctx: &FactorContext) -> ConstrainedMatZonotope {
        self.with_ids(ctx.allocate(self.num_generators()))
            .expect("fresh ids match generator count")
    }

    /// Wide concatenation `[G_1 ... G_gamma]`.
    pub fn generator_matrix(&self) -> DMatrix<f64> {
        let refs: Vec<&DMatrix<f64>> = self.generators.iter().collect();
        linalg::hcat(self.center.nrows(), &refs)
    }

    /// Splits a wide `[G_1 ... G_gamma]` into blocks of `cols` columns.
    pub fn from_wide(center: DMatrix<f64>, wide: &DMatrix<f64>) -> Result<Self> {
        let cols = center.ncols();
        if wide.nrows() != center.nrows() || (cols == 0 && wide.ncols() > 0) || (cols > 0 && !wide.ncols().is_multiple_of(cols)) {
            return Err(SetError::dims(
                "MatrixZonotope::from_wide",
                format!("{} rows, multiple of {} columns", center.nrows(), cols),
                format!("{:?}", wide.shape()),
            ));
        }
        let count = wide.ncols().checked_div(cols).unwrap_or(0);
        let generators = (0..count)
            .map(|k| wide.columns(k * cols, cols).into_owned())
            .collect();
        Self::new(center, generators)
    }
}

/// Constrained matrix zonotope `<C, G, A, B, id>`:
///
/// ```text
/// { C + sum_k a_k G_k  |  sum_k a_k A_k = B,  a in [-1,1]^gamma }
/// ```
///
/// Unconstrained (a matrix zonotope) when `B` is empty; then `A` is empty too.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedMatZonotope {
    center: DMatrix<f64>,
    generators: Vec<DMatrix<f64>>,
    constraints: Vec<DMatrix<f64>>,
    offset: DMatrix<f64>,
    ids: Vec<FactorId>,
}

impl ConstrainedMatZonotope {
    pub fn new(
        center: DMatrix<f64>,
        generators: Vec<DMatrix<f64>>,
        constraints: Vec<DMatrix<f64>>,
        offset: DMatrix<f64>,
        ids: Vec<FactorId>,
    ) -> Result<Self> {
        let gamma = generators.len();
        if let Some(g) = generators.iter().find(|g| g.shape() != center.shape()) {
            return Err(SetError::dims(
                "CMZ generator shape",
                format!("{:?}", center.shape()),
                format!("{:?}", g.shape()),
            ));
        }
        if ids.len() != gamma {
            return Err(SetError::dims("CMZ id count", gamma, ids.len()));
        }
        if offset.is_empty() {
            if !constraints.is_empty() {
                return Err(SetError::Invalid("constraint blocks without offset B".into()));
            }
        } else {
            if constraints.len() != gamma {
                return Err(SetError::dims("CMZ constraint block count", gamma, constraints.len()));
            }
            if let Some(a) = constraints.iter().find(|a| a.shape() != offset.shape()) {
                return Err(SetError::dims(
                    "CMZ constraint block shape",
                    format!("{:?}", offset.shape()),
                    format!("{:?}", a.shape()),
                ));
            }
        }
        Ok(ConstrainedMatZonotope {
            center,
            generators,
            constraints,
            offset: if offset.is_empty() { DMatrix::zeros(0, 0) } else { offset },
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

    pub fn constraints(&self) -> &[DMatrix<f64>] {
        &self.constraints
    }

    pub fn offset(&self) -> &DMatrix<f64> {
        &self.offset
    }

    pub fn ids(&self) -> &[FactorId] {
        &self.ids
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn is_constrained(&self) -> bool {
        !self.offset.is_empty()
    }

    /// Number of scalar constraint equations, `n_c * n_a`.
    pub fn num_constraint_rows(&self) -> usize {
        self.offset.len()
    }

    /// Columns `vec(G_k)`.
    pub fn vectorized_generators(&self) -> DMatrix<f64> {
        let (m, n) = self.shape();
        let mut out = DMatrix::zeros(m * n, self.num_generators());
        for (k, g) in self.generators.iter().enumerate() {
            out.set_column(k, &linalg::vectorize(g));
        }
        out
    }

    /// Columns `vec(A_k)` (zero rows when unconstrained).
    pub fn vectorized_constraints(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.num_constraint_rows(), self.num_generators());
        for (k, a) in self.constraints.iter().enumerate() {
            out.set_column(k, &linalg::vectorize(a));
        }
        out
    }

    pub fn evaluate(&self, assignment: &FactorAssignment) -> Result<MatrixEvaluation> {
        let alpha = assignment.values_for(&self.ids)?;
        Ok(self.evaluate_aligned(&alpha))
    }

    pub fn evaluate_aligned(&self, alpha: &[f64]) -> MatrixEvaluation {
        assert_eq!(alpha.len(), self.num_generators(), "factor vector length");
        let mut matrix = self.center.clone();
        for (a, g) in alpha.iter().zip(&self.generators) {
            matrix += g * *a;
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
        let mut lhs = -self.offset.clone();
        for (a, blk) in alpha.iter().zip(&self.constraints) {
            lhs += blk * *a;
        }
        lhs.amax()
    }

    /// Draws `n` feasible factor vectors (aligned with `ids()`).
    pub fn sample_factors<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
        opts: &SampleOptions,
    ) -> Result<Vec<Vec<f64>>> {
        let a = self.vectorized_constraints();
        let b = linalg::vectorize(&self.offset);
        let mut walker = PolytopeSampler::new(&a, &b, rng)?;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            for _ in 0..opts.thin.max(1) {
                walker.step(rng);
            }
            let x = if rng.gen_bool(opts.extreme_fraction) {
                walker.extreme(rng)
            } else {
                walker.current().clone()
            };
            out.push(x.iter().copied().collect());
        }
        Ok(out)
    }

    /// `n` feasible member matrices.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
        opts: &SampleOptions,
    ) -> Result<Vec<DMatrix<f64>>> {
        Ok(self
            .sample_factors(n, rng, opts)?
            .iter()
            .map(|a| self.evaluate_aligned(a).matrix)
            .collect())
    }

    /// Wide concatenation `[G_1 ... G_gamma]`.
    pub fn generator_matrix(&self) -> DMatrix<f64> {
        let refs: Vec<&DMatrix<f64>> = self.generators.iter().collect();
        linalg::hcat(self.center.nrows(), &refs)
    }

    /// Box hull of the member matrices ignoring constraints, entrywise.
    pub fn interval_enclosure(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut radius = DMatrix::zeros(self.center.nrows(), self.center.ncols());
        for g in &self.generators {
            radius += g.abs();
        }
        (&self.center - &radius, &self.center + &radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::ids;

    #[test]
    fn evaluation_at_zero_is_center() {
        let n = ConstrainedMatZonotope::new(
            DMatrix::from_element(1, 1, 2.0),
            vec![DMatrix::from_element(1, 1, 1.0)],
            vec![DMatrix::from_element(1, 1, 1.0)],
            DMatrix::from_element(1, 1, 0.5),
            ids(&[1]),
        )
        .unwrap();
        let e = n.evaluate_aligned(&[0.0]);
        assert_eq!(e.matrix[(0, 0)], 2.0);
        assert_eq!(e.residual, 0.5);
        let e = n.evaluate_aligned(&[1.0]);
        assert_eq!(e.matrix[(0, 0)], 3.0);
    }

    #[test]
    fn unconstrained_residual_is_zero() {
        let mz = MatrixZonotope::new(DMatrix::zeros(2, 2), vec![DMatrix::identity(2, 2)]).unwrap();
        let n = mz.with_ids(ids(&[4])).unwrap();
        assert_eq!(n.evaluate_aligned(&[0.0]).residual, 0.0);
        assert!(!n.is_constrained());
    }

    #[test]
    fn rejects_inconsistent_blocks() {
        let bad = ConstrainedMatZonotope::new(
            DMatrix::zeros(1, 1),
            vec![DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)],
            vec![DMatrix::zeros(1, 1)],
            DMatrix::zeros(1, 1),
            ids(&[1, 2]),
        );
        assert!(bad.is_err());
        let bad = MatrixZonotope::new(DMatrix::zeros(1, 2), vec![DMatrix::zeros(2, 1)]);
        assert!(bad.is_err());
    }

    #[test]
    fn wide_generator_round_trip() {
        let mz = MatrixZonotope::new(
            DMatrix::zeros(2, 2),
            vec![DMatrix::identity(2, 2), DMatrix::from_element(2, 2, 3.0)],
        )
        .unwrap();
        let back = MatrixZonotope::from_wide(mz.center().clone(), &mz.generator_matrix()).unwrap();
        assert_eq!(back, mz);
    }
}

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SetError};
use crate::exponents::ExponentMatrix;
use crate::ids::{merge_id_lists, FactorAssignment, FactorContext, FactorId};
use crate::linalg;
use crate::sets::Zonotope;

/// Point of a set evaluated at a factor assignment, together with the
/// max-norm violation of the set's equality constraints there.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub point: DVector<f64>,
    pub residual: f64,
}

/// Constrained polynomial zonotope `<c, G, E, A, b, R, id>`:
///
/// ```text
/// { c + sum_i (prod_k a_k^E[k,i]) G[:,i]  |  sum_j (prod_k a_k^R[k,j]) A[:,j] = b,  a in [-1,1]^p }
/// ```
///
/// Row `k` of `E` and `R` refers to the factor `ids[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedPolyZonotope {
    center: DVector<f64>,
    generators: DMatrix<f64>,
    exponents: ExponentMatrix,
    constraints: DMatrix<f64>,
    offset: DVector<f64>,
    constraint_exponents: ExponentMatrix,
    ids: Vec<FactorId>,
}

impl ConstrainedPolyZonotope {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        center: DVector<f64>,
        generators: DMatrix<f64>,
        exponents: ExponentMatrix,
        constraints: DMatrix<f64>,
        offset: DVector<f64>,
        constraint_exponents: ExponentMatrix,
        ids: Vec<FactorId>,
    ) -> Result<Self> {
        let n = center.len();
        let p = ids.len();
        if generators.nrows() != n {
            return Err(SetError::dims("CPZ generator rows", n, generators.nrows()));
        }
        if exponents.rows() != p || exponents.cols() != generators.ncols() {
            return Err(SetError::dims(
                "CPZ exponent shape",
                format!("{}x{}", p, generators.ncols()),
                format!("{}x{}", exponents.rows(), exponents.cols()),
            ));
        }
        if constraints.nrows() != offset.len() {
            return Err(SetError::dims("CPZ constraint rows", offset.len(), constraints.nrows()));
        }
        if constraint_exponents.rows() != p || constraint_exponents.cols() != constraints.ncols() {
            return Err(SetError::dims(
                "CPZ constraint exponent shape",
                format!("{}x{}", p, constraints.ncols()),
                format!("{}x{}", constraint_exponents.rows(), constraint_exponents.cols()),
            ));
        }
        if (constraints.nrows() == 0) != (constraints.ncols() == 0) {
            return Err(SetError::Invalid(format!(
                "constraint matrix is {}x{}; A empty must coincide with b and R empty",
                constraints.nrows(),
                constraints.ncols()
            )));
        }
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != p {
            return Err(SetError::Invalid("duplicate factor ids".into()));
        }
        Ok(ConstrainedPolyZonotope {
            center,
            generators,
            exponents,
            constraints,
            offset,
            constraint_exponents,
            ids,
        })
    }

    /// Unconstrained polynomial zonotope `<c, G, E, id>`.
    pub fn polynomial(
        center: DVector<f64>,
        generators: DMatrix<f64>,
        exponents: ExponentMatrix,
        ids: Vec<FactorId>,
    ) -> Result<Self> {
        let p = ids.len();
        Self::new(
            center,
            generators,
            exponents,
            DMatrix::zeros(0, 0),
            DVector::zeros(0),
            ExponentMatrix::zeros(p, 0),
            ids,
        )
    }

    pub fn point(center: DVector<f64>) -> Self {
        let n = center.len();
        ConstrainedPolyZonotope {
            center,
            generators: DMatrix::zeros(n, 0),
            exponents: ExponentMatrix::zeros(0, 0),
            constraints: DMatrix::zeros(0, 0),
            offset: DVector::zeros(0),
            constraint_exponents: ExponentMatrix::zeros(0, 0),
            ids: Vec::new(),
        }
    }

    /// Lifts a zonotope: identity exponents over fresh factors.
    pub fn from_zonotope(z: &Zonotope, ctx: &FactorContext) -> Self {
        let gamma = z.num_generators();
        ConstrainedPolyZonotope {
            center: z.center().clone(),
            generators: z.generators().clone(),
            exponents: ExponentMatrix::identity(gamma),
            constraints: DMatrix::zeros(0, 0),
            offset: DVector::zeros(0),
            constraint_exponents: ExponentMatrix::zeros(gamma, 0),
            ids: ctx.allocate(gamma),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.ncols()
    }

    pub fn num_factors(&self) -> usize {
        self.ids.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.offset.len()
    }

    /// Number of constraint monomials (columns of `A` and `R`).
    pub fn num_constraint_terms(&self) -> usize {
        self.constraints.ncols()
    }

    pub fn is_constrained(&self) -> bool {
        self.num_constraints() > 0
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn generators(&self) -> &DMatrix<f64> {
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

    /// True when every constraint monomial is a single factor to the first
    /// power. The reachability pipeline keeps this property at every step.
    pub fn has_linear_constraints(&self) -> bool {
        self.constraint_exponents.is_standard_basis()
    }

    pub fn evaluate(&self, assignment: &FactorAssignment) -> Result<Evaluation> {
        let alpha = assignment.values_for(&self.ids)?;
        Ok(self.evaluate_aligned(&alpha))
    }

    /// Evaluation with factor values given in `ids()` order.
    pub fn evaluate_aligned(&self, alpha: &[f64]) -> Evaluation {
        let weights = DVector::from_vec(self.exponents.monomials(alpha));
        let point = &self.center + &self.generators * weights;
        Evaluation {
            point,
            residual: self.constraint_residual_aligned(alpha),
        }
    }

    pub fn constraint_residual_aligned(&self, alpha: &[f64]) -> f64 {
        if !self.is_constrained() {
            return 0.0;
        }
        let weights = DVector::from_vec(self.constraint_exponents.monomials(alpha));
        (&self.constraints * weights - &self.offset).amax()
    }

    /// Brings `self` and `other` onto the common id list
    /// `[self.ids, other ids not in self.ids]`, padding exponent rows with
    /// zeros. The represented sets are unchanged.
    pub fn merge_id(&self, other: &Self) -> (Self, Self) {
        let merged = merge_id_lists(&self.ids, &other.ids);
        (self.with_ids(&merged), other.with_ids(&merged))
    }

    /// Re-expresses the set over `target` (a superset of `ids()`).
    pub(crate) fn with_ids(&self, target: &[FactorId]) -> Self {
        ConstrainedPolyZonotope {
            center: self.center.clone(),
            generators: self.generators.clone(),
            exponents: self.exponents.reindex_rows(&self.ids, target),
            constraints: self.constraints.clone(),
            offset: self.offset.clone(),
            constraint_exponents: self.constraint_exponents.reindex_rows(&self.ids, target),
            ids: target.to_vec(),
        }
    }

    /// Same set with its factors relabeled positionally.
    pub fn with_renamed_ids(&self, ids: Vec<FactorId>) -> Result<Self> {
        Self::new(
            self.center.clone(),
            self.generators.clone(),
            self.exponents.clone(),
            self.constraints.clone(),
            self.offset.clone(),
            self.constraint_exponents.clone(),
            ids,
        )
    }

    /// Dependency-preserving sum. Shared ids stay shared, so `P + P`
    /// evaluates to twice `P` at every assignment.
    pub fn exact_add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(SetError::dims("exact_add", self.dim(), other.dim()));
        }
        let (a, b) = self.merge_id(other);
        let rows = a.ids.len();
        Ok(ConstrainedPolyZonotope {
            center: &a.center + &b.center,
            generators: linalg::hcat(a.dim(), &[&a.generators, &b.generators]),
            exponents: ExponentMatrix::hcat(rows, &[&a.exponents, &b.exponents]),
            constraints: linalg::block_diag(&a.constraints, &b.constraints),
            offset: linalg::vstack(&a.offset, &b.offset),
            constraint_exponents: ExponentMatrix::hcat(
                rows,
                &[&a.constraint_exponents, &b.constraint_exponents],
            ),
            ids: a.ids,
        })
    }

    /// `self x z`, with `z`'s factors lifted onto fresh ids.
    pub fn cartesian_product(&self, z: &Zonotope, ctx: &FactorContext) -> Self {
        let gamma = z.num_generators();
        let mut ids = self.ids.clone();
        ids.extend(ctx.allocate(gamma));
        ConstrainedPolyZonotope {
            center: linalg::vstack(&self.center, z.center()),
            generators: linalg::block_diag(&self.generators, z.generators()),
            exponents: self.exponents.block_diag(&ExponentMatrix::identity(gamma)),
            constraints: self.constraints.clone(),
            offset: self.offset.clone(),
            constraint_exponents: self
                .constraint_exponents
                .block_diag(&ExponentMatrix::zeros(gamma, 0)),
            ids,
        }
    }

    /// Box hull ignoring constraints: `c +- sum_i |G[:,i]|`.
    pub fn interval_enclosure(&self) -> (DVector<f64>, DVector<f64>) {
        let radius = DVector::from_iterator(
            self.dim(),
            self.generators.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()),
        );
        (&self.center - &radius, &self.center + &radius)
    }

    /// Merges generators whose exponent columns coincide (and likewise for
    /// constraint terms), then drops generators that are exactly zero. The
    /// represented set is unchanged; only the floating-point order of
    /// summation differs.
    pub fn compact(&self) -> Self {
        let (exponents, generators) = merge_columns(&self.exponents, &self.generators, true);
        let (constraint_exponents, constraints) =
            merge_columns(&self.constraint_exponents, &self.constraints, false);
        ConstrainedPolyZonotope {
            center: self.center.clone(),
            generators,
            exponents,
            constraints,
            offset: self.offset.clone(),
            constraint_exponents,
            ids: self.ids.clone(),
        }
    }

    /// Coordinates `dims` of the set (same factors, same constraints).
    pub fn project(&self, dims: &[usize]) -> Result<Self> {
        if let Some(&bad) = dims.iter().find(|&&d| d >= self.dim()) {
            return Err(SetError::dims("project", format!("< {}", self.dim()), bad));
        }
        Ok(ConstrainedPolyZonotope {
            center: self.center.select_rows(dims),
            generators: self.generators.select_rows(dims),
            ..self.clone()
        })
    }
}

fn merge_columns(e: &ExponentMatrix, g: &DMatrix<f64>, drop_zero: bool) -> (ExponentMatrix, DMatrix<f64>) {
    let (unique, map) = e.unique_columns();
    let mut merged = DMatrix::zeros(g.nrows(), unique.cols());
    for (j, &target) in map.iter().enumerate() {
        let mut col = merged.column_mut(target);
        col += g.column(j);
    }
    let keep: Vec<usize> = (0..unique.cols())
        .filter(|&j| merged.column(j).iter().any(|v| *v != 0.0))
        .collect();
    if !drop_zero || keep.len() == unique.cols() {
        return (unique, merged);
    }
    let exps = ExponentMatrix::from_columns(unique.rows(), keep.iter().map(|&j| unique.column(j).to_vec()));
    let mut cols = DMatrix::zeros(g.nrows(), keep.len());
    for (dst, &j) in keep.iter().enumerate() {
        cols.set_column(dst, &merged.column(j));
    }
    (exps, cols)
}

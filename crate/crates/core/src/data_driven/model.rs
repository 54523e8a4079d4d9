use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SetError};
use crate::ids::FactorContext;
use crate::linalg;
use crate::matrix::{ConstrainedMatZonotope, MatrixZonotope};
use crate::sets::Zonotope;

/// Input/state data from one trajectory: column `t` of `x_plus` is the
/// successor of column `t` of `x_minus` under input column `t` of `u_minus`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataBatch {
    x_plus: DMatrix<f64>,
    x_minus: DMatrix<f64>,
    u_minus: DMatrix<f64>,
}

impl DataBatch {
    pub fn new(x_plus: DMatrix<f64>, x_minus: DMatrix<f64>, u_minus: DMatrix<f64>) -> Result<Self> {
        let t = x_minus.ncols();
        if x_plus.ncols() != t || u_minus.ncols() != t {
            return Err(SetError::dims(
                "DataBatch column counts",
                t,
                format!("{} and {}", x_plus.ncols(), u_minus.ncols()),
            ));
        }
        if x_plus.nrows() != x_minus.nrows() {
            return Err(SetError::dims("DataBatch state rows", x_minus.nrows(), x_plus.nrows()));
        }
        Ok(DataBatch { x_plus, x_minus, u_minus })
    }

    pub fn empty(nx: usize, nu: usize) -> Self {
        DataBatch {
            x_plus: DMatrix::zeros(nx, 0),
            x_minus: DMatrix::zeros(nx, 0),
            u_minus: DMatrix::zeros(nu, 0),
        }
    }

    /// Builds a batch from `states[0..=T]` and `inputs[0..T]`.
    pub fn from_trajectory(states: &[DVector<f64>], inputs: &[DVector<f64>]) -> Result<Self> {
        if states.len() != inputs.len() + 1 {
            return Err(SetError::dims("DataBatch::from_trajectory", inputs.len() + 1, states.len()));
        }
        let nx = states.first().map_or(0, |s| s.len());
        let nu = inputs.first().map_or(0, |u| u.len());
        let cols = |v: &[DVector<f64>], rows: usize| {
            DMatrix::from_fn(rows, v.len(), |r, c| v[c][r])
        };
        Self::new(
            cols(&states[1..], nx),
            cols(&states[..states.len() - 1], nx),
            cols(inputs, nu),
        )
    }

    pub fn len(&self) -> usize {
        self.x_minus.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state_dim(&self) -> usize {
        self.x_minus.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.u_minus.nrows()
    }

    pub fn x_plus(&self) -> &DMatrix<f64> {
        &self.x_plus
    }

    pub fn x_minus(&self) -> &DMatrix<f64> {
        &self.x_minus
    }

    pub fn u_minus(&self) -> &DMatrix<f64> {
        &self.u_minus
    }

    /// `[X-; U-]`.
    pub fn regressor(&self) -> DMatrix<f64> {
        let (nx, nu, t) = (self.state_dim(), self.input_dim(), self.len());
        let mut d = DMatrix::zeros(nx + nu, t);
        d.rows_mut(0, nx).copy_from(&self.x_minus);
        d.rows_mut(nx, nu).copy_from(&self.u_minus);
        d
    }

    /// Whether `[X-; U-]` has full row rank.
    pub fn has_full_row_rank(&self) -> bool {
        self.len() >= self.state_dim() + self.input_dim()
            && linalg::numerical_rank(&self.regressor()) == self.state_dim() + self.input_dim()
    }

    /// Columns `range` as a new batch.
    pub fn columns(&self, range: std::ops::Range<usize>) -> Result<DataBatch> {
        if range.end > self.len() || range.start > range.end {
            return Err(SetError::dims("DataBatch::columns", self.len(), format!("{range:?}")));
        }
        let n = range.len();
        Ok(DataBatch {
            x_plus: self.x_plus.columns(range.start, n).into_owned(),
            x_minus: self.x_minus.columns(range.start, n).into_owned(),
            u_minus: self.u_minus.columns(range.start, n).into_owned(),
        })
    }

    /// Appends the columns of `other`.
    pub fn append(&mut self, other: &DataBatch) -> Result<()> {
        if other.state_dim() != self.state_dim() || other.input_dim() != self.input_dim() {
            return Err(SetError::dims(
                "DataBatch::append",
                format!("{} states, {} inputs", self.state_dim(), self.input_dim()),
                format!("{} states, {} inputs", other.state_dim(), other.input_dim()),
            ));
        }
        let join = |a: &DMatrix<f64>, b: &DMatrix<f64>| linalg::hcat(a.nrows(), &[a, b]);
        self.x_plus = join(&self.x_plus, &other.x_plus);
        self.x_minus = join(&self.x_minus, &other.x_minus);
        self.u_minus = join(&self.u_minus, &other.u_minus);
        Ok(())
    }

    pub fn clear(&mut self) {
        *self = DataBatch::empty(self.state_dim(), self.input_dim());
    }
}

/// Bounded process noise together with, optionally, the factor values of
/// each realized noise sample.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    bound: Zonotope,
    recorded: Option<Vec<Vec<f64>>>,
}

impl NoiseModel {
    pub fn new(bound: Zonotope) -> Result<Self> {
        if !bound.contains_origin_hint() {
            return Err(SetError::Config("noise zonotope must contain the origin".into()));
        }
        Ok(NoiseModel { bound, recorded: None })
    }

    pub fn with_recorded(mut self, coeffs: Vec<Vec<f64>>) -> Self {
        self.recorded = Some(coeffs);
        self
    }

    pub fn bound(&self) -> &Zonotope {
        &self.bound
    }

    pub fn recorded(&self) -> Option<&[Vec<f64>]> {
        self.recorded.as_deref()
    }
}

/// Matrix zonotope of all `nx x t` noise sequences whose columns lie in `z_w`.
///
/// Generator `j * t + c` (zero-based) carries column `j` of `z_w`'s generator
/// matrix in matrix column `c`.
pub fn noise_mat_zonotope(z_w: &Zonotope, t: usize) -> Result<MatrixZonotope> {
    if t == 0 {
        return Err(SetError::Config("noise matrix zonotope needs at least one column".into()));
    }
    let nx = z_w.dim();
    let center = DMatrix::from_fn(nx, t, |r, _| z_w.center()[r]);
    let mut generators = Vec::with_capacity(z_w.num_generators() * t);
    for j in 0..z_w.num_generators() {
        for c in 0..t {
            let mut g = DMatrix::zeros(nx, t);
            g.set_column(c, &z_w.generators().column(j));
            generators.push(g);
        }
    }
    MatrixZonotope::new(center, generators)
}

/// Factor values of [`noise_mat_zonotope`] reproducing the recorded noise
/// sequence: `per_column[c][j]` is the value of `z_w`'s generator `j` at
/// column `c`.
pub fn noise_witness(per_column: &[Vec<f64>]) -> Vec<f64> {
    let t = per_column.len();
    let gw = per_column.first().map_or(0, |c| c.len());
    let mut out = vec![0.0; gw * t];
    for (c, col) in per_column.iter().enumerate() {
        for (j, &v) in col.iter().enumerate() {
            out[j * t + c] = v;
        }
    }
    out
}

/// Set of all `[Phi Gamma]` compatible with `data` and noise in `z_w`:
/// `(X+ - M_w) [X-; U-]^+`.
pub fn model_set_from_data(data: &DataBatch, z_w: &Zonotope) -> Result<MatrixZonotope> {
    if z_w.dim() != data.state_dim() {
        return Err(SetError::dims("model_set_from_data noise dim", data.state_dim(), z_w.dim()));
    }
    let required = data.state_dim() + data.input_dim();
    let d = data.regressor();
    let rank = linalg::numerical_rank(&d);
    if rank != required {
        return Err(SetError::RankDeficient { rank, required });
    }
    let pinv = linalg::pseudo_inverse(&d);
    let m_w = noise_mat_zonotope(z_w, data.len())?;
    let center = (data.x_plus() - m_w.center()) * &pinv;
    let generators = m_w.generators().iter().map(|g| -(g * &pinv)).collect();
    MatrixZonotope::new(center, generators)
}

/// Intersects the model set from new data with the current refined set.
/// Factors of the result are ordered `[new, prev]` and freshly allocated.
pub fn refine_model_set(
    prev: &ConstrainedMatZonotope,
    new_mz: &MatrixZonotope,
    ctx: &FactorContext,
) -> Result<ConstrainedMatZonotope> {
    new_mz.to_cmz(ctx).intersect(prev, ctx)
}

//! Dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SetError};

/// Column-stacking vectorization.
pub fn vectorize(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`]: reshapes `v` into `rows` rows, column-major.
pub fn convert(v: &DVector<f64>, rows: usize) -> Result<DMatrix<f64>> {
    if rows == 0 || !v.len().is_multiple_of(rows) {
        return Err(SetError::NotDivisible { len: v.len(), rows });
    }
    Ok(DMatrix::from_column_slice(rows, v.len() / rows, v.as_slice()))
}

fn rank_threshold(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    if m.is_empty() {
        return DVector::zeros(0);
    }
    m.clone().svd(false, false).singular_values
}

/// Number of singular values above `max(rows, cols) * eps * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values(m);
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let tol = rank_threshold(m.nrows(), m.ncols(), smax);
    s.iter().filter(|&&x| x > tol).count()
}

/// Moore-Penrose pseudoinverse via SVD with the same threshold as
/// [`numerical_rank`].
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.is_empty() {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = rank_threshold(m.nrows(), m.ncols(), smax);
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            out += (v_t.row(i).transpose() / s) * u.column(i).transpose();
        }
    }
    out
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    if a.nrows() == 0 {
        return DVector::zeros(a.ncols());
    }
    pseudo_inverse(a) * b
}

/// Orthonormal basis (as columns) of the row space of `a`, using the rank
/// threshold of [`numerical_rank`].
pub fn row_space_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.is_empty() {
        return DMatrix::zeros(a.ncols(), 0);
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = rank_threshold(a.nrows(), a.ncols(), smax);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol)
        .map(|(i, _)| i)
        .collect();
    let mut out = DMatrix::zeros(a.ncols(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &v_t.row(i).transpose());
    }
    out
}

/// Result of [`bounded_least_squares`].
#[derive(Debug, Clone)]
pub struct BoxLeastSquares {
    pub x: DVector<f64>,
    /// `a x - b` at the returned point.
    pub residual: DVector<f64>,
    pub iterations: usize,
}

impl BoxLeastSquares {
    pub fn residual_inf(&self) -> f64 {
        self.residual.amax()
    }
}

/// Bounded-variable least squares: minimizes `|a x - b|_2` subject to
/// `lo <= x <= hi` with the active-set method of Stark and Parker.
///
/// `tol` bounds the KKT optimality measure and the relative cost decrease;
/// `max_iter` caps outer iterations.
pub fn bounded_least_squares(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> BoxLeastSquares {
    let n = a.ncols();
    assert_eq!(a.nrows(), b.len(), "bvls: row mismatch");
    if n == 0 {
        return BoxLeastSquares {
            x: DVector::zeros(0),
            residual: -b.clone(),
            iterations: 0,
        };
    }

    let mut x = lstsq(a, b);
    // -1 at lower bound, +1 at upper bound, 0 free
    let mut on_bound = vec![0i8; n];
    for i in 0..n {
        if x[i] <= lo {
            x[i] = lo;
            on_bound[i] = -1;
        } else if x[i] >= hi {
            x[i] = hi;
            on_bound[i] = 1;
        }
    }

    let free_of = |on_bound: &[i8]| -> Vec<usize> {
        (0..n).filter(|&i| on_bound[i] == 0).collect()
    };
    let sub_rhs = |x: &DVector<f64>, on_bound: &[i8]| -> DVector<f64> {
        let mut fixed = x.clone();
        for i in 0..n {
            if on_bound[i] == 0 {
                fixed[i] = 0.0;
            }
        }
        b - a * fixed
    };

    // Initial pass: shrink the free set until its least-squares solution is
    // feasible.
    let mut free = free_of(&on_bound);
    while !free.is_empty() {
        let a_free = a.select_columns(&free);
        let z = lstsq(&a_free, &sub_rhs(&x, &on_bound));
        let mut violated = false;
        for (k, &i) in free.iter().enumerate() {
            if z[k] < lo {
                x[i] = lo;
                on_bound[i] = -1;
                violated = true;
            } else if z[k] > hi {
                x[i] = hi;
                on_bound[i] = 1;
                violated = true;
            } else {
                x[i] = z[k];
            }
        }
        if !violated {
            break;
        }
        free = free_of(&on_bound);
    }

    let mut r = a * &x - b;
    let mut cost = 0.5 * r.norm_squared();
    let mut g = a.transpose() * &r;
    let mut iterations = 0;

    let optimality = |g: &DVector<f64>, on_bound: &[i8]| -> f64 {
        (0..n)
            .map(|i| match on_bound[i] {
                0 => g[i].abs(),
                s => g[i] * s as f64,
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };

    while iterations < max_iter {
        if optimality(&g, &on_bound) < tol {
            break;
        }
        iterations += 1;
        let release = (0..n)
            .max_by(|&i, &j| {
                (g[i] * on_bound[i] as f64).total_cmp(&(g[j] * on_bound[j] as f64))
            })
            .expect("n > 0");
        on_bound[release] = 0;

        // Each pass pins at least one variable, so n + 1 passes suffice.
        for _ in 0..=n {
            let free = free_of(&on_bound);
            if free.is_empty() {
                break;
            }
            let a_free = a.select_columns(&free);
            let z = lstsq(&a_free, &sub_rhs(&x, &on_bound));
            let mut step: Option<(f64, usize, i8)> = None;
            for (k, &i) in free.iter().enumerate() {
                let (bound, side) = if z[k] < lo {
                    (lo, -1)
                } else if z[k] > hi {
                    (hi, 1)
                } else {
                    continue;
                };
                let denom = z[k] - x[i];
                let t = if denom == 0.0 { 0.0 } else { (bound - x[i]) / denom };
                if step.is_none_or(|(best, _, _)| t < best) {
                    step = Some((t, i, side));
                }
            }
            match step {
                Some((t, pin, side)) => {
                    let t = t.clamp(0.0, 1.0);
                    for (k, &i) in free.iter().enumerate() {
                        x[i] += t * (z[k] - x[i]);
                    }
                    x[pin] = if side < 0 { lo } else { hi };
                    on_bound[pin] = side;
                }
                None => {
                    for (k, &i) in free.iter().enumerate() {
                        x[i] = z[k];
                    }
                    break;
                }
            }
        }

        r = a * &x - b;
        let new_cost = 0.5 * r.norm_squared();
        let change = cost - new_cost;
        cost = new_cost;
        g = a.transpose() * &r;
        if change.abs() <= tol * cost {
            break;
        }
    }

    for v in x.iter_mut() {
        *v = v.clamp(lo, hi);
    }
    let residual = a * &x - b;
    BoxLeastSquares {
        x,
        residual,
        iterations,
    }
}

/// Horizontal concatenation of equally tall matrices.
pub fn hcat(rows: usize, parts: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        assert_eq!(p.nrows(), rows, "hcat row mismatch");
        out.view_mut((0, at), (rows, p.ncols())).copy_from(*p);
        at += p.ncols();
    }
    out
}

/// Block-diagonal `[a 0; 0 b]`.
pub fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

/// Vertical concatenation of two vectors.
pub fn vstack(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

/// Row-major nested rows to a matrix (`n_cols` is used when `rows` is empty).
pub fn matrix_from_rows(rows: &[Vec<f64>], n_cols: usize) -> Result<DMatrix<f64>> {
    let n_cols = rows.first().map_or(n_cols, Vec::len);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(SetError::Invalid("ragged matrix".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), n_cols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

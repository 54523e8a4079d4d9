use std::collections::HashMap;

use crate::error::{Result, SetError};
use crate::ids::FactorId;

/// Dense nonnegative integer matrix stored column-major. Column `j` holds the
/// exponents of monomial `j`, row `k` belongs to the `k`-th factor of the
/// owning set's id list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExponentMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl ExponentMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExponentMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            out.data[i * n + i] = 1;
        }
        out
    }

    /// Builds from row-major nested rows, the way matrices are written down.
    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(SetError::Invalid("ragged exponent matrix".into()));
        }
        let mut out = Self::zeros(n_rows, n_cols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                out.data[j * n_rows + i] = e;
            }
        }
        Ok(out)
    }

    /// Like [`from_rows`](Self::from_rows), for an empty matrix with a known
    /// row count (`rows.len() == 0` loses it).
    pub fn from_rows_with_shape(n_rows: usize, n_cols: usize, rows: &[Vec<u32>]) -> Result<Self> {
        if rows.is_empty() {
            return Ok(Self::zeros(n_rows, n_cols));
        }
        let out = Self::from_rows(rows)?;
        if out.rows != n_rows || out.cols != n_cols {
            return Err(SetError::dims(
                "ExponentMatrix::from_rows_with_shape",
                format!("{n_rows}x{n_cols}"),
                format!("{}x{}", out.rows, out.cols),
            ));
        }
        Ok(out)
    }

    pub fn from_columns(rows: usize, columns: impl IntoIterator<Item = Vec<u32>>) -> Self {
        let mut data = Vec::new();
        let mut cols = 0;
        for c in columns {
            assert_eq!(c.len(), rows, "exponent column length");
            data.extend_from_slice(&c);
            cols += 1;
        }
        ExponentMatrix { rows, cols, data }
    }

    pub(crate) fn from_column_major(rows: usize, cols: usize, data: Vec<u32>) -> Self {
        assert_eq!(data.len(), rows * cols, "exponent data length");
        ExponentMatrix { rows, cols, data }
    }

    pub(crate) fn as_slice(&self) -> &[u32] {
        &self.data
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.data[col * self.rows + row]
    }

    pub fn column(&self, col: usize) -> &[u32] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.cols).map(move |j| self.column(j))
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn push_column(&mut self, column: &[u32]) {
        assert_eq!(column.len(), self.rows, "exponent column length");
        self.data.extend_from_slice(column);
        self.cols += 1;
    }

    /// Horizontal concatenation; all parts must share the row count.
    pub fn hcat(rows: usize, parts: &[&ExponentMatrix]) -> Self {
        let mut out = Self::zeros(rows, 0);
        for p in parts {
            assert_eq!(p.rows, rows, "exponent hcat row mismatch");
            out.data.extend_from_slice(&p.data);
            out.cols += p.cols;
        }
        out
    }

    /// Block-diagonal stacking `[self 0; 0 other]`.
    pub fn block_diag(&self, other: &ExponentMatrix) -> Self {
        let rows = self.rows + other.rows;
        let mut out = Self::zeros(rows, self.cols + other.cols);
        for j in 0..self.cols {
            out.data[j * rows..j * rows + self.rows].copy_from_slice(self.column(j));
        }
        for j in 0..other.cols {
            let base = (self.cols + j) * rows + self.rows;
            out.data[base..base + other.rows].copy_from_slice(other.column(j));
        }
        out
    }

    /// Re-indexes rows from `own_ids` onto `target_ids`: row `i` of the result
    /// is this matrix's row for `target_ids[i]`, or zeros when absent. Every
    /// id in `own_ids` must occur in `target_ids`.
    pub fn reindex_rows(&self, own_ids: &[FactorId], target_ids: &[FactorId]) -> Self {
        debug_assert_eq!(own_ids.len(), self.rows);
        let position: HashMap<FactorId, usize> =
            target_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let map: Vec<usize> = own_ids
            .iter()
            .map(|id| *position.get(id).expect("id missing from merged list"))
            .collect();
        let rows = target_ids.len();
        let mut out = Self::zeros(rows, self.cols);
        for j in 0..self.cols {
            let src = self.column(j);
            let dst = &mut out.data[j * rows..(j + 1) * rows];
            for (k, &e) in src.iter().enumerate() {
                dst[map[k]] = e;
            }
        }
        out
    }

    /// Monomial values `prod_k alpha[k]^E[k, j]` for every column `j`, with
    /// `0^0 = 1`.
    pub fn monomials(&self, alpha: &[f64]) -> Vec<f64> {
        assert_eq!(alpha.len(), self.rows, "factor vector length");
        self.columns().map(|col| monomial(col, alpha)).collect()
    }

    /// True when every column has total degree exactly one.
    pub fn is_standard_basis(&self) -> bool {
        self.columns().all(|c| c.iter().sum::<u32>() == 1 && c.iter().all(|&e| e <= 1))
    }

    /// Row index of the single unit entry of column `j`, if the column is a
    /// standard basis vector.
    pub fn unit_row(&self, col: usize) -> Option<usize> {
        let c = self.column(col);
        let mut found = None;
        for (k, &e) in c.iter().enumerate() {
            match e {
                0 => {}
                1 if found.is_none() => found = Some(k),
                _ => return None,
            }
        }
        found
    }

    pub fn max_degree(&self) -> u32 {
        self.columns().map(|c| c.iter().sum::<u32>()).max().unwrap_or(0)
    }

    /// Groups identical columns. Returns the distinct columns (first-seen
    /// order) and, for each original column, the index of its group.
    pub fn unique_columns(&self) -> (ExponentMatrix, Vec<usize>) {
        let mut seen: HashMap<&[u32], usize> = HashMap::with_capacity(self.cols);
        let mut out = Self::zeros(self.rows, 0);
        let mut map = Vec::with_capacity(self.cols);
        for col in self.columns() {
            let next = seen.len();
            let idx = *seen.entry(col).or_insert_with(|| {
                out.data.extend_from_slice(col);
                out.cols += 1;
                next
            });
            map.push(idx);
        }
        (out, map)
    }
}

#[inline]
pub(crate) fn monomial(exponents: &[u32], alpha: &[f64]) -> f64 {
    let mut v = 1.0;
    for (k, &e) in exponents.iter().enumerate() {
        match e {
            0 => {}
            1 => v *= alpha[k],
            _ => v *= alpha[k].powi(e as i32),
        }
    }
    v
}

//! Item response data: one row per examinee, one column per item.

use crate::error::{Error, Result};

/// An `N x k` matrix of item scores, stored row-major.
///
/// Construction rejects `N < 2`, `k < 2` and non-finite entries, so every
/// value of this type has a well-defined sample covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemResponseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ItemResponseMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for a {rows}x{cols} matrix, got {}",
                rows * cols,
                values.len()
            )));
        }
        if rows < 2 {
            return Err(Error::DegenerateInput(format!(
                "need at least 2 examinees, got {rows}"
            )));
        }
        if cols < 2 {
            return Err(Error::DegenerateInput(format!(
                "need at least 2 items, got {cols}"
            )));
        }
        let missing: Vec<(usize, usize)> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_finite())
            .map(|(i, _)| (i / cols, i % cols))
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingData(missing));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(n * k);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != k {
                return Err(Error::NonRectangular {
                    row: i,
                    expected: k,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(n, k, values)
    }

    /// Number of examinees `N`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of items `k`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn iter_rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.cols)
    }

    /// Stacks `self` on top of `other`; both must have the same item count.
    pub fn stack(&self, other: &ItemResponseMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::UnequalItemCounts {
                k1: self.cols,
                k2: other.cols,
            });
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Self::new(self.rows + other.rows, self.cols, values)
    }

    /// Rows picked by index, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Self::new(idx.len(), self.cols, values)
    }

    /// Columns `range`, used to split paired data into its two occasions.
    pub fn select_cols(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.end > self.cols || range.start >= range.end {
            return Err(Error::InvalidArgument(format!(
                "column range {range:?} out of bounds for {} items",
                self.cols
            )));
        }
        let mut values = Vec::with_capacity(self.rows * range.len());
        for r in self.iter_rows() {
            values.extend_from_slice(&r[range.clone()]);
        }
        Self::new(self.rows, range.len(), values)
    }
}

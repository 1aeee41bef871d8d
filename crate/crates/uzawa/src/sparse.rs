//! Compressed sparse row matrices and dense vector kernels.
//!
//! [`SparseMatrix`] stores a real matrix in CSR form: `row_offsets` of
//! length `nrows + 1`, and per-row column indices kept strictly increasing.
//! Only explicit entries are stored; exact zeros are pruned at construction.
//! All products accumulate in deterministic ascending-index order, so
//! repeated calls on the same data are bitwise identical.
//!
//! Fallible APIs (construction, dense conversion) return [`Result`].
//! The vector kernels and products panic on dimension misuse: a mismatched
//! `spmv` is a programming error, not a data error, and is documented on
//! each method.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::limits;

/// Dense vector alias used throughout the crate.
pub type DenseVector = Vec<f64>;

/// Real sparse matrix in compressed sparse row format.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from (row, col, value) triplets.
    ///
    /// Duplicate coordinates are summed in the order given; entries that are
    /// exactly zero after summation are dropped. Indices are validated
    /// against the stated shape.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for (position, &(row, col, _)) in triplets.iter().enumerate() {
            if row >= nrows || col >= ncols {
                return Err(Error::IndexOutOfRange {
                    position,
                    row,
                    col,
                    nrows,
                    ncols,
                });
            }
        }

        // Counting sort by row keeps construction O(nnz + nrows); the
        // in-row sort is stable so duplicates sum in input order.
        let mut counts = vec![0usize; nrows + 1];
        for &(row, _, _) in triplets {
            counts[row + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut slots: Vec<(usize, f64)> = vec![(0, 0.0); triplets.len()];
        {
            let mut next = counts.clone();
            for &(row, col, val) in triplets {
                slots[next[row]] = (col, val);
                next[row] += 1;
            }
        }

        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        for row in 0..nrows {
            let slice = &mut slots[counts[row]..counts[row + 1]];
            slice.sort_by_key(|&(col, _)| col);
            let mut i = 0;
            while i < slice.len() {
                let col = slice[i].0;
                let mut sum = slice[i].1;
                let mut j = i + 1;
                while j < slice.len() && slice[j].0 == col {
                    sum += slice[j].1;
                    j += 1;
                }
                if sum != 0.0 {
                    col_indices.push(col);
                    values.push(sum);
                }
                i = j;
            }
            row_offsets.push(col_indices.len());
        }

        Ok(SparseMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from dense row-major data, pruning exact zeros.
    pub fn from_row_major(nrows: usize, ncols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::DimensionMismatch(format!(
                "row-major data has {} entries, expected {}x{} = {}",
                data.len(),
                nrows,
                ncols,
                nrows * ncols
            )));
        }
        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for row in 0..nrows {
            for col in 0..ncols {
                let v = data[row * ncols + col];
                if v != 0.0 {
                    col_indices.push(col);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix directly from CSR parts.
    ///
    /// Internal constructor for kernels that produce rows already sorted;
    /// invariants are checked in debug builds only.
    pub(crate) fn from_csr_parts(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_offsets.len(), nrows + 1);
        debug_assert_eq!(*row_offsets.last().unwrap(), col_indices.len());
        debug_assert_eq!(col_indices.len(), values.len());
        #[cfg(debug_assertions)]
        for row in 0..nrows {
            let cols = &col_indices[row_offsets[row]..row_offsets[row + 1]];
            for w in cols.windows(2) {
                debug_assert!(w[0] < w[1], "row {row} columns not strictly increasing");
            }
            for &c in cols {
                debug_assert!(c < ncols);
            }
        }
        SparseMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// The n-by-n identity.
    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// An all-zero matrix of the given shape (no stored entries).
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Column indices and values of row `row`.
    ///
    /// Panics if `row` is out of range.
    pub fn row(&self, row: usize) -> (&[usize], &[f64]) {
        let lo = self.row_offsets[row];
        let hi = self.row_offsets[row + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Value at (row, col); zero when no entry is stored.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (cols, vals) = self.row(row);
        match cols.binary_search(&col) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Iterates stored entries as (row, col, value) in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |row| {
            let (cols, vals) = self.row(row);
            cols.iter().zip(vals).map(move |(&c, &v)| (row, c, v))
        })
    }

    /// Matrix-vector product `A v`.
    ///
    /// Each output entry accumulates in ascending column order, so the
    /// result is reproducible bit for bit. Panics if `v.len() != ncols`.
    pub fn spmv(&self, v: &[f64]) -> DenseVector {
        assert_eq!(
            v.len(),
            self.ncols,
            "spmv: vector length {} does not match ncols {}",
            v.len(),
            self.ncols
        );
        let mut out = vec![0.0; self.nrows];
        for (row, slot) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(row);
            let mut acc = 0.0;
            for (&c, &a) in cols.iter().zip(vals) {
                acc += a * v[c];
            }
            *slot = acc;
        }
        out
    }

    /// Transposed product `A^T v` without materializing the transpose.
    ///
    /// Scatters row contributions in row-major order, which fixes the
    /// accumulation order deterministically. Panics if `v.len() != nrows`.
    pub fn spmv_transpose(&self, v: &[f64]) -> DenseVector {
        assert_eq!(
            v.len(),
            self.nrows,
            "spmv_transpose: vector length {} does not match nrows {}",
            v.len(),
            self.nrows
        );
        let mut out = vec![0.0; self.ncols];
        for (row, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(row);
            for (&c, &a) in cols.iter().zip(vals) {
                out[c] += a * vi;
            }
        }
        out
    }

    /// Explicit transpose, preserving sorted-row invariants.
    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut next = counts.clone();
        for row in 0..self.nrows {
            let (cols, vals) = self.row(row);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = next[c];
                col_indices[slot] = row;
                values[slot] = v;
                next[c] += 1;
            }
        }
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    /// Dense conversion under the default entry limit
    /// (4,000,000 entries, overridable via `UZAWA_DENSE_LIMIT`).
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        self.to_dense_with_limit(limits::dense_entry_limit())
    }

    /// Dense conversion with an explicit entry limit.
    pub fn to_dense_with_limit(&self, limit: usize) -> Result<DMatrix<f64>> {
        let entries = self.nrows.saturating_mul(self.ncols);
        if entries > limit {
            return Err(Error::DenseLimitExceeded {
                nrows: self.nrows,
                ncols: self.ncols,
                entries,
                limit,
            });
        }
        let mut out = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            out[(r, c)] = v;
        }
        Ok(out)
    }

    /// Largest entry magnitude; zero for an empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Entrywise comparison: largest |self - other| over the union pattern.
    ///
    /// Panics if shapes differ.
    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut worst = 0.0f64;
        for (r, c, v) in self.iter() {
            worst = worst.max((v - other.get(r, c)).abs());
        }
        for (r, c, v) in other.iter() {
            worst = worst.max((v - self.get(r, c)).abs());
        }
        worst
    }
}

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Max-magnitude norm; zero for an empty vector.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Dot product. Panics if lengths differ.
pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    assert_eq!(
        u.len(),
        v.len(),
        "dot: lengths {} and {} differ",
        u.len(),
        v.len()
    );
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Returns `alpha * u + v`. Panics if lengths differ.
pub fn axpy(alpha: f64, u: &[f64], v: &[f64]) -> DenseVector {
    assert_eq!(
        u.len(),
        v.len(),
        "axpy: lengths {} and {} differ",
        u.len(),
        v.len()
    );
    u.iter().zip(v).map(|(a, b)| alpha * a + b).collect()
}

/// In-place `v += alpha * u`. Panics if lengths differ.
pub fn axpy_in_place(alpha: f64, u: &[f64], v: &mut [f64]) {
    assert_eq!(
        u.len(),
        v.len(),
        "axpy_in_place: lengths {} and {} differ",
        u.len(),
        v.len()
    );
    for (b, a) in v.iter_mut().zip(u) {
        *b += alpha * a;
    }
}

/// Returns `u - v`. Panics if lengths differ.
pub fn sub(u: &[f64], v: &[f64]) -> DenseVector {
    assert_eq!(
        u.len(),
        v.len(),
        "sub: lengths {} and {} differ",
        u.len(),
        v.len()
    );
    u.iter().zip(v).map(|(a, b)| a - b).collect()
}

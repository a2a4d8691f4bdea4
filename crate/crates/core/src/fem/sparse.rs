//! Compressed sparse row storage and diagonal matrices.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};

/// Sparse matrix in CSR form with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets.
    ///
    /// Duplicates are summed in the order they appear, so the result does
    /// not depend on anything but the input sequence.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|&&(i, j, _)| i >= n_rows || j >= n_cols) {
            return Err(Error::InvalidParameter(format!(
                "entry ({i}, {j}) outside a {n_rows} x {n_cols} matrix"
            )));
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = vec![0; n_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (i, j, v) = triplets[k];
            if last == Some((i, j)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "input length");
        assert_eq!(y.len(), self.n_rows, "output length");
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let triplets: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        SparseMatrix::from_triplets(self.n_cols, self.n_rows, &triplets)
            .expect("transposed indices are in range")
    }

    pub fn scale(&self, s: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + alpha * other` on the union of both patterns.
    pub fn add_scaled(&self, other: &SparseMatrix, alpha: f64) -> Result<SparseMatrix> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows * self.n_cols,
                found: other.n_rows * other.n_cols,
            });
        }
        let mut triplets: Vec<_> = self.triplets().collect();
        triplets.extend(other.triplets().map(|(i, j, v)| (i, j, alpha * v)));
        SparseMatrix::from_triplets(self.n_rows, self.n_cols, &triplets)
    }

    /// Rows `rows` and columns `cols` of the matrix, renumbered consecutively.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SparseMatrix {
        let col_map: BTreeMap<usize, usize> =
            cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        let mut triplets = Vec::new();
        for (ri, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                if let Some(&cj) = col_map.get(&j) {
                    triplets.push((ri, cj, v));
                }
            }
        }
        SparseMatrix::from_triplets(rows.len(), cols.len(), &triplets)
            .expect("renumbered indices are in range")
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
            / scale
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.n_rows == self.n_cols && self.asymmetry() <= tol
    }

    /// Dense row-major copy, for tests and small problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, j, v) in self.triplets() {
            dense[i][j] = v;
        }
        dense
    }
}

/// Diagonal matrix with strictly positive entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMatrix {
    diag: Vec<f64>,
}

impl DiagonalMatrix {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if let Some((i, d)) = diag.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "diagonal entry {i} is {d}, expected a positive value"
            )));
        }
        Ok(DiagonalMatrix { diag })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.diag
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.diag.iter().zip(x).map(|(d, v)| d * v).collect()
    }

    /// `D^{-1} x`.
    pub fn solve(&self, x: &[f64]) -> Vec<f64> {
        self.diag.iter().zip(x).map(|(d, v)| v / d).collect()
    }

    /// Entries with the given indices.
    pub fn restrict(&self, indices: &[usize]) -> DiagonalMatrix {
        DiagonalMatrix {
            diag: indices.iter().map(|&i| self.diag[i]).collect(),
        }
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        let triplets: Vec<_> = self.diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        SparseMatrix::from_triplets(self.len(), self.len(), &triplets).expect("diagonal")
    }
}

//! Compressed sparse row storage for assembled operators.
//!
//! Assembly pushes `(row, col, value)` triplets in element order; conversion
//! sorts them by `(row, col)` with a stable sort and sums duplicates in
//! insertion order, so the assembled matrix is bitwise reproducible.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, capacity: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(capacity),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Adds every stored entry of `block`, scaled, at offset `(row0, col0)`.
    pub fn add_block(&mut self, row0: usize, col0: usize, scale: f64, block: &SparseMatrix) {
        for (i, j, v) in block.iter() {
            self.push(row0 + i, col0 + j, scale * v);
        }
    }

    pub fn build(mut self) -> SparseMatrix {
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        TripletBuilder::new(nrows, ncols).build()
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

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// Stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matrix-vector dimension mismatch");
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "matrix-vector dimension mismatch");
        let mut out = vec![0.0; self.ncols];
        for (i, j, v) in self.iter() {
            out[j] += v * x[i];
        }
        out
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nrows);
        (0..self.nrows)
            .map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>())
            .sum()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = TripletBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for (i, j, v) in self.iter() {
            t.push(j, i, v);
        }
        t.build()
    }

    pub fn scaled(&self, s: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `Σ sᵢ Aᵢ` over matrices of equal shape.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> Result<SparseMatrix> {
        let (nrows, ncols) = match terms.first() {
            Some((_, m)) => (m.nrows, m.ncols),
            None => return Err(Error::invalid("empty linear combination")),
        };
        let mut t = TripletBuilder::new(nrows, ncols);
        for &(s, m) in terms {
            if m.nrows != nrows {
                return Err(Error::DimensionMismatch {
                    what: "linear combination rows",
                    expected: nrows,
                    found: m.nrows,
                });
            }
            if m.ncols != ncols {
                return Err(Error::DimensionMismatch {
                    what: "linear combination columns",
                    expected: ncols,
                    found: m.ncols,
                });
            }
            t.add_block(0, 0, s, m);
        }
        Ok(t.build())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij − A_ji|` over the stored pattern.
    pub fn symmetry_defect(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn to_faer(&self) -> Result<faer::sparse::SparseColMat<usize, f64>> {
        let triplets: Vec<_> = self
            .iter()
            .map(|(i, j, v)| faer::sparse::Triplet::new(i, j, v))
            .collect();
        faer::sparse::SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .map_err(|e| Error::invalid(format!("sparse conversion failed: {e:?}")))
    }

    /// Writes the matrix in Matrix Market coordinate format (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseMatrix {
        let mut t = TripletBuilder::new(3, 3);
        t.push(0, 0, 2.0);
        t.push(2, 1, -1.0);
        t.push(0, 0, 1.0);
        t.push(1, 2, 4.0);
        t.push(1, 0, 0.5);
        t.build()
    }

    #[test]
    fn duplicates_are_summed() {
        let a = small();
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(2, 2), 0.0);
    }

    #[test]
    fn products_agree_with_dense() {
        let a = small();
        let x = [1.0, 2.0, 3.0];
        assert_eq!(a.mul_vec(&x), vec![3.0, 12.5, -2.0]);
        assert_eq!(a.transpose().mul_vec(&x), a.transpose_mul_vec(&x));
        assert_eq!(a.bilinear(&x, &x), 3.0 + 25.0 - 6.0);
    }

    #[test]
    fn matrix_market_header() {
        let mut buf = Vec::new();
        small().write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("%%MatrixMarket matrix coordinate real general")
        );
        assert_eq!(lines.next(), Some("3 3 4"));
        assert_eq!(text.lines().count(), 6);
        assert!(text.contains("1 1 3.00000000000000000e0"));
    }

    #[test]
    fn mismatched_combination_is_rejected() {
        let a = small();
        let b = SparseMatrix::zeros(2, 3);
        assert!(SparseMatrix::linear_combination(&[(1.0, &a), (1.0, &b)]).is_err());
    }
}

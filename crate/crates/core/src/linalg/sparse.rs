//! Compressed sparse row matrices built from triplet lists.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::Result;

/// CSR matrix with sorted, duplicate-free column indices per row.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds the matrix from (row, col, value) triplets. Duplicates are
    /// summed. The triplet order does not affect the result, so parallel
    /// per-element assembly followed by a deterministic merge is safe.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> SparseMatrix {
        // Stable sort: duplicate entries accumulate in insertion order, so
        // symmetric element contributions sum identically for (i,j) and (j,i)
        // and assembled symmetric blocks are bitwise symmetric.
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut prev = None;
        for &(r, c, v) in &triplets {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            if prev == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                prev = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
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

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut s = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                s += v * x[c];
            }
            y[r] = s;
        }
    }

    /// y += alpha * A x
    pub fn matvec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut s = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                s += v * x[c];
            }
            y[r] += alpha * s;
        }
    }

    /// y += alpha * A^T x
    pub fn matvec_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let xr = alpha * x[r];
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * xr;
            }
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                triplets.push((c, r, v));
            }
        }
        SparseMatrix::from_triplets(self.ncols, self.nrows, triplets)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Largest absolute asymmetry `max |a_ij - a_ji|`; zero for exactly
    /// symmetric assembly.
    pub fn symmetry_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                defect = defect.max((v - self.get(c, r)).abs());
            }
        }
        defect
    }

    pub fn max_abs_diag(&self) -> f64 {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i).abs())
            .fold(0.0, f64::max)
    }

    /// Writes the matrix in Matrix Market coordinate format. `comments`
    /// are emitted as `%` lines after the banner.
    pub fn write_matrix_market<W: Write>(&self, mut w: W, comments: &[String]) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        for line in comments {
            writeln!(w, "% {line}")?;
        }
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:.16e}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_merge_duplicates() {
        let m = SparseMatrix::from_triplets(
            2,
            3,
            vec![(0, 1, 1.0), (1, 2, 4.0), (0, 1, 2.5), (0, 0, -1.0)],
        );
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 1), 3.5);
        assert_eq!(m.get(0, 0), -1.0);
        assert_eq!(m.get(1, 2), 4.0);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn matvec_and_transpose_agree_with_dense() {
        let m = SparseMatrix::from_triplets(
            3,
            2,
            vec![(0, 0, 2.0), (1, 1, -3.0), (2, 0, 0.5), (2, 1, 1.5)],
        );
        let x = [1.0, 2.0];
        let mut y = [0.0; 3];
        m.matvec(&x, &mut y);
        assert_eq!(y, [2.0, -6.0, 3.5]);

        let t = m.transpose();
        let mut z = vec![0.0; 2];
        t.matvec(&y, &mut z);
        let mut z2 = vec![0.0; 2];
        m.matvec_transpose_add(1.0, &y, &mut z2);
        assert_eq!(z, z2);
    }

    #[test]
    fn matrix_market_output_shape() {
        let m = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 0, -2.0)]);
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf, &[String::from("test")]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "%%MatrixMarket matrix coordinate real general"
        );
        assert_eq!(lines.next().unwrap(), "% test");
        assert_eq!(lines.next().unwrap(), "2 2 2");
    }
}

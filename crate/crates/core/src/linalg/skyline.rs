//! Skyline (profile) Cholesky factorization for sparse symmetric positive
//! definite matrices.
//!
//! The factor fills only inside the skyline, which stays small for the
//! banded dof numbering produced by the structured mesh generators. One
//! factorization is reused for many right-hand sides.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::sparse::SparseMatrix;

/// L L^T factor stored as an upper-triangle skyline: column `j` holds rows
/// `col_start[j] ..= j` contiguously.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    n: usize,
    col_start: Vec<usize>,
    ptr: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    /// Factors a symmetric positive definite sparse matrix.
    ///
    /// Fails with [`Error::NearSingular`] when a pivot drops to or below
    /// `pivot_rel_tol * max |diagonal|`.
    pub fn factor(a: &SparseMatrix, pivot_rel_tol: f64) -> Result<SkylineCholesky> {
        SkylineCholesky::factor_with_rank_one(a, None, pivot_rel_tol)
    }

    /// Factors `a + theta * w w^T`. A dense rank-one update widens the
    /// profile to the full triangle, which is acceptable at the sizes where
    /// the trace deflation is needed.
    pub fn factor_with_rank_one(
        a: &SparseMatrix,
        rank_one: Option<(f64, &[f64])>,
        pivot_rel_tol: f64,
    ) -> Result<SkylineCholesky> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "skyline factorization needs a square matrix");

        // Profile: first nonzero row per column under a symmetric pattern.
        let mut col_start: Vec<usize> = if rank_one.is_some() {
            vec![0; n]
        } else {
            (0..n).collect()
        };
        if rank_one.is_none() {
            for r in 0..n {
                let (cols, _) = a.row(r);
                for &c in cols {
                    let (lo, hi) = (r.min(c), r.max(c));
                    if lo < col_start[hi] {
                        col_start[hi] = lo;
                    }
                }
            }
        }
        let mut ptr = vec![0usize; n + 1];
        for j in 0..n {
            ptr[j + 1] = ptr[j] + (j - col_start[j] + 1);
        }
        let mut data = vec![0.0; ptr[n]];
        if let Some((theta, w)) = rank_one {
            assert_eq!(w.len(), n);
            for j in 0..n {
                let twj = theta * w[j];
                for i in 0..=j {
                    data[ptr[j] + i] = twj * w[i];
                }
            }
        }
        for r in 0..n {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if r <= c {
                    data[ptr[c] + (r - col_start[c])] += v;
                }
            }
        }

        let mut max_diag: f64 = 0.0;
        for j in 0..n {
            max_diag = max_diag.max(data[ptr[j + 1] - 1].abs());
        }
        let pivot_floor = pivot_rel_tol * max_diag;
        let mut fac = SkylineCholesky {
            n,
            col_start,
            ptr,
            data,
        };
        fac.factor_in_place(pivot_floor)?;
        Ok(fac)
    }

    fn factor_in_place(&mut self, pivot_floor: f64) -> Result<()> {
        for j in 0..self.n {
            let fj = self.col_start[j];
            for i in fj..j {
                let fi = self.col_start[i];
                let lo = fi.max(fj);
                let len = i - lo;
                let s = if len > 0 {
                    let (ci, cj) = (
                        self.ptr[i] + (lo - fi),
                        self.ptr[j] + (lo - fj),
                    );
                    dot(&self.data[ci..ci + len], &self.data[cj..cj + len])
                } else {
                    0.0
                };
                let diag_i = self.data[self.ptr[i] + (i - fi)];
                let pos = self.ptr[j] + (i - fj);
                self.data[pos] = (self.data[pos] - s) / diag_i;
            }
            let cj = self.ptr[j];
            let len = j - fj;
            let s = dot(&self.data[cj..cj + len], &self.data[cj..cj + len]);
            let pos = cj + len;
            let d = self.data[pos] - s;
            if d <= pivot_floor || !d.is_finite() {
                return Err(Error::NearSingular { index: j, pivot: d });
            }
            self.data[pos] = d.sqrt();
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        // Forward: L y = b, where row j of L is column j of the skyline.
        for j in 0..self.n {
            let fj = self.col_start[j];
            let cj = self.ptr[j];
            let len = j - fj;
            let s = dot(&self.data[cj..cj + len], &b[fj..j]);
            b[j] = (b[j] - s) / self.data[cj + len];
        }
        // Backward: L^T x = y.
        for j in (0..self.n).rev() {
            let fj = self.col_start[j];
            let cj = self.ptr[j];
            let len = j - fj;
            let xj = b[j] / self.data[cj + len];
            b[j] = xj;
            let col = &self.data[cj..cj + len];
            for (bk, &lkj) in b[fj..j].iter_mut().zip(col) {
                *bk -= lkj * xj;
            }
        }
    }

    /// Solves `A X = B` column by column, in place.
    pub fn solve_mat_in_place(&self, b: &mut DMatrix<f64>) {
        assert_eq!(b.nrows(), self.n);
        for mut col in b.column_iter_mut() {
            let slice: &mut [f64] = col.as_mut_slice();
            self.solve_in_place(slice);
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn solves_tridiagonal_system() {
        let a = laplacian_1d(50);
        let fac = SkylineCholesky::factor(&a, 1e-14).unwrap();
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = vec![0.0; 50];
        a.matvec(&x_true, &mut b);
        fac.solve_in_place(&mut b);
        for (xi, bi) in x_true.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn detects_singular_matrix() {
        // Second row is a multiple of the first: semidefinite.
        let a = SparseMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 4.0)],
        );
        match SkylineCholesky::factor(&a, 1e-14) {
            Err(Error::NearSingular { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected NearSingular, got {other:?}"),
        }
    }

    #[test]
    fn handles_skyline_fill() {
        // Arrow matrix: last row/column dense; profile covers the fill.
        let n = 12;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 10.0));
        }
        for i in 0..n - 1 {
            t.push((i, n - 1, 1.0));
            t.push((n - 1, i, 1.0));
        }
        let a = SparseMatrix::from_triplets(n, n, t);
        let fac = SkylineCholesky::factor(&a, 1e-14).unwrap();
        let x_true: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let mut b = vec![0.0; n];
        a.matvec(&x_true, &mut b);
        fac.solve_in_place(&mut b);
        for (xi, bi) in x_true.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }
}

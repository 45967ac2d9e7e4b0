//! Dense symmetric kernels: Cholesky factorization and eigenvalues of
//! symmetric matrices (Householder tridiagonalization + implicit QL).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a dense SPD matrix.
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    l: DMatrix<f64>,
}

impl DenseCholesky {
    /// Factors `a = L L^T`. Fails with [`Error::NearSingular`] when a pivot
    /// drops to or below `pivot_rel_tol * max |diagonal|`.
    pub fn factor(a: &DMatrix<f64>, pivot_rel_tol: f64) -> Result<DenseCholesky> {
        let n = a.nrows();
        assert_eq!(n, a.ncols());
        let pivot_floor = pivot_rel_tol
            * (0..n)
                .map(|i| a[(i, i)].abs())
                .fold(0.0, f64::max);
        let mut l = a.clone_owned();
        let cols = l.as_mut_slice(); // column-major, column j at j*n
        for j in 0..n {
            for k in 0..j {
                let ljk = cols[k * n + j];
                if ljk != 0.0 {
                    let (head, tail) = cols.split_at_mut(j * n);
                    let colk = &head[k * n + j..k * n + n];
                    let colj = &mut tail[j..n];
                    for (cj, ck) in colj.iter_mut().zip(colk) {
                        *cj -= ljk * ck;
                    }
                }
            }
            let d = cols[j * n + j];
            if d <= pivot_floor || !d.is_finite() {
                return Err(Error::NearSingular { index: j, pivot: d });
            }
            let s = d.sqrt();
            for v in cols[j * n + j..j * n + n].iter_mut() {
                *v /= s;
            }
        }
        Ok(DenseCholesky { l })
    }

    pub fn n(&self) -> usize {
        self.l.nrows()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n();
        assert_eq!(b.len(), n);
        let cols = self.l.as_slice();
        // L y = b
        for j in 0..n {
            let yj = b[j] / cols[j * n + j];
            b[j] = yj;
            for (bi, lij) in b[j + 1..n].iter_mut().zip(&cols[j * n + j + 1..j * n + n]) {
                *bi -= yj * lij;
            }
        }
        // L^T x = y
        for j in (0..n).rev() {
            let mut s = b[j];
            for (bi, lij) in b[j + 1..n].iter().zip(&cols[j * n + j + 1..j * n + n]) {
                s -= bi * lij;
            }
            b[j] = s / cols[j * n + j];
        }
    }

    pub fn solve_mat_in_place(&self, b: &mut DMatrix<f64>) {
        assert_eq!(b.nrows(), self.n());
        for mut col in b.column_iter_mut() {
            self.solve_in_place(col.as_mut_slice());
        }
    }
}

/// Eigenvalues of a symmetric matrix, ascending. Only the lower triangle of
/// `a` is referenced.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    if n == 0 {
        return Vec::new();
    }
    // Row-major working copy of the lower triangle.
    let mut w = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            w[i * n + j] = a[(i, j)];
        }
    }
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    tridiagonalize(&mut w, n, &mut d, &mut e);
    ql_implicit(&mut d, &mut e, n);
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    d
}

/// Householder reduction of a symmetric matrix (lower triangle, row-major)
/// to tridiagonal form; values-only variant.
fn tridiagonalize(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += a[i * n + k].abs();
            }
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in j + 1..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f_acc += e[j] * a[i * n + j];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    e[j] -= hh * f;
                    let g = e[j];
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[i * n + i];
    }
}

fn hypot2(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
fn ql_implicit(d: &mut [f64], e: &mut [f64], n: usize) {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 50, "symmetric QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = hypot2(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = hypot2(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                f = (d[i] - g) * s + 2.0 * c * b;
                p = s * f;
                d[i + 1] = g + p;
                g = c * f - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let n = 20;
        // SPD: diagonally dominant symmetric matrix.
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = if i == j {
                    4.0
                } else {
                    1.0 / (1.0 + (i as f64 - j as f64).abs())
                };
            }
        }
        let fac = DenseCholesky::factor(&a, 1e-14).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = (0..n).map(|j| a[(i, j)] * x[j]).sum();
        }
        fac.solve_in_place(&mut b);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-11);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            DenseCholesky::factor(&a, 1e-14),
            Err(Error::NearSingular { index: 1, .. })
        ));
    }

    #[test]
    fn symmetric_eigenvalues_of_known_matrix() {
        // Second-difference matrix: eigenvalues 2 - 2 cos(k pi / (n+1)).
        let n = 9;
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = 2.0;
            if i + 1 < n {
                a[(i, i + 1)] = -1.0;
                a[(i + 1, i)] = -1.0;
            }
        }
        let ev = sym_eigenvalues(&a);
        for (k, &lam) in ev.iter().enumerate() {
            let exact =
                2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((lam - exact).abs() < 1e-12, "k={k}: {lam} vs {exact}");
        }
    }
}

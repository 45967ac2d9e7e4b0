//! Dense complex LU factorization with partial pivoting, used by the
//! shifted inverse iteration that extracts eigenvectors on demand.

use num_complex::Complex64;

/// LU factors of a complex matrix, row-major storage.
pub struct ComplexLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

#[derive(Debug)]
pub struct SingularMatrix;

impl ComplexLu {
    pub fn factor(a: Vec<Complex64>, n: usize) -> Result<ComplexLu, SingularMatrix> {
        assert_eq!(a.len(), n * n);
        let mut lu = a;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // Partial pivot on column k.
            let mut pivot_row = k;
            let mut pivot_mag = lu[k * n + k].norm_sqr();
            for i in k + 1..n {
                let mag = lu[i * n + k].norm_sqr();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = i;
                }
            }
            if pivot_mag == 0.0 {
                return Err(SingularMatrix);
            }
            if pivot_row != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot_row * n + j);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let m = lu[i * n + k] / pivot;
                lu[i * n + k] = m;
                if m != Complex64::new(0.0, 0.0) {
                    let (up, low) = lu.split_at_mut(i * n);
                    let row_k = &up[k * n + k + 1..k * n + n];
                    let row_i = &mut low[k + 1..n];
                    for (x, &u) in row_i.iter_mut().zip(row_k) {
                        *x -= m * u;
                    }
                }
            }
        }
        Ok(ComplexLu { n, lu, perm })
    }

    /// Solves `A x = b`, returning x.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        // Ly = Pb
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        // Ux = y
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_complex_system() {
        let n = 3;
        let a = vec![
            Complex64::new(2.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.5, -0.5),
            Complex64::new(0.0, 3.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -2.0),
            Complex64::new(4.0, 1.0),
        ];
        let x_true = vec![
            Complex64::new(1.0, -1.0),
            Complex64::new(2.0, 0.5),
            Complex64::new(-0.5, 3.0),
        ];
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                b[i] += a[i * n + j] * x_true[j];
            }
        }
        let lu = ComplexLu::factor(a, n).unwrap();
        let x = lu.solve(&b);
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_singular() {
        let a = vec![Complex64::new(0.0, 0.0); 4];
        assert!(ComplexLu::factor(a, 2).is_err());
    }
}

//! Singular values via one-sided Jacobi rotations.
//!
//! Accurate for small matrices (it never forms the Gram matrix), so it
//! backs the numerical-rank computations used by the eigenvalue family
//! classification and by the structural test oracles.

use nalgebra::DMatrix;

const MAX_SWEEPS: usize = 60;

/// Singular values of a dense matrix, descending order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    // Work on the tall orientation; singular values are transpose-invariant.
    let mut m = if a.nrows() >= a.ncols() {
        a.clone_owned()
    } else {
        a.transpose()
    };
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }

    let tol = 1e-15;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (mut app, mut aqq, mut apq) = (0.0f64, 0.0f64, 0.0f64);
                {
                    let cp = m.column(p);
                    let cq = m.column(q);
                    for (x, y) in cp.iter().zip(cq.iter()) {
                        app += x * x;
                        aqq += y * y;
                        apq += x * y;
                    }
                }
                if apq.abs() <= tol * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                rotated = true;
                // Jacobi rotation annihilating the off-diagonal Gram entry.
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m.nrows() {
                    let (xi, yi) = (m[(i, p)], m[(i, q)]);
                    m[(i, p)] = c * xi - s * yi;
                    m[(i, q)] = s * xi + c * yi;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = (0..n).map(|j| m.column(j).norm()).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

/// Numerical rank with threshold `rel_tol * sigma_max`.
pub fn rank_from_singular_values(sv: &[f64], rel_tol: f64) -> usize {
    match sv.first() {
        None => 0,
        Some(&smax) if smax == 0.0 => 0,
        Some(&smax) => sv.iter().take_while(|&&s| s > rel_tol * smax).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_singular_values() {
        let a = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, 0.0, 0.0, -5.0, 0.0, 0.0, 0.0, 1.0]);
        let sv = singular_values(&a);
        assert!((sv[0] - 5.0).abs() < 1e-14);
        assert!((sv[1] - 3.0).abs() < 1e-14);
        assert!((sv[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_matrix() {
        // Second row is twice the first.
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 0.0, 0.0]);
        let sv = singular_values(&a);
        assert_eq!(rank_from_singular_values(&sv, 1e-10), 1);
    }

    #[test]
    fn wide_matrix_matches_transpose() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 0.5, -2.0, 3.0, 0.0, 1.0, 1.0, -1.0]);
        let s1 = singular_values(&a);
        let s2 = singular_values(&a.transpose());
        for (x, y) in s1.iter().zip(&s2) {
            assert!((x - y).abs() < 1e-12);
        }
        // Frobenius norm check.
        let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let sv_fro: f64 = s1.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((fro - sv_fro).abs() < 1e-12);
    }
}

//! In-house numerical kernels sized for the desk-scale problems this crate
//! targets: sparse skyline Cholesky, dense Cholesky, symmetric and
//! nonsymmetric dense eigensolvers, one-sided Jacobi singular values and a
//! complex LU for inverse iteration.

pub mod complex_lu;
pub mod dense;
pub mod eig;
pub mod jacobi_svd;
pub mod skyline;
pub mod sparse;

pub use complex_lu::ComplexLu;
pub use dense::{sym_eigenvalues, DenseCholesky};
pub use eig::{real_eigen, NonConvergence, RealEigen};
pub use jacobi_svd::{rank_from_singular_values, singular_values};
pub use skyline::SkylineCholesky;
pub use sparse::SparseMatrix;

//! Least-squares finite elements for linear elasticity.
//!
//! The two-field first-order formulation discretizes the stress with
//! lowest-order Raviart-Thomas elements (one H(div) field per tensor row)
//! and the displacement with continuous piecewise-linear elements. The
//! crate assembles the four bilinear-form blocks, eliminates the stress
//! through a displacement Schur complement, and solves the resulting
//! non-symmetric generalized eigenvalue problem by switching the roles of
//! the two matrices, so that infinite eigenvalues map to zero and the
//! finite spectrum is recovered from the reciprocals.
//!
//! On top of the solver sit convergence studies against reference
//! eigenvalues, spectrum sweeps over the Lame parameter lambda up to the
//! incompressible limit, and a CLI (`lsfem`) driving the whole pipeline.

pub mod analysis;
pub mod assembly;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod spectral;

pub use error::{Error, Result};

/// Artifact version echoed into every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

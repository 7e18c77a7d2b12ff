//! Krylov-space analysis of operator dynamics in open spin chains.
//!
//! The crate builds spin-chain Hamiltonians and jump operators as sparse
//! matrices ([`spin_algebra`]), vectorizes them into Liouville space
//! ([`liouville`]), tridiagonalizes the resulting non-Hermitian generator
//! with a two-sided Lanczos iteration ([`krylov_iter`]), integrates the
//! Krylov-space wavefunction ([`dynamics`]), and extracts growth rates and
//! support profiles from the results ([`analysis`]). The [`experiment`]
//! module ties the stages together behind a serializable configuration.

// Link a BLAS/LAPACK provider for ndarray's gemv/gemm and ndarray-linalg.
extern crate blas_src;

pub mod analysis;
pub mod dynamics;
pub mod experiment;
pub mod error;
pub mod krylov_iter;
pub mod liouville;
pub mod sparse;
pub mod spin_algebra;

pub use error::{Error, Result};
pub use sparse::CsMat;

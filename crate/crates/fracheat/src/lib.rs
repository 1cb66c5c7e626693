//! Numerical laboratory for the fractional heat operator `(d_t - Laplacian)^s`
//! with an inverse-square Hardy potential.

pub mod cli_sweep;
pub mod error;
pub mod kernel_ops;
pub mod lattice;
pub mod monotone_solver;
pub mod quad;
pub mod spectral_constants;
pub mod supersolution_lab;
pub mod verifier;

pub use error::{Error, Result};

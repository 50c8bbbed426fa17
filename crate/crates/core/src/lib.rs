//! Finite-rank deformations of Wigner matrices.
//!
//! The crate pairs the closed-form large-`N` predictions for spiked Wigner
//! matrices (outlier locations, their Gaussian fluctuations with the
//! third-moment shift, covariances of resolvent bilinear forms and of
//! regular test functions) with a reproducible Monte Carlo harness that
//! checks them at finite `N`.
//!
//! Layout:
//! - [`ensemble`]: entry laws, Wigner sampling, truncation, `M₃` quadratic forms
//! - [`deformation`]: spike specifications, eigenvector frames, Steinitz rearrangement
//! - [`spectral`]: dense Hermitian eigensolver, resolvent forms, the `Ξ` matrix
//! - [`theory`]: semicircle quantities and all limit-law predictors
//! - [`stats`]: mergeable summaries and the one-sample KS test
//! - [`experiments`]: named Monte Carlo experiments and their reports
//! - [`cli`]: the command-line front end

pub mod cli;
pub mod deformation;
pub mod ensemble;
mod error;
pub mod experiments;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
pub use num_complex::Complex64;

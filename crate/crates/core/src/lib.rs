//! Criticality eigenvalue solver for one-group neutron diffusion with
//! projection-based reduced-order models.
//!
//! The crate provides:
//!
//! - [`core_model`]: materials, control-rod homogenisation and case geometry;
//! - [`numerics`]: dense kernels (Gauss-Seidel, Gaussian elimination, Jacobi
//!   eigensolver, method of snapshots);
//! - [`hfm`]: control-volume assembly of `Aφ = λBφ` and the power method;
//! - [`pod_rom`]: POD-Galerkin reduced-order model;
//! - [`autoencoder`]: a dense ELU autoencoder trained with Nadam;
//! - [`rom_nonlinear`]: the autoencoder-based projection ROM, including the
//!   hybrid SVD-autoencoder map;
//! - [`harness`]: sampling, error measures, experiment recipes and output files.

pub mod autoencoder;
pub mod core_model;
pub mod error;
pub mod harness;
pub mod hfm;
pub mod numerics;
pub mod parallel;
pub mod pod_rom;
pub mod rom_nonlinear;

pub use error::{Error, Result};

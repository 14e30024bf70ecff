//! Quadrature error estimation for nearly singular integrals.
//!
//! The crate builds Gauss-Legendre and trapezoidal rules, evaluates the
//! remainder functions whose residues predict their errors, turns those
//! predictions into closed-form estimates, and checks them against working
//! quadrature-by-expansion (QBX) evaluators in two and three dimensions.
//!
//! Module map:
//! - [`quadrature`]: rules, rule cache, panelized curves.
//! - [`specfun`]: Legendre, spherical harmonics, Bessel, gamma family.
//! - [`kernels`]: model kernels and layer-potential kernels.
//! - [`remainder`]: remainder functions and residue predictions.
//! - [`estimates`]: closed-form error estimates.
//! - [`qbx`]: QBX expansions for Laplace (2D, 3D) and Helmholtz (2D).
//! - [`harness`]: high-precision oracle, measurement and sweeps.

pub mod error;
pub mod estimates;
pub mod harness;
pub mod kernels;
pub mod qbx;
pub mod quadrature;
pub mod remainder;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;

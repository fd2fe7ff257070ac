//! Numerics for the Fock space of quasi-periodic entire functions on the
//! flat cylinder `C/Z`, represented by the strip `[0,1) x R`.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`] holds log-polar complex values, adaptive quadrature, a
//!   dense Hermitian Jacobi eigensolver and the seeded random stream.
//! * [`theta`] evaluates Jacobi theta functions with a certified tail.
//! * [`fock`] implements the space itself: basis functions, reproducing
//!   kernels, the Bargmann transform, Weyl operators and strip norms.
//! * [`pointset`] builds point sets on the strip and measures separation and
//!   Beurling densities.
//! * [`gabor`] assembles theta-Gabor frame operators and Gram matrices.
//! * [`interp`] evaluates the Weierstrass-type product `G`, the explicit
//!   interpolation series and the sampling reconstruction series.

pub mod error;
pub mod fock;
pub mod gabor;
pub mod interp;
pub mod numerics;
pub mod pointset;
pub mod theta;

pub use error::{Error, Result};
pub use fock::{CylinderFunction, FockParams, StripPoint};
pub use numerics::logc::LogComplex;
pub use pointset::PointSet;

pub use num_complex::Complex64;

/// Library version, as recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

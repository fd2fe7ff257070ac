//! Foundational numerics shared by every other module.

pub mod eig;
pub mod logc;
pub mod quad;
pub mod rng;

pub use eig::{hermitian_eigh, hermitian_eigs, Eigen, HermitianMatrix};
pub use logc::{LogComplex, LogSum};
pub use quad::{QuadResult, QuadratureSpec};
pub use rng::RngStream;

//! Exact and floating-point tools for the operator graph L(theta): the matrix
//! algebra it generates, the deformation algebra A_theta, the decomposition
//! of its four-dimensional representation, and quantum-channel identities.

pub mod algebra;
pub mod channels;
pub mod error;
pub mod fp_algebra;
pub mod graph;
pub mod linalg;
pub mod rep;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{CMatrix, Subspace};
pub use scalar::{AnyTheta, Backend, GaussianRational, Scalar, Theta};

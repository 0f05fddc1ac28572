//! Numerical laboratory for the Hessian quotient operator σ₂/σ₁.
//!
//! * [`symfun`]: elementary symmetric functions, Gårding cones and the
//!   eigenvalue shift reducing σ₂/σ₁ = q to σ₂ = n q²/(2(n−1)).
//! * [`spectral`]: the same operators on symmetric matrices, Jacobi
//!   eigen-decomposition and the inverse-Hessian duality.
//! * [`transform`]: the quadratic subtraction, Hessian shift and discrete
//!   Legendre transform acting on grid functions.
//! * [`pde`]: damped Newton finite-difference solver on cubes.
//! * [`analysis`]: rigidity fits, the semi-convexity condition and the
//!   interior-estimate experiment.
//! * [`suites`]: sampled property checks shared by the tests and the CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod grid;
pub mod pde;
pub mod plot;
pub mod rng;
pub mod spectral;
pub mod suites;
pub mod symfun;
pub mod transform;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use spectral::SymMatrix;
pub use symfun::Spectrum;
pub use transform::QuadraticForm;

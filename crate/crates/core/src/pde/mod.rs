//! Finite-difference Dirichlet solver for σ₂/σ₁(D²u) = f and σ₂(D²v) = f on
//! cubes.

pub mod linear;
pub mod newton;
pub mod problem;
pub mod residual;
pub(crate) mod stencil;

pub use linear::{BandedLu, CsrMatrix};
pub use newton::{newton_solve, newton_solve_with, HessianStats, SolveReport};
pub use problem::{harmonic_extension, BoundaryData, Operator, ProblemSpec, SolverOptions};
pub use residual::{linearize, residual, LinearizedOperator};
pub use stencil::discrete_hessian;

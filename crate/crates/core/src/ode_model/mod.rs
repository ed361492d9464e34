//! Initial value problems, state vectors, the uniform mesh and the built-in
//! problem catalog.
//!
//! All error measurements use the max norm.

mod catalog;
mod mesh;
mod problem;
mod state;

pub use catalog::{builtin_problem, CATALOG};
pub use mesh::Mesh;
pub use problem::{ExactSolution, OdeProblem, RhsFn};
pub use state::{grid_sup_error, sup_norm, StateVec};

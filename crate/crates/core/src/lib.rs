//! Parareal time-parallel integration for initial value problems.
//!
//! The crate provides the building blocks of the parareal iteration
//! (forward/backward Euler coarse propagators, an m-substep classical RK4
//! fine propagator, the iteration itself with a pluggable executor for the
//! parallel defect sweep) together with the machinery needed to check the
//! a-priori convergence bounds numerically: majorant recursions, their
//! closed forms, the final error bounds, and empirical checks of each
//! hypothesis (Lipschitz-type conditions, defect order, leading defect
//! coefficient).
//!
//! The crate is `no_std` and only needs `alloc`. Threaded execution of the
//! defect sweep, file formats and the command line live in `parareal-cli`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod bounds;
mod error;
pub mod integrators;
pub mod ode_model;
pub mod parareal;

pub use error::{Error, Result};

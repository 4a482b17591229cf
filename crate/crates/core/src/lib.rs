//! Numerical tools for symmetric vector Allen–Cahn systems: reflection groups,
//! multi-well potentials, 1D heteroclinic connections, gradient-flow field
//! solvers, stress-energy diagnostics and polygonal minimal partitions.

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod field_solver;
pub mod groups;
pub mod linalg;
pub mod partitions;
pub mod ode_connect;
pub mod potentials;

pub use error::{Error, Result};

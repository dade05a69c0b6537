//! Lattice decoding toolkit.
//!
//! The closest-vector problem is reduced to the fundamental parallelotope
//! `P(B)`, where the decision for each coordinate is a Boolean function of
//! hyperplane tests (the hyperplane logical decoder, HLD). For the root
//! lattices `A_n`, `D_n` and `E_n` the decision boundary can be folded by
//! reflections onto a handful of pieces.
//!
//! Vectors are row vectors throughout: a lattice point is `x = z·G`.

pub mod complexity;
pub mod cvp;
mod error;
pub mod folding;
pub mod hld;
pub mod lattice;
mod linalg;
pub mod sim;
pub mod vr;

pub use error::{Error, Result};
pub use lattice::{GeneratorMatrix, LatticeFamily};

/// Global comparison tolerance.
pub const EPS: f64 = 1e-9;

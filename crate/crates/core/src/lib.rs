//! Finite element laboratory for Liouville-type equations.

pub mod comparison;
pub mod error;
pub mod field;
pub mod geometry;
pub mod problems;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};

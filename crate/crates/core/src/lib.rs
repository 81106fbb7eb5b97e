//! Solver and numerical verifier for the figure-eight solution of the
//! equal-mass planar three-body problem.

pub mod action;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod loop_space;
pub mod refiner;
pub mod verifier;

pub use error::{Error, Result};

//! Fluid-mode spectral analysis of linear kinetic equations with heavy-tailed
//! equilibria, their (fractional) diffusion limits, and desk-scale simulation of
//! the rescaled kinetic equation against the limiting fractional heat equation.

pub mod cli;
pub mod config;
pub mod equilibria;
pub mod error;
pub mod extrap;
pub mod fluid_mode;
pub mod kinetic_solver;
pub mod linalg;
pub mod macro_solver;
pub mod operators;
pub mod quad;
pub mod special;
pub mod theory;

pub use error::{KinlimError, Result};

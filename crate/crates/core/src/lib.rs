//! Bounds-preserving collocation Runge–Kutta time stepping with Bernstein
//! polynomials in time, on top of a small 1D finite element toolkit.

pub mod error;
pub mod experiments;
pub mod fem1d;
pub mod linalg;
pub mod polybasis;
pub mod problems;
pub mod quadrature;
pub mod stage_system;
pub mod tableau;
pub mod vi_solver;

pub use error::{Error, Result};

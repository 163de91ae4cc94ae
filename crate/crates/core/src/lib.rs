//! Discrete variational mechanics and optimal control on matrix Lie groups.
//!
//! The crate is organized bottom-up:
//!
//! - [`lie`]: SO(3), SE(3), vector spaces and general quadratic groups.
//! - [`retraction`]: the Cayley map and truncated exponentials with their
//!   right-trivialized tangents.
//! - [`mechanics`]: discrete Lagrangians, Euler–Lagrange and Euler–Poincaré
//!   residuals of first and second order, momentum maps.
//! - [`control`]: the rigid-body and Cosserat-rod optimal control problems
//!   and a damped Newton solver.
//! - [`validation`]: finite-difference oracles and convergence estimates.
//! - [`cli`]: the `lievar` command-line front end.

pub mod cli;
pub mod control;
pub mod error;
pub mod lie;
pub mod mechanics;
pub mod retraction;
pub mod validation;

pub use error::{Error, Result};
pub use lie::{AlgebraVector, CoVector, Group, GroupElement};
pub use retraction::{Retraction, RetractionKind};

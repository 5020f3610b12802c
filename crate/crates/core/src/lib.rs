//! Conserved functionals, commuting flows and Lax machinery of the cubic
//! nonlinear Schrödinger hierarchy, with finite-particle density-matrix
//! checks.

pub mod diffpoly;
pub mod error;
pub mod flows;
pub mod gp;
pub mod grid;
pub mod hierarchy;
pub mod kappa;
pub mod lax;
pub mod poisson;

pub use diffpoly::{Class, DiffPoly, MonomialKey};
pub use error::{Error, Result};
pub use grid::{omega_l2, GridFunction, PeriodicGrid, StateFile};
pub use hierarchy::HierarchyTable;
pub use kappa::Kappa;

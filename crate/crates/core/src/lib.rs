//! Exact verification engine for invariants of almost geodesic mappings of
//! the third type on non-symmetric affine connection spaces.
//!
//! Everything is computed over a single polynomial coordinate chart with
//! arbitrary-precision rational coefficients, so each claimed invariance
//! identity becomes a decidable equality: either the two sides agree
//! coefficient by coefficient or a concrete witness is produced.
//!
//! Layering:
//! * [`rational`] / [`poly`] / [`grid`] - exact scalar, polynomial and dense
//!   tensor-grid arithmetic;
//! * [`connection`] - non-symmetric affine connections, the five covariant
//!   derivatives, curvature and Ricci objects and their families;
//! * [`mapping`] - general deformations and equitorsion third-type almost
//!   geodesic scenarios of both subtypes, with derived inverse-side data;
//! * [`invariants`] - every Thomas/Weyl-type invariant as an executable
//!   formula over a scenario side;
//! * [`verify`] - deterministic scenario generation, identity suites,
//!   independent oracles and structured reports.

// index loops couple several parallel grids at once; iterator rewrites of
// those kernels read worse than the index form
#![allow(clippy::needless_range_loop)]

pub mod connection;
pub mod error;
pub mod grid;
pub mod invariants;
pub mod mapping;
pub mod poly;
pub mod rational;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{TensorGrid, Variance};
pub use poly::PolyField;
pub use rational::Rational;

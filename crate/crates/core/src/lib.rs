//! Numerical laboratory for the singular obstacle problem
//! `-Δu = log u · χ{u > 0}`.
//!
//! The crate solves the problem by projected relaxation on uniform grids,
//! extracts the free boundary, and evaluates the Weiss-type energy
//! together with its monotonicity decomposition and blow-up diagnostics.
//! A high-accuracy one-dimensional shooting solution serves as ground truth.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod error;
pub mod fields;
pub mod freeboundary;
pub mod oracle1d;
pub mod plot;
pub mod problems;
pub mod scaling;
pub mod solver;
pub mod stats;
pub mod weiss;

pub use error::{Error, Result};
pub use fields::{DiffField, Grid, InterpOrder, Point, Profile, QuadratureConfig, ScalarField};
pub use scaling::ForcingMode;

//! Edge counts of random geometric graphs on Poisson input in high dimension.
//!
//! Two points of a Poisson process `η` on `R^d` are joined when they are
//! within distance `δ` of each other and their midpoint lies in the closed
//! unit ball. The crate computes the exact mean and variance of the number of
//! such edges, the normal-approximation error bounds that follow from the
//! second-order Poincaré inequality, and simulates the statistic so those
//! quantities can be checked empirically.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod clt_bounds;
pub mod diagnostics;
pub mod edge_count;
pub mod error;
pub mod exec;
pub mod model;
pub mod moments;
pub mod numerics;
pub mod point_process;
pub mod simulate;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::ModelParams;
pub use numerics::LogValue;

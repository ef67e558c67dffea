//! Stochastic gradient methods, adversarial lower-bound instances and
//! closed-form convergence bounds, with tools to check one against the other
//! by simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod instances;
pub mod noise;
pub mod optimizers;
pub mod piecewise;
pub mod problem;
pub mod theory;
pub mod vecops;

pub use error::{Error, Result};
pub use noise::{NoiseOracle, NoiseSpec, RngStream};
pub use optimizers::{OptimizerConfig, OptimizerState};
pub use piecewise::{Piece, PiecewiseQuadratic};
pub use problem::{ProblemInstance, Trajectory, TrajectoryRecord};

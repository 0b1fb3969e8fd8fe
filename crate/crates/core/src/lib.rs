//! Distributed optimization over time-varying directed graphs.
//!
//! Agents hold private smooth strongly convex objectives and communicate over
//! a sequence of directed graphs whose unions over bounded windows are
//! strongly connected. The main method combines row-stochastic mixing of the
//! decision variables with column-stochastic gradient tracking and converges
//! linearly to the global minimizer for small enough constant steps.
//!
//! The crate is organized as:
//! - [`graphs`]: directed graphs and deterministic time-varying sequences;
//! - [`weights`]: row- and column-stochastic mixing matrices from degrees;
//! - [`objectives`]: local objectives, problem generators, centralized solves;
//! - [`optimizer`]: the tracked-gradient method plus push-style baselines;
//! - [`theory`]: absolute probability sequences, contraction constants, the
//!   perturbed comparison system, and numeric checks of its inequalities;
//! - [`harness`]: experiment configs, presets, batch runner, rate fitting.

pub mod error;
pub mod graphs;
pub mod harness;
pub mod linalg;
pub mod objectives;
pub mod optimizer;
pub mod theory;
pub mod weights;

pub use error::{Error, Result};
pub use graphs::{check_c_bounded, make_clustered, Digraph, GraphSequence};
pub use objectives::{
    make_least_squares_problem, make_line_fit_problem, make_logistic_problem, solve_centralized,
    Problem,
};
pub use optimizer::{residual, run, Method, RunTrace};
pub use theory::{ContractionConstants, PerturbationSystem};
pub use weights::{uniform_weights, validate_weights, WeightPair};

//! Incremental quasi-subgradient methods for minimizing a sum of quasi-convex
//! component functions over a closed convex set.
//!
//! The crate is organised bottom-up:
//!
//! - [`problem`] holds component functions, sum problems and their oracles
//! - [`projection`] holds Euclidean projections onto the feasible sets
//! - [`stepsize`] holds constant, diminishing and dynamic stepsize rules
//! - [`solvers`] holds the deterministic and randomized incremental methods, the
//!   classical cyclic method, and the subgradient projection baseline
//! - [`problems`] holds generators (analytic counterexamples, feasibility systems,
//!   Cobb-Douglas sum-of-ratios instances)
//! - [`experiment`] holds the configuration-driven multi-trial runner with CSV/JSON output

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod linalg;
pub mod problem;
pub mod problems;
pub mod projection;
pub mod rng;
pub mod solvers;
pub mod stepsize;

pub use error::{Error, Result};
pub use linalg::Point;
pub use problem::{evaluate_sum, is_at_component_optimum, l_max, ComponentFunction, HoelderParams, OptimumMeta, SumProblem};
pub use projection::{Halfspace, Polyhedron, Projector};
pub use solvers::{IterationRecord, Reorder, RunResult, RunStatus, StopCriteria};
pub use stepsize::{c_pm, next_stepsize, r_pm, Gamma, Schedule, Stepsize, StepsizeRule};

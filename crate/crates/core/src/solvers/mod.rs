//! Incremental quasi-subgradient methods and a shared run loop.

pub mod classical;
pub mod diagnostics;
pub mod incsgm;
pub mod randsgm;
pub mod sgpm;

use std::time::Instant;

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist, norm, Point};
use crate::problem::{evaluate_sum, SumProblem};

pub use classical::{classical_incremental_cycle, classical_run};
pub use diagnostics::{check_basic_inequality, check_descent_inequality, expected_basic_inequality_rhs};
pub use incsgm::{incsgm_cycle, incsgm_run, IncSgmOptions};
pub use randsgm::{randsgm_run, randsgm_step, RandStep};
pub use sgpm::sgpm_run;

/// Default absolute tolerance for "component at its optimum".
pub const DEFAULT_TOL_OPT: f64 = 1e-9;

/// Tolerance on `| ||g|| - 1 |` for oracle outputs.
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct StopCriteria {
    pub max_iterations: usize,
    /// Stop once `f(x_k) - f* <= target_gap`; ignored when `f*` is unknown.
    pub target_gap: Option<f64>,
    /// Stop once the best value has not improved for this many iterations.
    pub stall_window: Option<usize>,
}

impl StopCriteria {
    pub fn new(max_iterations: usize) -> Result<Self> {
        if max_iterations == 0 {
            return Err(Error::Configuration("max_iterations must be at least 1".into()));
        }
        Ok(StopCriteria {
            max_iterations,
            target_gap: Some(0.0),
            stall_window: None,
        })
    }

    pub fn with_target_gap(mut self, gap: Option<f64>) -> Result<Self> {
        if let Some(g) = gap {
            if !(g >= 0.0) {
                return Err(Error::Configuration(format!("target_gap must be nonnegative, got {g}")));
            }
        }
        self.target_gap = gap;
        Ok(self)
    }

    pub fn with_stall_window(mut self, window: Option<usize>) -> Result<Self> {
        if window == Some(0) {
            return Err(Error::Configuration("stall_window must be at least 1".into()));
        }
        self.stall_window = window;
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Point,
    pub f_value: f64,
    /// Stepsize of the step that produced `x` (zero at `k = 0`).
    pub stepsize_used: f64,
    /// Cumulative quasi-subgradient evaluations up to `x`.
    pub subgradient_evals: usize,
    pub dist_to_known_solution: Option<f64>,
    /// Component drawn by the randomized method for the step producing `x`.
    pub active_index: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    TargetReached,
    MaxIterations,
    Stalled,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::TargetReached => "target_reached",
            RunStatus::MaxIterations => "max_iterations",
            RunStatus::Stalled => "stalled",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub trajectory: Vec<IterationRecord>,
    pub best_value: f64,
    pub best_point: Point,
    pub status: RunStatus,
    pub seed: Option<u64>,
    /// Seconds spent inside the run loop.
    pub wall_time: f64,
    pub iterations: usize,
    pub subgradient_evals: usize,
}

impl RunResult {
    pub fn final_point(&self) -> &Point {
        &self.trajectory.last().expect("trajectory holds x_0").x
    }

    pub fn f_values(&self) -> Vec<f64> {
        self.trajectory.iter().map(|r| r.f_value).collect()
    }

    /// Wall time divided by the number of iterations (zero if none ran).
    pub fn time_per_iteration(&self) -> f64 {
        if self.iterations == 0 {
            0.0
        } else {
            self.wall_time / self.iterations as f64
        }
    }
}

/// Component order within a cycle of the deterministic method.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reorder {
    #[default]
    Fixed,
    /// A fresh uniformly random permutation per cycle.
    Shuffle,
    /// Cycle `k` starts at component `k mod m`.
    Shift,
}

/// What one iteration of a method did.
pub(crate) enum StepOutcome {
    Moved {
        x: Point,
        stepsize: f64,
        evals: usize,
        active_index: Option<usize>,
    },
    /// No component can make progress: every component sits at its optimum
    /// or a dynamic stepsize hit its target.
    Optimal,
}

/// Checks that an oracle output is a finite unit vector.
pub(crate) fn check_unit(g: ArrayView1<f64>, component: usize) -> Result<()> {
    let ng = norm(g);
    if !ng.is_finite() || (ng - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::ContractViolation {
            component,
            detail: format!("quasi-subgradient has norm {ng}, expected 1"),
        });
    }
    Ok(())
}

/// The common loop: projects `x0`, records every iterate and applies the
/// stopping rules before each step.
pub(crate) fn drive<F>(problem: &SumProblem, x0: ArrayView1<f64>, stop: &StopCriteria, seed: Option<u64>, mut step: F) -> Result<RunResult>
where
    F: FnMut(usize, &Point, f64) -> Result<StepOutcome>,
{
    problem.check_point(x0)?;
    let start = Instant::now();
    let known = problem.known_solution().cloned();
    let dist_known = |x: &Point| known.as_ref().map(|s| dist(x.view(), s.view()));

    let mut x = problem.projector().project(x0)?;
    let mut f = evaluate_sum(problem, x.view())?;
    let mut trajectory = vec![IterationRecord {
        k: 0,
        x: x.clone(),
        f_value: f,
        stepsize_used: 0.0,
        subgradient_evals: 0,
        dist_to_known_solution: dist_known(&x),
        active_index: None,
    }];
    let mut best_value = f;
    let mut best_point = x.clone();
    let mut since_improvement = 0usize;
    let mut evals = 0usize;
    let mut k = 0usize;

    let status = loop {
        if let (Some(f_star), Some(gap)) = (problem.optimal_value(), stop.target_gap) {
            if f - f_star <= gap {
                break RunStatus::TargetReached;
            }
        }
        if k >= stop.max_iterations {
            break RunStatus::MaxIterations;
        }
        if let Some(w) = stop.stall_window {
            if since_improvement >= w {
                break RunStatus::Stalled;
            }
        }
        match step(k, &x, f)? {
            StepOutcome::Optimal => break RunStatus::TargetReached,
            StepOutcome::Moved {
                x: next,
                stepsize,
                evals: used,
                active_index,
            } => {
                k += 1;
                evals += used;
                x = next;
                f = evaluate_sum(problem, x.view())?;
                if f < best_value {
                    best_value = f;
                    best_point.assign(&x);
                    since_improvement = 0;
                } else {
                    since_improvement += 1;
                }
                trajectory.push(IterationRecord {
                    k,
                    x: x.clone(),
                    f_value: f,
                    stepsize_used: stepsize,
                    subgradient_evals: evals,
                    dist_to_known_solution: dist_known(&x),
                    active_index,
                });
            }
        }
    };

    Ok(RunResult {
        trajectory,
        best_value,
        best_point,
        status,
        seed,
        wall_time: start.elapsed().as_secs_f64(),
        iterations: k,
        subgradient_evals: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_criteria_validation() {
        assert!(StopCriteria::new(0).is_err());
        assert!(StopCriteria::new(1).unwrap().with_target_gap(Some(-1.0)).is_err());
        assert!(StopCriteria::new(1).unwrap().with_stall_window(Some(0)).is_err());
    }

    #[test]
    fn unit_check_names_component() {
        let err = check_unit(ndarray::array![2.0].view(), 3).unwrap_err();
        assert!(matches!(err, Error::ContractViolation { component: 3, .. }));
        assert!(check_unit(ndarray::array![0.6, 0.8].view(), 0).is_ok());
    }
}

//! Randomized incremental method: one projected step per iteration along a
//! component drawn uniformly among those not yet at their optimum.

use ndarray::ArrayView1;
use rand::Rng;

use super::{check_unit, drive, RunResult, StepOutcome, StopCriteria};
use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::problem::{is_at_component_optimum, SumProblem};
use crate::rng::{rng_from_seed, SolverRng};
use crate::stepsize::{next_stepsize, StepsizeRule};

#[derive(Clone, Debug, PartialEq)]
pub enum RandStep {
    Step { point: Point, omega: usize },
    /// Every component is at its optimum; no step taken.
    AlreadyOptimal,
}

/// Indices of components strictly above `f_i* + tol_opt` at `x`.
pub fn active_set(problem: &SumProblem, x: ArrayView1<f64>, tol_opt: f64) -> Vec<usize> {
    (0..problem.m())
        .filter(|&i| !is_at_component_optimum(problem.component(i), x, tol_opt))
        .collect()
}

/// One step from `x_k`: draws `omega` uniformly from the active set and moves
/// to `P_X(x_k - v g_omega)`. A degenerate direction leaves `x_k` unchanged.
pub fn randsgm_step(problem: &SumProblem, x_k: ArrayView1<f64>, v: f64, tol_opt: f64, rng: &mut SolverRng) -> Result<RandStep> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("stepsize must be positive, got {v}")));
    }
    problem.check_point(x_k)?;
    let projector = problem.projector();
    let x = if projector.contains(x_k, projector.tolerance()) {
        x_k.to_owned()
    } else {
        projector.project(x_k)?
    };
    let active = active_set(problem, x.view(), tol_opt);
    if active.is_empty() {
        return Ok(RandStep::AlreadyOptimal);
    }
    let omega = active[rng.random_range(0..active.len())];
    let g = match problem.component(omega).unit_quasi_subgradient(x.view()) {
        Ok(g) => g,
        Err(Error::DegenerateDirection) => return Ok(RandStep::Step { point: x, omega }),
        Err(e) => return Err(e),
    };
    check_unit(g.view(), omega)?;
    let y = &x - &(g * v);
    Ok(RandStep::Step {
        point: projector.project(y.view())?,
        omega,
    })
}

/// Runs the randomized method with a ChaCha8 stream keyed by `seed`.
pub fn randsgm_run(problem: &SumProblem, x0: ArrayView1<f64>, rule: &StepsizeRule, stop: &StopCriteria, tol_opt: f64, seed: u64) -> Result<RunResult> {
    let rule = if rule.is_dynamic() {
        rule.resolved(problem.optimal_value())?
    } else {
        rule.clone()
    };
    let meta = problem.meta();
    let mut rng = rng_from_seed(seed);
    drive(problem, x0, stop, Some(seed), |k, x, f| {
        let step = next_stepsize(&rule, k, f, &meta)?;
        if step.target_reached {
            return Ok(StepOutcome::Optimal);
        }
        Ok(match randsgm_step(problem, x.view(), step.value, tol_opt, &mut rng)? {
            RandStep::AlreadyOptimal => StepOutcome::Optimal,
            RandStep::Step { point, omega } => StepOutcome::Moved {
                x: point,
                stepsize: step.value,
                evals: 1,
                active_index: Some(omega),
            },
        })
    })
}

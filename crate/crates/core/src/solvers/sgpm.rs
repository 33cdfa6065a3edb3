//! Subgradient projection baseline for feasibility problems: cyclic control
//! with the per-component dynamic step `gamma_k (f_i(x_k) / L_i)^(1/p)`.

use ndarray::ArrayView1;

use super::{check_unit, drive, RunResult, StepOutcome, StopCriteria};
use crate::error::{Error, Result};
use crate::problem::SumProblem;
use crate::stepsize::Gamma;

/// Requires every component to have optimal value zero.
pub fn sgpm_run(problem: &SumProblem, x0: ArrayView1<f64>, gamma: &Gamma, stop: &StopCriteria, tol_opt: f64) -> Result<RunResult> {
    if let Some(i) = problem.components().iter().position(|c| c.optimal_value() != 0.0) {
        return Err(Error::Configuration(format!(
            "component {i} is not of feasibility type (optimal value must be 0)"
        )));
    }
    let m = problem.m();
    let projector = problem.projector();
    drive(problem, x0, stop, None, |k, x, _f| {
        if problem.components().iter().all(|c| c.value(x.view()) <= tol_opt) {
            return Ok(StepOutcome::Optimal);
        }
        let i = k % m;
        let c = problem.component(i);
        let fi = c.value(x.view());
        if fi <= tol_opt {
            return Ok(StepOutcome::Moved {
                x: x.clone(),
                stepsize: 0.0,
                evals: 0,
                active_index: Some(i),
            });
        }
        let h = c.hoelder();
        let v = gamma.at(k)? * (fi / h.l).powf(1.0 / h.p);
        let g = match c.unit_quasi_subgradient(x.view()) {
            Ok(g) => g,
            Err(Error::DegenerateDirection) => {
                return Ok(StepOutcome::Moved {
                    x: x.clone(),
                    stepsize: 0.0,
                    evals: 1,
                    active_index: Some(i),
                })
            }
            Err(e) => return Err(e),
        };
        check_unit(g.view(), i)?;
        let y = x - &(g * v);
        Ok(StepOutcome::Moved {
            x: projector.project(y.view())?,
            stepsize: v,
            evals: 1,
            active_index: Some(i),
        })
    })
}

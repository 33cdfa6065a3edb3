//! The classical incremental cycle without a skip branch. Every component
//! steps in every cycle, along whatever cone element a caller-supplied
//! selector returns, including at points where the component is optimal.

use ndarray::ArrayView1;

use super::{drive, RunResult, StepOutcome, StopCriteria};
use crate::error::{Error, Result};
use crate::linalg::{norm, Point};
use crate::problem::SumProblem;
use crate::stepsize::{next_stepsize, StepsizeRule};

/// Probes along `+g`: a cone element never points into the strict sublevel set.
fn spot_check(problem: &SumProblem, i: usize, z: ArrayView1<f64>, g: ArrayView1<f64>) -> Result<()> {
    if !g.iter().all(|v| v.is_finite()) {
        return Err(Error::ContractViolation {
            component: i,
            detail: "selector returned a non-finite vector".into(),
        });
    }
    if norm(g) == 0.0 {
        return Ok(());
    }
    let c = problem.component(i);
    let fz = c.value(z);
    for t in [1e-6, 1e-3, 1.0] {
        let y = &z + &(&g * t);
        if c.value(y.view()) < fz - 1e-12 * (1.0 + fz.abs()) {
            return Err(Error::ContractViolation {
                component: i,
                detail: format!("selected vector points into the strict sublevel set (probe t = {t})"),
            });
        }
    }
    Ok(())
}

/// One unconditional cycle `z_i = P_X(z_{i-1} - v g_i)`, `g_i = selector(i, z_{i-1})`.
pub fn classical_incremental_cycle<S>(problem: &SumProblem, x_k: ArrayView1<f64>, v: f64, selector: &S) -> Result<Point>
where
    S: Fn(usize, ArrayView1<f64>) -> Result<Point>,
{
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("stepsize must be positive, got {v}")));
    }
    problem.check_point(x_k)?;
    let projector = problem.projector();
    let mut z = if projector.contains(x_k, projector.tolerance()) {
        x_k.to_owned()
    } else {
        projector.project(x_k)?
    };
    for i in 0..problem.m() {
        let g = selector(i, z.view())?;
        if g.len() != z.len() {
            return Err(Error::ContractViolation {
                component: i,
                detail: format!("selector returned dimension {}", g.len()),
            });
        }
        spot_check(problem, i, z.view(), g.view())?;
        z.scaled_add(-v, &g);
        z = projector.project(z.view())?;
    }
    Ok(z)
}

/// Repeats [`classical_incremental_cycle`] under `rule`; each cycle costs `m`
/// evaluations.
pub fn classical_run<S>(problem: &SumProblem, x0: ArrayView1<f64>, rule: &StepsizeRule, stop: &StopCriteria, selector: &S) -> Result<RunResult>
where
    S: Fn(usize, ArrayView1<f64>) -> Result<Point>,
{
    let rule = if rule.is_dynamic() {
        rule.resolved(problem.optimal_value())?
    } else {
        rule.clone()
    };
    let meta = problem.meta();
    let m = problem.m();
    drive(problem, x0, stop, None, |k, x, f| {
        let step = next_stepsize(&rule, k, f, &meta)?;
        if step.target_reached {
            return Ok(StepOutcome::Optimal);
        }
        Ok(StepOutcome::Moved {
            x: classical_incremental_cycle(problem, x.view(), step.value, selector)?,
            stepsize: step.value,
            evals: m,
            active_index: None,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::examples::{example3_adversarial_selector, example3_zero_selector};
    use crate::problems::make_example3;
    use ndarray::array;

    #[test]
    fn adversarial_selector_freezes_the_iterate() {
        let p = make_example3();
        for (x0, v) in [(5.0, 1.0), (2.0, 0.5), (10.0, 3.0)] {
            let x = classical_incremental_cycle(&p, array![x0].view(), v, &example3_adversarial_selector).unwrap();
            assert_eq!(x, array![x0]);
        }
    }

    #[test]
    fn zero_selector_descends() {
        let x = classical_incremental_cycle(&make_example3(), array![5.0].view(), 1.0, &example3_zero_selector).unwrap();
        assert_eq!(x, array![4.0]);
    }

    #[test]
    fn zero_selector_at_optimum_is_fixed() {
        let p = make_example3();
        let zero = |_i: usize, _x: ArrayView1<f64>| Ok(array![0.0]);
        let x = classical_incremental_cycle(&p, array![0.0].view(), 0.3, &zero).unwrap();
        assert_eq!(x, array![0.0]);
    }

    #[test]
    fn wrong_direction_is_caught() {
        // -1 for f1 = max{x, 0} at x = 5 points into {f1 < 5}.
        let bad = |_i: usize, _x: ArrayView1<f64>| Ok(array![-1.0]);
        let err = classical_incremental_cycle(&make_example3(), array![5.0].view(), 1.0, &bad).unwrap_err();
        assert!(matches!(err, Error::ContractViolation { component: 0, .. }));
    }

    #[test]
    fn adversarial_run_never_moves() {
        let rule = StepsizeRule::constant(1.0).unwrap();
        let run = classical_run(&make_example3(), array![5.0].view(), &rule, &StopCriteria::new(100).unwrap(), &example3_adversarial_selector).unwrap();
        assert_eq!(run.iterations, 100);
        assert!(run.trajectory.iter().all(|r| r.x == array![5.0]));
    }
}

//! Deterministic incremental method: one pass over the components per
//! iteration, skipping those already at their optimal value.

use ndarray::ArrayView1;
use rand::seq::SliceRandom;

use super::{check_unit, drive, Reorder, RunResult, StepOutcome, StopCriteria, DEFAULT_TOL_OPT};
use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::problem::{is_at_component_optimum, SumProblem};
use crate::rng::rng_from_seed;
use crate::stepsize::{next_stepsize, StepsizeRule};

#[derive(Clone, Debug, PartialEq)]
pub struct IncSgmOptions {
    pub tol_opt: f64,
    pub reorder: Reorder,
    /// Seed of the permutation stream used by [`Reorder::Shuffle`].
    pub seed: Option<u64>,
}

impl Default for IncSgmOptions {
    fn default() -> Self {
        IncSgmOptions {
            tol_opt: DEFAULT_TOL_OPT,
            reorder: Reorder::Fixed,
            seed: None,
        }
    }
}

pub(crate) struct CycleOutcome {
    pub point: Point,
    pub evals: usize,
    pub moves: usize,
}

pub(crate) fn cycle_in_order(problem: &SumProblem, x: ArrayView1<f64>, v: f64, tol_opt: f64, order: &[usize]) -> Result<CycleOutcome> {
    let projector = problem.projector();
    let mut z = if projector.contains(x, projector.tolerance()) {
        x.to_owned()
    } else {
        projector.project(x)?
    };
    let mut evals = 0;
    let mut moves = 0;
    for &i in order {
        let c = problem.component(i);
        if is_at_component_optimum(c, z.view(), tol_opt) {
            continue;
        }
        evals += 1;
        let g = match c.unit_quasi_subgradient(z.view()) {
            Ok(g) => g,
            Err(Error::DegenerateDirection) => continue,
            Err(e) => return Err(e),
        };
        check_unit(g.view(), i)?;
        z.scaled_add(-v, &g);
        z = projector.project(z.view())?;
        moves += 1;
    }
    Ok(CycleOutcome { point: z, evals, moves })
}

/// One cycle from `x_k` with stepsize `v` in component order. Returns the
/// new iterate and the number of quasi-subgradient evaluations.
pub fn incsgm_cycle(problem: &SumProblem, x_k: ArrayView1<f64>, v: f64, tol_opt: f64) -> Result<(Point, usize)> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("stepsize must be positive, got {v}")));
    }
    problem.check_point(x_k)?;
    let order: Vec<usize> = (0..problem.m()).collect();
    let out = cycle_in_order(problem, x_k, v, tol_opt, &order)?;
    Ok((out.point, out.evals))
}

/// Runs the deterministic method until `stop` fires. A cycle in which no
/// component moves ends the run as optimal.
pub fn incsgm_run(problem: &SumProblem, x0: ArrayView1<f64>, rule: &StepsizeRule, stop: &StopCriteria, opts: &IncSgmOptions) -> Result<RunResult> {
    let rule = if rule.is_dynamic() {
        rule.resolved(problem.optimal_value())?
    } else {
        rule.clone()
    };
    let meta = problem.meta();
    let m = problem.m();
    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = rng_from_seed(opts.seed.unwrap_or(0));
    let seed = match opts.reorder {
        Reorder::Shuffle => Some(opts.seed.unwrap_or(0)),
        _ => opts.seed,
    };
    drive(problem, x0, stop, seed, |k, x, f| {
        let step = next_stepsize(&rule, k, f, &meta)?;
        if step.target_reached {
            return Ok(StepOutcome::Optimal);
        }
        match opts.reorder {
            Reorder::Fixed => {}
            Reorder::Shuffle => order.shuffle(&mut rng),
            Reorder::Shift => {
                for (j, o) in order.iter_mut().enumerate() {
                    *o = (j + k) % m;
                }
            }
        }
        let out = cycle_in_order(problem, x.view(), step.value, opts.tol_opt, &order)?;
        if out.moves == 0 {
            return Ok(StepOutcome::Optimal);
        }
        Ok(StepOutcome::Moved {
            x: out.point,
            stepsize: step.value,
            evals: out.evals,
            active_index: None,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;
    use crate::problems::feasibility::{random_halfspace_system, RandomSystemSpec};
    use crate::problems::{make_example3, make_example4};
    use crate::solvers::RunStatus;
    use crate::stepsize::{Gamma, Schedule};
    use ndarray::array;

    #[test]
    fn example3_cycle_steps_once() {
        let (x, evals) = incsgm_cycle(&make_example3(), array![5.0].view(), 1.0, 1e-9).unwrap();
        assert_eq!(x, array![4.0]);
        assert_eq!(evals, 1);
    }

    #[test]
    fn example4_cycle_returns_to_origin() {
        for v in [0.1, 0.2, 1.0, 3.0] {
            let (x, evals) = incsgm_cycle(&make_example4(), array![0.0].view(), v, 1e-9).unwrap();
            assert_eq!(x, array![0.0]);
            assert_eq!(evals, 2);
        }
    }

    #[test]
    fn optimal_point_is_fixed() {
        let (x, evals) = incsgm_cycle(&make_example3(), array![0.0].view(), 0.7, 1e-9).unwrap();
        assert_eq!(x, array![0.0]);
        assert_eq!(evals, 0);
    }

    #[test]
    fn example3_trajectory() {
        let stop = StopCriteria::new(100).unwrap();
        let rule = StepsizeRule::constant(1.0).unwrap();
        let run = incsgm_run(&make_example3(), array![5.0].view(), &rule, &stop, &IncSgmOptions::default()).unwrap();
        assert_eq!(run.f_values(), vec![5.0, 4.0, 3.0, 2.0, 1.0, 0.0]);
        assert_eq!(run.status, RunStatus::TargetReached);
        assert_eq!(run.subgradient_evals, 5);
    }

    #[test]
    fn example4_never_improves_under_diminishing_steps() {
        let stop = StopCriteria::new(300).unwrap();
        let rule = StepsizeRule::diminishing(Schedule::standard(3.0).unwrap());
        let run = incsgm_run(&make_example4(), array![0.0].view(), &rule, &stop, &IncSgmOptions::default()).unwrap();
        assert_eq!(run.best_value, 4.0);
        assert_eq!(run.iterations, 300);
        assert_eq!(run.status, RunStatus::MaxIterations);
    }

    #[test]
    fn optimal_start_stops_immediately() {
        let sys = random_halfspace_system(&RandomSystemSpec::new(3, 4), 1).unwrap();
        let stop = StopCriteria::new(10).unwrap();
        let rule = StepsizeRule::constant(0.5).unwrap();
        let run = incsgm_run(&sys.problem, sys.reference_solution.view(), &rule, &stop, &IncSgmOptions::default()).unwrap();
        assert_eq!(run.status, RunStatus::TargetReached);
        assert_eq!(run.iterations, 0);
        assert_eq!(run.trajectory.len(), 1);
    }

    #[test]
    fn dynamic_rule_needs_optimal_value() {
        let sys = random_halfspace_system(&RandomSystemSpec::new(2, 3), 4).unwrap();
        let problem = crate::problem::SumProblem::new(
            2,
            sys.problem.components().to_vec(),
            crate::projection::Projector::WholeSpace,
        )
        .unwrap();
        let rule = StepsizeRule::dynamic_i(Gamma::default(), None);
        let err = incsgm_run(&problem, array![9.0, 9.0].view(), &rule, &StopCriteria::new(5).unwrap(), &IncSgmOptions::default());
        assert!(matches!(err, Err(Error::Configuration(_))));
    }

    #[test]
    fn per_cycle_displacement_is_bounded() {
        let sys = random_halfspace_system(&RandomSystemSpec::new(5, 8), 2).unwrap();
        let rule = StepsizeRule::diminishing(Schedule::standard(2.0).unwrap());
        let run = incsgm_run(&sys.problem, Point::from_elem(5, 20.0).view(), &rule, &StopCriteria::new(200).unwrap(), &IncSgmOptions::default()).unwrap();
        for w in run.trajectory.windows(2) {
            let moved = dist(w[0].x.view(), w[1].x.view());
            assert!(moved <= 8.0 * w[1].stepsize_used + 1e-12);
            assert!(w[1].subgradient_evals - w[0].subgradient_evals <= 8);
        }
    }

    #[test]
    fn reorder_policies() {
        let sys = random_halfspace_system(&RandomSystemSpec::new(4, 6), 6).unwrap();
        let rule = StepsizeRule::constant(0.1).unwrap();
        let stop = StopCriteria::new(50).unwrap();
        let x0 = Point::from_elem(4, 5.0);
        let fixed = |seed| {
            let opts = IncSgmOptions { seed, ..Default::default() };
            incsgm_run(&sys.problem, x0.view(), &rule, &stop, &opts).unwrap().f_values()
        };
        assert_eq!(fixed(Some(1)), fixed(Some(2)));
        for reorder in [Reorder::Shuffle, Reorder::Shift] {
            let run = |seed| {
                let opts = IncSgmOptions {
                    reorder,
                    seed: Some(seed),
                    ..Default::default()
                };
                incsgm_run(&sys.problem, x0.view(), &rule, &stop, &opts).unwrap().f_values()
            };
            assert_eq!(run(3), run(3));
        }
    }

    #[test]
    fn non_unit_oracle_is_reported() {
        #[derive(Debug)]
        struct Bad;
        impl crate::problem::ComponentFunction for Bad {
            fn value(&self, x: ArrayView1<f64>) -> f64 {
                x[0].abs()
            }
            fn unit_quasi_subgradient(&self, _x: ArrayView1<f64>) -> Result<Point> {
                Ok(array![2.0])
            }
            fn optimal_value(&self) -> f64 {
                0.0
            }
            fn hoelder(&self) -> crate::problem::HoelderParams {
                crate::problem::HoelderParams { p: 1.0, l: 1.0 }
            }
        }
        let p = crate::problem::SumProblem::new(1, vec![std::sync::Arc::new(Bad)], crate::projection::Projector::WholeSpace).unwrap();
        let err = incsgm_cycle(&p, array![1.0].view(), 0.5, 1e-9).unwrap_err();
        assert!(matches!(err, Error::ContractViolation { component: 0, .. }));
    }
}

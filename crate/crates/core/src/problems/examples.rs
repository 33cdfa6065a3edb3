//! The two one-dimensional counterexamples.
//!
//! `make_example3` shows that the classical cyclic method can stall on a
//! problem where the incremental method with skipping converges;
//! `make_example4` shows that without a common minimizer the incremental
//! method itself can stall.

use std::sync::Arc;

use ndarray::{array, ArrayView1};

use crate::error::Result;
use crate::linalg::Point;
use crate::problem::SumProblem;
use crate::problems::feasibility::{FeasibilityComponent, LinearConstraint};
use crate::projection::Projector;

fn piece(a: f64, b: f64) -> Arc<FeasibilityComponent> {
    Arc::new(FeasibilityComponent::new(Arc::new(
        LinearConstraint::new(array![a], b).expect("nonzero normal"),
    )))
}

/// `f1 = max{x, 0}`, `f2 = max{-x, 0}` on the real line; `f = |x|`,
/// `f* = 0`, solution set `{0}`.
///
/// Canonical oracles: `+1` for `f1` and `-1` for `f2` everywhere, which is
/// also the adversarial selection that freezes the classical cyclic method.
pub fn make_example3() -> SumProblem {
    SumProblem::new(1, vec![piece(-1.0, 0.0), piece(1.0, 0.0)], Projector::WholeSpace)
        .and_then(|p| p.with_assumption1(true))
        .and_then(|p| p.with_known_solution(array![0.0]))
        .expect("example 3 is well formed")
}

/// `f1 = max{x + 2, 0}`, `f2 = max{-2x + 2, 0}`; `f* = 3` at `x = 1`, but the
/// component minimizers `(-inf, -2]` and `[1, inf)` do not intersect.
pub fn make_example4() -> SumProblem {
    SumProblem::new(1, vec![piece(-1.0, 2.0), piece(2.0, 2.0)], Projector::WholeSpace)
        .and_then(|p| p.with_assumption1(false))
        .and_then(|p| p.with_optimal_value(3.0))
        .and_then(|p| p.with_known_solution(array![1.0]))
        .expect("example 4 is well formed")
}

/// The selection used against the classical cyclic method on example 3:
/// `+1` for `f1` everywhere and `-1` for `f2` on `x >= 0`.
/// On `x < 0` the cone of `f2` is `(-inf, 0]` and `-1` is its unit element.
pub fn example3_adversarial_selector(i: usize, _x: ArrayView1<f64>) -> Result<Point> {
    Ok(if i == 0 { array![1.0] } else { array![-1.0] })
}

/// Same as [`example3_adversarial_selector`] but picks the zero element of
/// the cone of `f2` on `x >= 0`.
pub fn example3_zero_selector(i: usize, x: ArrayView1<f64>) -> Result<Point> {
    Ok(match i {
        0 => array![1.0],
        _ if x[0] >= 0.0 => array![0.0],
        _ => array![-1.0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{evaluate_sum, l_max};

    #[test]
    fn example3_metadata() {
        let p = make_example3();
        assert_eq!(evaluate_sum(&p, array![3.0].view()).unwrap(), 3.0);
        assert_eq!(p.optimal_value(), Some(0.0));
        assert_eq!(p.known_solution(), Some(&array![0.0]));
        assert!(p.assumption1_holds());
        assert_eq!(l_max(&p), 1.0);
        let g = p.component(1).unit_quasi_subgradient(array![-2.0].view()).unwrap();
        assert_eq!(g, array![-1.0]);
        let g = p.component(0).unit_quasi_subgradient(array![2.0].view()).unwrap();
        assert_eq!(g, array![1.0]);
    }

    #[test]
    fn example4_metadata() {
        let p = make_example4();
        assert_eq!(evaluate_sum(&p, array![0.0].view()).unwrap(), 4.0);
        assert_eq!(evaluate_sum(&p, array![1.0].view()).unwrap(), 3.0);
        assert!(!p.assumption1_holds());
        assert_eq!(p.optimal_value(), Some(3.0));
        assert_eq!(l_max(&p), 2.0);
    }

    #[test]
    fn example4_minimum_by_grid() {
        let p = make_example4();
        let (mut best, mut arg) = (f64::INFINITY, 0.0);
        for k in -40_000..=40_000 {
            let x = k as f64 * 1e-4;
            let v = evaluate_sum(&p, array![x].view()).unwrap();
            if v < best {
                best = v;
                arg = x;
            }
        }
        assert!((best - 3.0).abs() < 1e-12);
        assert!((arg - 1.0).abs() < 1e-12);
    }
}

//! Component functions, sum problems and the quasi-subgradient oracle
//! contract consumed by every solver.

use std::fmt;
use std::sync::Arc;

use ndarray::ArrayView1;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, Point};
use crate::projection::Projector;

/// Hölder condition of order `p` with modulus `l`:
/// `|h(y) - h(x)| <= l * ||y - x||^p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoelderParams {
    pub p: f64,
    pub l: f64,
}

impl HoelderParams {
    pub fn new(p: f64, l: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("Hölder order must be positive, got {p}")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidArgument(format!("Hölder modulus must be positive, got {l}")));
        }
        Ok(HoelderParams { p, l })
    }

    /// Order-1 (Lipschitz) condition with modulus `l`.
    pub fn lipschitz(l: f64) -> Result<Self> {
        Self::new(1.0, l)
    }
}

/// One quasi-convex component `f_i` of the sum.
///
/// Oracles must be pure functions of `x`. Where the quasi-subdifferential is
/// a whole cone (for instance at kinks of `max{h, 0}`), implementations commit
/// to one canonical unit element.
pub trait ComponentFunction: Send + Sync + fmt::Debug {
    fn value(&self, x: ArrayView1<f64>) -> f64;

    /// A unit-norm element of the quasi-subdifferential at `x`, i.e. a unit
    /// normal to the strict sublevel set `{y : f(y) < f(x)}`.
    fn unit_quasi_subgradient(&self, x: ArrayView1<f64>) -> Result<Point>;

    /// Minimum of the component over the feasible set.
    fn optimal_value(&self) -> f64;

    fn hoelder(&self) -> HoelderParams;
}

/// `L_max`, the common Hölder order and the number of components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimumMeta {
    pub p: f64,
    pub l_max: f64,
    pub m: usize,
}

/// Minimize `sum_i f_i(x)` over the set handled by `projector`.
#[derive(Clone)]
pub struct SumProblem {
    dim: usize,
    components: Vec<Arc<dyn ComponentFunction>>,
    projector: Projector,
    optimal_value: Option<f64>,
    known_solution: Option<Point>,
    assumption1_holds: bool,
}

impl fmt::Debug for SumProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SumProblem")
            .field("dim", &self.dim)
            .field("m", &self.components.len())
            .field("projector", &self.projector)
            .field("optimal_value", &self.optimal_value)
            .field("assumption1_holds", &self.assumption1_holds)
            .finish()
    }
}

const SUM_OPTIMUM_TOL: f64 = 1e-9;

impl SumProblem {
    /// Builds a problem over `R^dim`. All components must share the same
    /// Hölder order.
    pub fn new(dim: usize, components: Vec<Arc<dyn ComponentFunction>>, projector: Projector) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if components.is_empty() {
            return Err(Error::InvalidArgument("a sum problem needs at least one component".into()));
        }
        if let Some(pd) = projector.dim() {
            if pd != dim {
                return Err(Error::InvalidArgument(format!(
                    "projector dimension {pd} does not match problem dimension {dim}"
                )));
            }
        }
        let p0 = components[0].hoelder().p;
        for (i, c) in components.iter().enumerate() {
            let h = c.hoelder();
            HoelderParams::new(h.p, h.l)?;
            if (h.p - p0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "component {i} has Hölder order {} but component 0 has {p0}",
                    h.p
                )));
            }
            if !c.optimal_value().is_finite() {
                return Err(Error::InvalidArgument(format!("component {i} has a non-finite optimal value")));
            }
        }
        Ok(SumProblem {
            dim,
            components,
            projector,
            optimal_value: None,
            known_solution: None,
            assumption1_holds: false,
        })
    }

    /// Declares that all components share a common minimizer over `X`. The
    /// optimal value is then `sum_i f_i*`.
    pub fn with_assumption1(mut self, holds: bool) -> Result<Self> {
        self.assumption1_holds = holds;
        if holds {
            let sum = self.sum_of_component_optima();
            match self.optimal_value {
                Some(v) if (v - sum).abs() > SUM_OPTIMUM_TOL => {
                    return Err(Error::InvalidArgument(format!(
                        "optimal value {v} disagrees with the sum of component optima {sum}"
                    )))
                }
                _ => self.optimal_value = Some(sum),
            }
        }
        Ok(self)
    }

    pub fn with_optimal_value(mut self, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidArgument("optimal value must be finite".into()));
        }
        if self.assumption1_holds {
            let sum = self.sum_of_component_optima();
            if (value - sum).abs() > SUM_OPTIMUM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "optimal value {value} disagrees with the sum of component optima {sum}"
                )));
            }
        }
        self.optimal_value = Some(value);
        Ok(self)
    }

    pub fn with_known_solution(mut self, x: Point) -> Result<Self> {
        self.check_point(x.view())?;
        self.known_solution = Some(x);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Arc<dyn ComponentFunction>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &dyn ComponentFunction {
        self.components[i].as_ref()
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn optimal_value(&self) -> Option<f64> {
        self.optimal_value
    }

    pub fn known_solution(&self) -> Option<&Point> {
        self.known_solution.as_ref()
    }

    pub fn assumption1_holds(&self) -> bool {
        self.assumption1_holds
    }

    pub fn sum_of_component_optima(&self) -> f64 {
        self.components.iter().map(|c| c.optimal_value()).sum()
    }

    pub fn meta(&self) -> OptimumMeta {
        OptimumMeta {
            p: self.components[0].hoelder().p,
            l_max: self.components.iter().map(|c| c.hoelder().l).fold(f64::MIN, f64::max),
            m: self.components.len(),
        }
    }

    /// Dimension and finiteness check for points handed to the solvers.
    pub fn check_point(&self, x: ArrayView1<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "point has dimension {} but the problem has dimension {}",
                x.len(),
                self.dim
            )));
        }
        if !all_finite(x) {
            return Err(Error::InvalidArgument("point has non-finite coordinates".into()));
        }
        Ok(())
    }

    /// Membership in the solution set. Under the common-minimizer assumption
    /// this is the exact test "every component at its optimum and `x` in `X`";
    /// otherwise it falls back on `f(x) <= f* + tol` when `f*` is known.
    pub fn in_solution_set(&self, x: ArrayView1<f64>, tol: f64) -> Result<bool> {
        if !self.projector.contains(x, tol) {
            return Ok(false);
        }
        if self.assumption1_holds {
            return Ok(self
                .components
                .iter()
                .all(|c| c.value(x) <= c.optimal_value() + tol));
        }
        match self.optimal_value {
            Some(fstar) => Ok(evaluate_sum(self, x)? <= fstar + tol),
            None => Ok(false),
        }
    }
}

/// `f(x) = sum_i f_i(x)`, summed in component order.
pub fn evaluate_sum(problem: &SumProblem, x: ArrayView1<f64>) -> Result<f64> {
    if x.len() != problem.dim {
        return Err(Error::InvalidArgument(format!(
            "point has dimension {} but the problem has dimension {}",
            x.len(),
            problem.dim
        )));
    }
    let mut total = 0.0;
    for (i, c) in problem.components.iter().enumerate() {
        let v = c.value(x);
        if v.is_nan() {
            return Err(Error::Numeric { component: i, value: v });
        }
        total += v;
    }
    Ok(total)
}

/// `max_i L_i`.
pub fn l_max(problem: &SumProblem) -> f64 {
    problem.meta().l_max
}

/// Floating-point stand-in for the exact test `f_i(x) = f_i*`.
pub fn is_at_component_optimum(component: &dyn ComponentFunction, x: ArrayView1<f64>, tol: f64) -> bool {
    component.value(x) <= component.optimal_value() + tol
}

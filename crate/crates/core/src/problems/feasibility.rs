//! Quasi-convex feasibility problems `h_i(x) <= 0, x in X`, recast as the
//! sum problem with components `f_i = max{h_i, 0}` (all with `f_i* = 0`).

use std::fmt;
use std::sync::Arc;

use ndarray::ArrayView1;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Point};
use crate::problem::{ComponentFunction, HoelderParams, SumProblem};
use crate::projection::{Halfspace, Polyhedron, Projector};
use crate::rng::rng_from_seed;

/// A quasi-convex constraint function `h` with its own normal-cone oracle.
pub trait Constraint: Send + Sync + fmt::Debug {
    fn value(&self, x: ArrayView1<f64>) -> f64;

    /// Unit normal to `{y : h(y) < h(x)}` at `x`.
    fn unit_normal(&self, x: ArrayView1<f64>) -> Result<Point>;

    fn hoelder(&self) -> HoelderParams;
}

/// `<a, x> >= b`, i.e. `h(x) = b - <a, x>`. Lipschitz with modulus `||a||`.
#[derive(Clone, Debug)]
pub struct LinearConstraint {
    a: Point,
    b: f64,
    a_norm: f64,
    direction: Point,
}

impl LinearConstraint {
    pub fn new(a: Point, b: f64) -> Result<Self> {
        let a_norm = norm(a.view());
        if !(a_norm > 0.0) || !a_norm.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument("linear constraint needs a finite nonzero normal".into()));
        }
        let direction = a.mapv(|v| -v / a_norm);
        Ok(LinearConstraint { a, b, a_norm, direction })
    }

    pub fn normal(&self) -> &Point {
        &self.a
    }

    pub fn offset(&self) -> f64 {
        self.b
    }

    pub fn halfspace(&self) -> Halfspace {
        Halfspace::new(self.a.clone(), self.b).expect("validated on construction")
    }
}

impl Constraint for LinearConstraint {
    fn value(&self, x: ArrayView1<f64>) -> f64 {
        self.b - dot(self.a.view(), x)
    }

    /// Always `-a / ||a||`; at satisfied points this is the canonical pick.
    fn unit_normal(&self, _x: ArrayView1<f64>) -> Result<Point> {
        Ok(self.direction.clone())
    }

    fn hoelder(&self) -> HoelderParams {
        HoelderParams { p: 1.0, l: self.a_norm }
    }
}

/// `||x - c|| <= r`, i.e. `h(x) = ||x - c|| - r`. Lipschitz with modulus 1.
#[derive(Clone, Debug)]
pub struct BallConstraint {
    center: Point,
    radius: f64,
}

impl BallConstraint {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument("ball radius must be nonnegative".into()));
        }
        Ok(BallConstraint { center, radius })
    }
}

impl Constraint for BallConstraint {
    fn value(&self, x: ArrayView1<f64>) -> f64 {
        norm((&x - &self.center).view()) - self.radius
    }

    /// `(x - c) / ||x - c||`; at the center the first coordinate axis.
    fn unit_normal(&self, x: ArrayView1<f64>) -> Result<Point> {
        let d = &x - &self.center;
        let nd = norm(d.view());
        if nd > 0.0 {
            Ok(d / nd)
        } else {
            let mut e = Point::zeros(x.len());
            e[0] = 1.0;
            Ok(e)
        }
    }

    fn hoelder(&self) -> HoelderParams {
        HoelderParams { p: 1.0, l: 1.0 }
    }
}

/// `f = max{h, 0}` with `f* = 0`.
#[derive(Clone, Debug)]
pub struct FeasibilityComponent {
    constraint: Arc<dyn Constraint>,
}

impl FeasibilityComponent {
    pub fn new(constraint: Arc<dyn Constraint>) -> Self {
        FeasibilityComponent { constraint }
    }

    pub fn constraint(&self) -> &dyn Constraint {
        self.constraint.as_ref()
    }
}

impl ComponentFunction for FeasibilityComponent {
    fn value(&self, x: ArrayView1<f64>) -> f64 {
        self.constraint.value(x).max(0.0)
    }

    fn unit_quasi_subgradient(&self, x: ArrayView1<f64>) -> Result<Point> {
        // On {h > 0} the strict sublevel sets of f and h coincide.
        self.constraint.unit_normal(x)
    }

    fn optimal_value(&self) -> f64 {
        0.0
    }

    fn hoelder(&self) -> HoelderParams {
        self.constraint.hoelder()
    }
}

/// The sum problem of a consistent system: `f* = 0` and the components
/// share every solution of the system as a minimizer.
pub fn make_feasibility_problem(dim: usize, constraints: Vec<Arc<dyn Constraint>>, projector: Projector) -> Result<SumProblem> {
    let components = constraints
        .into_iter()
        .map(|c| Arc::new(FeasibilityComponent::new(c)) as Arc<dyn ComponentFunction>)
        .collect();
    SumProblem::new(dim, components, projector)?.with_assumption1(true)
}

/// Parameters of a random consistent halfspace system.
#[derive(Clone, Debug)]
pub struct RandomSystemSpec {
    pub n: usize,
    pub m: usize,
    /// Each constraint is slack by a margin drawn from this range at the
    /// reference solution; the ball of radius `margin.0` around it is then
    /// contained in the solution set.
    pub margin: (f64, f64),
    /// Reference solution drawn uniformly from `[-center_box, center_box]^n`.
    pub center_box: f64,
}

impl RandomSystemSpec {
    pub fn new(n: usize, m: usize) -> Self {
        RandomSystemSpec {
            n,
            m,
            margin: (0.0, 0.5),
            center_box: 1.0,
        }
    }
}

/// A random consistent halfspace system together with its data.
#[derive(Clone, Debug)]
pub struct HalfspaceSystem {
    pub problem: SumProblem,
    pub halfspaces: Vec<Halfspace>,
    pub reference_solution: Point,
}

impl HalfspaceSystem {
    /// The solution set as a polyhedron, for distance computations.
    pub fn solution_polyhedron(&self) -> Result<Polyhedron> {
        Polyhedron::new(self.halfspaces.clone(), None)
    }
}

/// A random consistent system of `m` halfspaces `<a_i, x> >= b_i` in `R^n`
/// with unit normals. The reference solution is also stored as the
/// problem's known solution.
pub fn random_halfspace_system(spec: &RandomSystemSpec, seed: u64) -> Result<HalfspaceSystem> {
    if spec.n == 0 || spec.m == 0 {
        return Err(Error::InvalidArgument("random system needs n, m >= 1".into()));
    }
    let (lo, hi) = spec.margin;
    if !(lo >= 0.0 && lo <= hi) {
        return Err(Error::InvalidArgument("margin range must satisfy 0 <= lo <= hi".into()));
    }
    let mut rng = rng_from_seed(seed);
    let x_star: Point = (0..spec.n)
        .map(|_| rng.random_range(-spec.center_box..=spec.center_box))
        .collect();
    let mut constraints: Vec<Arc<dyn Constraint>> = Vec::with_capacity(spec.m);
    let mut halfspaces = Vec::with_capacity(spec.m);
    for _ in 0..spec.m {
        let a = loop {
            let a: Point = (0..spec.n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let na = norm(a.view());
            if na > 1e-3 {
                break a / na;
            }
        };
        let margin = if hi > lo { rng.random_range(lo..hi) } else { lo };
        let b = dot(a.view(), x_star.view()) - margin;
        let c = LinearConstraint::new(a, b)?;
        halfspaces.push(c.halfspace());
        constraints.push(Arc::new(c));
    }
    let problem = make_feasibility_problem(spec.n, constraints, Projector::WholeSpace)?.with_known_solution(x_star.clone())?;
    Ok(HalfspaceSystem {
        problem,
        halfspaces,
        reference_solution: x_star,
    })
}

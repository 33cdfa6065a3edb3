//! Euclidean projections onto the feasible sets used by the solvers.
//!
//! Closed forms are used for the whole space, the nonnegative orthant, boxes
//! and single halfspaces. Finite intersections of halfspaces (optionally with
//! a componentwise lower bound) are handled by Dykstra's cyclic projection
//! scheme, which converges to the projection itself rather than to an
//! arbitrary feasible point.

use log::warn;
use ndarray::{Array1, ArrayView1, Zip};

use crate::error::{Error, Result};
use crate::linalg::{dot, Point};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;

/// Violation above which a stalled Dykstra run is reported as infeasible.
const INFEASIBLE_VIOLATION: f64 = 1e-3;
/// Number of trailing sweeps inspected by the infeasibility heuristic.
const INFEASIBLE_WINDOW: usize = 100;

/// `{x : <a, x> >= b}` with `a != 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    normal: Point,
    offset: f64,
    normal_sq: f64,
}

impl Halfspace {
    pub fn new(normal: Point, offset: f64) -> Result<Self> {
        let normal_sq = dot(normal.view(), normal.view());
        if !(normal_sq > 0.0) || !normal_sq.is_finite() || !offset.is_finite() {
            return Err(Error::InvalidArgument("halfspace needs a finite nonzero normal".into()));
        }
        Ok(Halfspace { normal, offset, normal_sq })
    }

    pub fn normal(&self) -> &Point {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Signed amount `b - <a, x>`; positive when violated.
    pub fn residual(&self, x: ArrayView1<f64>) -> f64 {
        self.offset - dot(self.normal.view(), x)
    }

    /// Euclidean distance from `x` to the halfspace.
    pub fn violation(&self, x: ArrayView1<f64>) -> f64 {
        (self.residual(x) / self.normal_sq.sqrt()).max(0.0)
    }

    pub fn project(&self, x: ArrayView1<f64>) -> Point {
        let r = self.residual(x);
        let mut z = x.to_owned();
        if r > 0.0 {
            z.scaled_add(r / self.normal_sq, &self.normal);
        }
        z
    }
}

/// Componentwise `max(x_j, 0)`.
pub fn project_nonneg(x: ArrayView1<f64>) -> Point {
    x.mapv(|v| v.max(0.0))
}

pub fn project_halfspace(x: ArrayView1<f64>, h: &Halfspace) -> Point {
    h.project(x)
}

pub fn project_box(x: ArrayView1<f64>, lower: ArrayView1<f64>, upper: ArrayView1<f64>) -> Point {
    let mut z = x.to_owned();
    Zip::from(&mut z)
        .and(&lower)
        .and(&upper)
        .for_each(|v, &lo, &hi| *v = v.clamp(lo, hi));
    z
}

/// Outcome flag of an iterative projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectionStatus {
    Converged,
    /// `max_sweeps` was exhausted; the returned point is the least-violating
    /// sweep iterate.
    MaxSweeps,
}

#[derive(Clone, Debug)]
pub struct PolyhedronProjection {
    pub point: Point,
    pub status: ProjectionStatus,
    pub sweeps: usize,
    pub violation: f64,
}

/// `{x : x_j >= lower_bound for all j, <a_t, x> >= b_t for all t}`; the
/// bound is optional.
#[derive(Clone, Debug)]
pub struct Polyhedron {
    pub halfspaces: Vec<Halfspace>,
    pub lower_bound: Option<f64>,
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Polyhedron {
    pub fn new(halfspaces: Vec<Halfspace>, lower_bound: Option<f64>) -> Result<Self> {
        if halfspaces.is_empty() && lower_bound.is_none() {
            return Err(Error::InvalidArgument("polyhedron needs at least one piece".into()));
        }
        if let Some(first) = halfspaces.first() {
            let n = first.dim();
            if halfspaces.iter().any(|h| h.dim() != n) {
                return Err(Error::InvalidArgument("halfspaces have mixed dimensions".into()));
            }
        }
        Ok(Polyhedron {
            halfspaces,
            lower_bound,
            tol: DEFAULT_TOL,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        })
    }

    pub fn with_tolerance(mut self, tol: f64, max_sweeps: usize) -> Result<Self> {
        if !(tol > 0.0) || max_sweeps == 0 {
            return Err(Error::InvalidArgument("tolerance and sweep limit must be positive".into()));
        }
        self.tol = tol;
        self.max_sweeps = max_sweeps;
        Ok(self)
    }

    pub fn dim(&self) -> Option<usize> {
        self.halfspaces.first().map(|h| h.dim())
    }

    pub fn max_violation(&self, x: ArrayView1<f64>) -> f64 {
        let mut worst = 0.0_f64;
        if let Some(lb) = self.lower_bound {
            for &v in x.iter() {
                worst = worst.max(lb - v);
            }
        }
        for h in &self.halfspaces {
            worst = worst.max(h.violation(x));
        }
        worst
    }

    /// Dykstra's cyclic projection with correction terms.
    ///
    /// Stops once a sweep leaves the iterate and every correction term
    /// unchanged up to `tol` (squared-change sum below `tol^2`) and the
    /// iterate violates no constraint by more than `tol`.
    pub fn project(&self, x: ArrayView1<f64>) -> Result<PolyhedronProjection> {
        let n = x.len();
        if let Some(d) = self.dim() {
            if d != n {
                return Err(Error::InvalidArgument(format!(
                    "point has dimension {n} but the polyhedron has dimension {d}"
                )));
            }
        }
        let v0 = self.max_violation(x);
        if v0 <= 0.01 * self.tol {
            return Ok(PolyhedronProjection {
                point: x.to_owned(),
                status: ProjectionStatus::Converged,
                sweeps: 0,
                violation: v0,
            });
        }

        let mut z = x.to_owned();
        // Halfspace corrections are always multiples of the normal, so one
        // scalar per halfspace suffices.
        let mut coeffs = vec![0.0_f64; self.halfspaces.len()];
        let mut bound_corr: Array1<f64> = Array1::zeros(if self.lower_bound.is_some() { n } else { 0 });
        let tol_sq = self.tol * self.tol;

        let mut best = z.clone();
        let mut best_violation = f64::INFINITY;
        let mut history: Vec<f64> = Vec::with_capacity(INFEASIBLE_WINDOW + 1);

        for sweep in 1..=self.max_sweeps {
            let mut change_sq = 0.0;

            if let Some(lb) = self.lower_bound {
                Zip::from(&mut z).and(&mut bound_corr).for_each(|zj, ej| {
                    let y = *zj + *ej;
                    let p = y.max(lb);
                    let e_new = y - p;
                    let de = e_new - *ej;
                    change_sq += de * de;
                    *ej = e_new;
                    *zj = p;
                });
            }

            for (h, mu) in self.halfspaces.iter().zip(coeffs.iter_mut()) {
                // y = z + mu * a; project y; new correction y - P(y) = mu' * a
                let az = dot(h.normal.view(), z.view());
                let ay = az + *mu * h.normal_sq;
                let r = h.offset - ay;
                let mu_new = if r > 0.0 { -r / h.normal_sq } else { 0.0 };
                let shift = *mu - mu_new;
                if shift != 0.0 {
                    z.scaled_add(shift, &h.normal);
                }
                let dmu = mu_new - *mu;
                change_sq += dmu * dmu * h.normal_sq;
                *mu = mu_new;
            }

            let violation = self.max_violation(z.view());
            if violation < best_violation {
                best_violation = violation;
                best.assign(&z);
            }
            if change_sq < tol_sq && violation <= self.tol {
                return Ok(PolyhedronProjection {
                    point: z,
                    status: ProjectionStatus::Converged,
                    sweeps: sweep,
                    violation,
                });
            }
            if history.len() == INFEASIBLE_WINDOW + 1 {
                history.remove(0);
            }
            history.push(violation);
        }

        let stalled = history.len() > INFEASIBLE_WINDOW && history.windows(2).all(|w| w[1] >= w[0] - 1e-15);
        let last = history.last().copied().unwrap_or(best_violation);
        if last > INFEASIBLE_VIOLATION && stalled {
            return Err(Error::Infeasible {
                violation: last,
                sweeps: self.max_sweeps,
            });
        }
        Ok(PolyhedronProjection {
            point: best,
            status: ProjectionStatus::MaxSweeps,
            sweeps: self.max_sweeps,
            violation: best_violation,
        })
    }
}

/// Free-function form of [`Polyhedron::project`].
pub fn project_polyhedron(
    x: ArrayView1<f64>,
    halfspaces: &[Halfspace],
    lower_bound: Option<f64>,
    tol: f64,
    max_sweeps: usize,
) -> Result<PolyhedronProjection> {
    Polyhedron::new(halfspaces.to_vec(), lower_bound)?
        .with_tolerance(tol, max_sweeps)?
        .project(x)
}

/// Euclidean projector `P_X`.
#[derive(Clone, Debug)]
pub enum Projector {
    WholeSpace,
    NonnegOrthant,
    Box { lower: Point, upper: Point },
    Halfspace(Halfspace),
    Polyhedron(Polyhedron),
}

impl Projector {
    pub fn boxed(lower: Point, upper: Point) -> Result<Self> {
        if lower.len() != upper.len() || lower.iter().zip(upper.iter()).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidArgument("box needs lower <= upper in every coordinate".into()));
        }
        Ok(Projector::Box { lower, upper })
    }

    /// Dimension fixed by the set, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Projector::WholeSpace | Projector::NonnegOrthant => None,
            Projector::Box { lower, .. } => Some(lower.len()),
            Projector::Halfspace(h) => Some(h.dim()),
            Projector::Polyhedron(p) => p.dim(),
        }
    }

    /// Projects `x`. Iterative projections that run out of sweeps log a
    /// warning and return their best iterate.
    pub fn project(&self, x: ArrayView1<f64>) -> Result<Point> {
        Ok(match self {
            Projector::WholeSpace => x.to_owned(),
            Projector::NonnegOrthant => project_nonneg(x),
            Projector::Box { lower, upper } => project_box(x, lower.view(), upper.view()),
            Projector::Halfspace(h) => h.project(x),
            Projector::Polyhedron(p) => {
                let out = p.project(x)?;
                if out.status == ProjectionStatus::MaxSweeps {
                    warn!(
                        "polyhedral projection hit {} sweeps (violation {:e})",
                        out.sweeps, out.violation
                    );
                }
                out.point
            }
        })
    }

    pub fn max_violation(&self, x: ArrayView1<f64>) -> f64 {
        match self {
            Projector::WholeSpace => 0.0,
            Projector::NonnegOrthant => x.iter().fold(0.0_f64, |w, &v| w.max(-v)),
            Projector::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .fold(0.0_f64, |w, (&v, (&lo, &hi))| w.max(lo - v).max(v - hi)),
            Projector::Halfspace(h) => h.violation(x),
            Projector::Polyhedron(p) => p.max_violation(x),
        }
    }

    pub fn contains(&self, x: ArrayView1<f64>, tol: f64) -> bool {
        self.max_violation(x) <= tol
    }

    /// Accuracy of the projection: zero for closed forms.
    pub fn tolerance(&self) -> f64 {
        match self {
            Projector::Polyhedron(p) => p.tol,
            _ => 0.0,
        }
    }
}

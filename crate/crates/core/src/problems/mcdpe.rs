//! Multiple Cobb-Douglas productions efficiency instances.
//!
//! Ratio `i` is `R_i(x) = a_{i,0} prod_j x_j^{a_{i,j}} / (c_{i,0} + sum_j c_{i,j} x_j)`
//! and the feasible set is `{x >= 0, B x >= p}`. Each ratio is quasi-concave,
//! so `-R_i` and `max{t - R_i, 0}` are quasi-convex components.

use std::sync::Arc;

use ndarray::{ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm, Point};
use crate::problem::{ComponentFunction, HoelderParams, SumProblem};
use crate::projection::{Halfspace, Polyhedron, Projector};
use crate::rng::rng_from_seed;
use crate::stepsize::Schedule;

/// Componentwise lower bound kept by MCDPE projections; the Cobb-Douglas
/// gradient is singular on the boundary of the orthant.
pub const DOMAIN_EPS: f64 = 1e-8;

/// Relative shortfall applied to estimated ratio maxima to form targets.
pub const TARGET_SHORTFALL: f64 = 1e-3;

const EXPONENT_SUM_TOL: f64 = 1e-9;

/// A problem instance. Matrices are stored row-major: `a` and `c` are
/// `m x (n+1)` with the scale/intercept in column 0, `B` is `s x n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McdpeInstance {
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    pub p_rhs: Vec<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl McdpeInstance {
    pub fn new(m: usize, n: usize, a: Vec<f64>, c: Vec<f64>, b: Vec<f64>, p_rhs: Vec<f64>) -> Result<Self> {
        let s = p_rhs.len();
        let inst = McdpeInstance { m, n, s, a, c, b, p_rhs, seed: None };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n, s) = (self.m, self.n, self.s);
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument("MCDPE instance needs m, n >= 1".into()));
        }
        let shapes = [
            ("a", self.a.len(), m * (n + 1)),
            ("c", self.c.len(), m * (n + 1)),
            ("B", self.b.len(), s * n),
            ("p_rhs", self.p_rhs.len(), s),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(Error::InvalidArgument(format!("field {name} has {got} entries, expected {want}")));
            }
        }
        let all = self.a.iter().chain(&self.c).chain(&self.b).chain(&self.p_rhs);
        if all.into_iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("MCDPE data must be finite and nonnegative".into()));
        }
        for i in 0..m {
            let sum: f64 = self.exponents(i).iter().sum();
            if (sum - 1.0).abs() > EXPONENT_SUM_TOL {
                return Err(Error::InvalidArgument(format!("exponent row {i} sums to {sum}, expected 1")));
            }
        }
        Ok(())
    }

    pub fn scale(&self, i: usize) -> f64 {
        self.a[i * (self.n + 1)]
    }

    pub fn exponents(&self, i: usize) -> &[f64] {
        let w = self.n + 1;
        &self.a[i * w + 1..(i + 1) * w]
    }

    pub fn intercept(&self, i: usize) -> f64 {
        self.c[i * (self.n + 1)]
    }

    pub fn cost_coefficients(&self, i: usize) -> &[f64] {
        let w = self.n + 1;
        &self.c[i * w + 1..(i + 1) * w]
    }

    pub fn constraint_row(&self, t: usize) -> &[f64] {
        &self.b[t * self.n..(t + 1) * self.n]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: McdpeInstance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    /// Sum of all ratios, the efficiency being maximized.
    pub fn efficiency(&self, x: ArrayView1<f64>) -> Result<f64> {
        (0..self.m).map(|i| mcdpe_ratio(self, i, x)).sum()
    }
}

/// Uniform draws: scales in `[0, 10]`, exponents, costs and `B` in `[0, 1]`,
/// right-hand sides in `[0, n/2]`. Exponent rows are normalized to sum 1.
pub fn generate_mcdpe(m: usize, n: usize, s: usize, seed: u64) -> Result<McdpeInstance> {
    if m == 0 || n == 0 || s == 0 {
        return Err(Error::InvalidArgument("generate_mcdpe needs m, n, s >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut a = Vec::with_capacity(m * (n + 1));
    for _ in 0..m {
        a.push(rng.random_range(0.0..=10.0));
        let row: Vec<f64> = loop {
            let row: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
            if row.iter().sum::<f64>() > 0.0 {
                break row;
            }
        };
        let sum: f64 = row.iter().sum();
        a.extend(row.iter().map(|v| v / sum));
    }
    let c = (0..m * (n + 1)).map(|_| rng.random_range(0.0..=1.0)).collect();
    let b = (0..s * n).map(|_| rng.random_range(0.0..=1.0)).collect();
    let half = n as f64 / 2.0;
    let p_rhs = (0..s).map(|_| rng.random_range(0.0..=half)).collect();
    let mut inst = McdpeInstance::new(m, n, a, c, b, p_rhs)?;
    inst.seed = Some(seed);
    Ok(inst)
}

fn check_domain(inst: &McdpeInstance, i: usize, x: ArrayView1<f64>) -> Result<()> {
    if i >= inst.m {
        return Err(Error::InvalidArgument(format!("ratio index {i} out of range for m = {}", inst.m)));
    }
    if x.len() != inst.n {
        return Err(Error::InvalidArgument(format!("point has dimension {}, expected {}", x.len(), inst.n)));
    }
    if let Some(j) = x.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Domain(format!("x[{j}] = {} is not positive", x[j])));
    }
    Ok(())
}

fn numerator(inst: &McdpeInstance, i: usize, x: ArrayView1<f64>) -> f64 {
    let log: f64 = inst.exponents(i).iter().zip(x.iter()).map(|(a, xj)| a * xj.ln()).sum();
    inst.scale(i) * log.exp()
}

fn denominator(inst: &McdpeInstance, i: usize, x: ArrayView1<f64>) -> f64 {
    inst.intercept(i) + inst.cost_coefficients(i).iter().zip(x.iter()).map(|(c, xj)| c * xj).sum::<f64>()
}

/// `R_i(x)`, defined for `x > 0`.
pub fn mcdpe_ratio(inst: &McdpeInstance, i: usize, x: ArrayView1<f64>) -> Result<f64> {
    check_domain(inst, i, x)?;
    let den = denominator(inst, i, x);
    if !(den > 0.0) {
        return Err(Error::Domain(format!("cost of ratio {i} vanishes at x")));
    }
    Ok(numerator(inst, i, x) / den)
}

/// `R_i` extended to the closed orthant by continuity (`0^0 = 1`); NaN
/// outside it or where the cost vanishes.
fn ratio_extended(inst: &McdpeInstance, i: usize, x: ArrayView1<f64>) -> f64 {
    if x.iter().any(|v| !(*v >= 0.0)) {
        return f64::NAN;
    }
    if x.iter().all(|v| *v > 0.0) {
        return mcdpe_ratio(inst, i, x).unwrap_or(f64::NAN);
    }
    let mut prod = inst.scale(i);
    for (a, xj) in inst.exponents(i).iter().zip(x.iter()) {
        if *a > 0.0 {
            prod *= xj.powf(*a);
        }
    }
    let den = denominator(inst, i, x);
    if den > 0.0 {
        prod / den
    } else {
        f64::NAN
    }
}

/// Unit normal to the strict superlevel set `{y : R_i(y) > R_i(x)}`, pointing
/// away from it: `-d / ||d||` with `d = grad p_i(x) - R_i(x) grad c_i(x)`.
pub fn ratio_quasi_subgradient(inst: &McdpeInstance, i: usize, x: ArrayView1<f64>) -> Result<Point> {
    check_domain(inst, i, x)?;
    let p = numerator(inst, i, x);
    let den = denominator(inst, i, x);
    if !(den > 0.0) {
        return Err(Error::Domain(format!("cost of ratio {i} vanishes at x")));
    }
    let r = p / den;
    let exps = inst.exponents(i);
    let costs = inst.cost_coefficients(i);
    let mut d = Point::zeros(inst.n);
    let mut scale = 0.0;
    for j in 0..inst.n {
        let gp = p * exps[j] / x[j];
        let gc = r * costs[j];
        d[j] = gp - gc;
        scale += gp * gp + gc * gc;
    }
    let nd = norm(d.view());
    if !(nd > 1e-14 * scale.sqrt()) || nd == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    Ok(d.mapv(|v| -v / nd))
}

/// `f_i = -R_i` with `f_i* = -target`: direct maximization of the efficiency.
#[derive(Clone, Debug)]
pub struct NegatedRatio {
    inst: Arc<McdpeInstance>,
    index: usize,
    target: f64,
    hoelder: HoelderParams,
}

impl ComponentFunction for NegatedRatio {
    fn value(&self, x: ArrayView1<f64>) -> f64 {
        -ratio_extended(&self.inst, self.index, x)
    }

    fn unit_quasi_subgradient(&self, x: ArrayView1<f64>) -> Result<Point> {
        ratio_quasi_subgradient(&self.inst, self.index, x)
    }

    fn optimal_value(&self) -> f64 {
        -self.target
    }

    fn hoelder(&self) -> HoelderParams {
        self.hoelder
    }
}

/// `f_i = max{target - R_i, 0}`: the feasibility form with `f_i* = 0`.
#[derive(Clone, Debug)]
pub struct RatioShortfall {
    inst: Arc<McdpeInstance>,
    index: usize,
    target: f64,
    hoelder: HoelderParams,
}

impl ComponentFunction for RatioShortfall {
    fn value(&self, x: ArrayView1<f64>) -> f64 {
        (self.target - ratio_extended(&self.inst, self.index, x)).max(0.0)
    }

    fn unit_quasi_subgradient(&self, x: ArrayView1<f64>) -> Result<Point> {
        ratio_quasi_subgradient(&self.inst, self.index, x)
    }

    fn optimal_value(&self) -> f64 {
        0.0
    }

    fn hoelder(&self) -> HoelderParams {
        self.hoelder
    }
}

/// `X = {x >= eps, B x >= p}`; rows of `B` that are zero with `p_t <= 0` are dropped.
pub fn mcdpe_projector(inst: &McdpeInstance, eps: f64) -> Result<Projector> {
    let mut hs = Vec::with_capacity(inst.s);
    for t in 0..inst.s {
        let row = inst.constraint_row(t);
        if row.iter().all(|v| *v == 0.0) {
            if inst.p_rhs[t] > 0.0 {
                return Err(Error::InvalidArgument(format!("constraint row {t} is 0 >= {}", inst.p_rhs[t])));
            }
            continue;
        }
        hs.push(Halfspace::new(Point::from(row.to_vec()), inst.p_rhs[t])?);
    }
    if hs.is_empty() {
        let lower = Point::from_elem(inst.n, eps);
        let upper = Point::from_elem(inst.n, f64::INFINITY);
        return Projector::boxed(lower, upper);
    }
    let poly = Polyhedron::new(hs, Some(eps))?;
    Ok(Projector::Polyhedron(poly))
}

fn component_params(inst: &McdpeInstance, targets: &[f64], l_estimates: &[f64], p_order: f64) -> Result<Vec<HoelderParams>> {
    if targets.len() != inst.m || l_estimates.len() != inst.m {
        return Err(Error::InvalidArgument(format!("expected {} targets and Lipschitz estimates", inst.m)));
    }
    if let Some(t) = targets.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument(format!("target {t} is not finite")));
    }
    l_estimates
        .iter()
        .map(|&l| {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::Configuration(format!("Lipschitz estimate must be positive, got {l}")));
            }
            HoelderParams::new(p_order, l).map_err(|e| Error::Configuration(e.to_string()))
        })
        .collect()
}

/// Feasibility form: components `max{targets_i - R_i, 0}` over the instance
/// polyhedron. A common solution is only guaranteed (and flagged) when every
/// target is nonpositive; callers that know more may set the flag themselves.
pub fn sor_to_sum_problem(inst: Arc<McdpeInstance>, targets: &[f64], l_estimates: &[f64], p_order: f64) -> Result<SumProblem> {
    let params = component_params(&inst, targets, l_estimates, p_order)?;
    let components = (0..inst.m)
        .map(|i| {
            Arc::new(RatioShortfall {
                inst: inst.clone(),
                index: i,
                target: targets[i],
                hoelder: params[i],
            }) as Arc<dyn ComponentFunction>
        })
        .collect();
    let projector = mcdpe_projector(&inst, DOMAIN_EPS)?;
    let trivially_feasible = targets.iter().all(|t| *t <= 0.0);
    SumProblem::new(inst.n, components, projector)?.with_assumption1(trivially_feasible)
}

/// Direct form: components `-R_i` whose optimal values are taken as `-targets_i`.
pub fn sor_direct_problem(inst: Arc<McdpeInstance>, targets: &[f64], l_estimates: &[f64], p_order: f64) -> Result<SumProblem> {
    let params = component_params(&inst, targets, l_estimates, p_order)?;
    let components = (0..inst.m)
        .map(|i| {
            Arc::new(NegatedRatio {
                inst: inst.clone(),
                index: i,
                target: targets[i],
                hoelder: params[i],
            }) as Arc<dyn ComponentFunction>
        })
        .collect();
    let projector = mcdpe_projector(&inst, DOMAIN_EPS)?;
    SumProblem::new(inst.n, components, projector)
}

/// Projected quasi-subgradient ascent on `R_i` from `x0` with steps
/// `schedule(k)`; returns the best ratio seen. Stops early where the
/// direction degenerates (a stationary ratio).
pub fn maximize_ratio(inst: &McdpeInstance, i: usize, projector: &Projector, x0: ArrayView1<f64>, schedule: &Schedule, budget: usize) -> Result<f64> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    let mut x = projector.project(x0)?;
    let mut best = mcdpe_ratio(inst, i, x.view())?;
    for k in 0..budget {
        let g = match ratio_quasi_subgradient(inst, i, x.view()) {
            Ok(g) => g,
            Err(Error::DegenerateDirection) => break,
            Err(e) => return Err(e),
        };
        let v = schedule.at(k)?;
        let y = &x - &(g * v);
        x = projector.project(y.view())?;
        best = best.max(mcdpe_ratio(inst, i, x.view())?);
    }
    Ok(best)
}

/// The starting point used by MCDPE runs: the projection of the all-ones vector.
pub fn mcdpe_start(inst: &McdpeInstance, projector: &Projector) -> Result<Point> {
    projector.project(Point::ones(inst.n).view())
}

/// A lower bound on `sup_X R_i` by `budget` ascent steps of `3 / (1 + 0.1 k)`
/// from the standard start.
pub fn estimate_component_maximum(inst: &McdpeInstance, i: usize, budget: usize) -> Result<f64> {
    let projector = mcdpe_projector(inst, DOMAIN_EPS)?;
    let x0 = mcdpe_start(inst, &projector)?;
    maximize_ratio(inst, i, &projector, x0.view(), &Schedule::standard(3.0)?, budget)
}

/// `(1 - 1e-3)` times each estimated maximum.
pub fn default_targets(inst: &McdpeInstance, budget: usize) -> Result<Vec<f64>> {
    (0..inst.m)
        .map(|i| estimate_component_maximum(inst, i, budget).map(|r| (1.0 - TARGET_SHORTFALL) * r))
        .collect()
}

/// Largest central difference quotient of `R_i` along its own ascent
/// direction at random points of `[0.5, 3]^n`, an estimate of the local
/// Lipschitz modulus `||grad R_i||`. Quotients along random directions would
/// underestimate it by a factor of about `sqrt(n)`.
pub fn estimate_lipschitz(inst: &McdpeInstance, i: usize, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = rng_from_seed(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples.max(1) {
        let x: Point = (0..inst.n).map(|_| rng.random_range(0.5..=3.0)).collect();
        let u = match ratio_quasi_subgradient(inst, i, x.view()) {
            Ok(g) => g,
            Err(Error::DegenerateDirection) => continue,
            Err(e) => return Err(e),
        };
        let h = 1e-6;
        let up = &x - &(&u * h);
        let down = &x + &(&u * h);
        let q = (mcdpe_ratio(inst, i, up.view())? - mcdpe_ratio(inst, i, down.view())?).abs() / (2.0 * h);
        best = best.max(q);
    }
    // A constant ratio still needs a positive modulus.
    Ok(best.max(1e-12))
}

/// Lipschitz estimates for every ratio, seeded per index.
pub fn estimate_all_lipschitz(inst: &McdpeInstance, samples: usize, seed: u64) -> Result<Vec<f64>> {
    (0..inst.m).map(|i| estimate_lipschitz(inst, i, samples, seed.wrapping_add(i as u64))).collect()
}

/// `B x - p`, one entry per constraint row.
pub fn constraint_slack(inst: &McdpeInstance, x: ArrayView1<f64>) -> Point {
    if inst.s == 0 {
        return Point::zeros(0);
    }
    let b = ArrayView2::from_shape((inst.s, inst.n), &inst.b).expect("validated shape");
    let mut slack = b.dot(&x);
    for (t, v) in slack.iter_mut().enumerate() {
        *v -= inst.p_rhs[t];
    }
    slack
}

//! Runtime checks of the per-iteration contraction estimates.

use ndarray::ArrayView1;

use crate::linalg::{dist_sq, dot};
use crate::problem::{ComponentFunction, OptimumMeta};
use crate::stepsize::{c_pm, r_pm};

fn gap_root(f_xk: f64, f_star: f64, p: f64) -> f64 {
    (f_xk - f_star).max(0.0).powf(1.0 / p)
}

/// Deterministic cycle estimate:
/// `||x_next - x*||^2 <= ||x_k - x*||^2 - 2 v C_{p,m} (f - f*)^(1/p) + m^2 v^2`,
/// accepted with slack `1e-7 (1 + ||x_k - x*||^2)`.
pub fn check_basic_inequality(
    x_k: ArrayView1<f64>,
    x_next: ArrayView1<f64>,
    v: f64,
    meta: &OptimumMeta,
    f_xk: f64,
    f_star: f64,
    x_star: ArrayView1<f64>,
) -> bool {
    let before = dist_sq(x_k, x_star);
    let after = dist_sq(x_next, x_star);
    let m = meta.m as f64;
    let rhs = before - 2.0 * v * c_pm(meta.p, meta.m, meta.l_max) * gap_root(f_xk, f_star, meta.p) + m * m * v * v;
    after <= rhs + 1e-7 * (1.0 + before)
}

/// Right side of the randomized estimate
/// `E ||x_next - x*||^2 <= ||x_k - x*||^2 - 2 v (R_{p,m} / m) (f - f*)^(1/p) + v^2`.
pub fn expected_basic_inequality_rhs(x_k: ArrayView1<f64>, v: f64, meta: &OptimumMeta, f_xk: f64, f_star: f64, x_star: ArrayView1<f64>) -> f64 {
    let m = meta.m as f64;
    dist_sq(x_k, x_star) - 2.0 * v * (r_pm(meta.p, meta.m, meta.l_max) / m) * gap_root(f_xk, f_star, meta.p) + v * v
}

/// The Hölder descent property of a unit quasi-subgradient `g` at `x` with
/// respect to a minimizer `x_star`: `h(x) - h(x*) <= L <g, x - x*>^p`.
pub fn check_descent_inequality(component: &dyn ComponentFunction, x: ArrayView1<f64>, g: ArrayView1<f64>, x_star: ArrayView1<f64>, tol: f64) -> bool {
    let h = component.hoelder();
    let lhs = component.value(x) - component.value(x_star);
    if lhs <= tol {
        return true;
    }
    let diff = &x - &x_star;
    let inner = dot(g, diff.view());
    inner > 0.0 && lhs <= h.l * inner.powf(h.p) + tol
}

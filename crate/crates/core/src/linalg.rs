//! Small dense-vector helpers on top of `ndarray`.

use ndarray::{Array1, ArrayView1};

/// A point of the decision space.
pub type Point = Array1<f64>;

pub fn dot(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.dot(&b)
}

pub fn norm(a: ArrayView1<f64>) -> f64 {
    a.dot(&a).sqrt()
}

pub fn dist_sq(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    dist_sq(a, b).sqrt()
}

pub fn all_finite(a: ArrayView1<f64>) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: ArrayView1<f64>, y: &mut Array1<f64>) {
    y.scaled_add(alpha, &x);
}

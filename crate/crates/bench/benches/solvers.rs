use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array1;

use qsum_core::problems::mcdpe::{estimate_all_lipschitz, DOMAIN_EPS};
use qsum_core::problems::{default_targets, generate_mcdpe, mcdpe_projector, sor_direct_problem};
use qsum_core::rng::rng_from_seed;
use qsum_core::solvers::{incsgm_cycle, randsgm_step, DEFAULT_TOL_OPT};
use qsum_core::SumProblem;

fn mcdpe_problem(m: usize, n: usize, s: usize) -> (SumProblem, Array1<f64>) {
    let inst = std::sync::Arc::new(generate_mcdpe(m, n, s, 7).unwrap());
    let targets = default_targets(&inst, 50).unwrap();
    let l = estimate_all_lipschitz(&inst, 32, 7).unwrap();
    let problem = sor_direct_problem(inst, &targets, &l, 1.0).unwrap();
    let x0 = problem.projector().project(Array1::ones(n).view()).unwrap();
    (problem, x0)
}

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("mcdpe_step");
    for (m, n, s) in [(10, 100, 100), (50, 500, 500)] {
        let (problem, x0) = mcdpe_problem(m, n, s);
        let id = format!("{m}x{n}x{s}");
        group.bench_function(BenchmarkId::new("incsgm_cycle", &id), |b| {
            b.iter(|| incsgm_cycle(&problem, x0.view(), 1.0, DEFAULT_TOL_OPT).unwrap())
        });
        let mut rng = rng_from_seed(1);
        group.bench_function(BenchmarkId::new("randsgm_step", &id), |b| {
            b.iter(|| randsgm_step(&problem, x0.view(), 1.0, DEFAULT_TOL_OPT, &mut rng).unwrap())
        });
    }
    group.finish();
}

fn projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("polyhedron_projection");
    for (n, s) in [(100, 100), (500, 500)] {
        let inst = generate_mcdpe(1, n, s, 3).unwrap();
        let proj = mcdpe_projector(&inst, DOMAIN_EPS).unwrap();
        let x = Array1::from_elem(n, 5.0);
        group.bench_function(BenchmarkId::from_parameter(format!("{n}x{s}")), |b| b.iter(|| proj.project(x.view()).unwrap()));
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = steps, projection
}
criterion_main!(benches);

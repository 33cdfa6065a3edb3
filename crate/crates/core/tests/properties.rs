use ndarray::Array1;
use proptest::prelude::*;

use qsum_core::linalg::{dist, dot};
use qsum_core::problems::mcdpe::{mcdpe_ratio, ratio_quasi_subgradient};
use qsum_core::problems::{generate_mcdpe, random_halfspace_system, RandomSystemSpec};
use qsum_core::projection::{Halfspace, Polyhedron, Projector};
use qsum_core::rng::rng_from_seed;
use qsum_core::solvers::randsgm::RandStep;
use qsum_core::solvers::{check_descent_inequality, incsgm_cycle, randsgm_step, DEFAULT_TOL_OPT};
use qsum_core::{c_pm, r_pm, Point};

fn vec_in(n: usize, r: f64) -> impl Strategy<Value = Point> {
    prop::collection::vec(-r..r, n).prop_map(Array1::from)
}

proptest! {
    #[test]
    fn closed_form_projections_are_idempotent_and_nonexpansive(
        x in vec_in(4, 10.0),
        y in vec_in(4, 10.0),
        lo in vec_in(4, 3.0),
        width in prop::collection::vec(0.0..3.0f64, 4),
        normal in vec_in(4, 1.0),
        offset in -2.0..2.0f64,
    ) {
        let hi = &lo + &Array1::from(width);
        let mut projectors = vec![Projector::NonnegOrthant, Projector::boxed(lo, hi).unwrap()];
        if let Ok(h) = Halfspace::new(normal, offset) {
            projectors.push(Projector::Halfspace(h));
        }
        for p in &projectors {
            let px = p.project(x.view()).unwrap();
            let py = p.project(y.view()).unwrap();
            prop_assert!(p.contains(px.view(), 1e-12));
            prop_assert!(dist(p.project(px.view()).unwrap().view(), px.view()) <= 1e-12);
            prop_assert!(dist(px.view(), py.view()) <= dist(x.view(), y.view()) + 1e-12);
        }
    }

    #[test]
    fn polyhedron_projection_beats_every_sampled_feasible_point(seed in 0u64..500, x in vec_in(3, 6.0)) {
        let sys = random_halfspace_system(&RandomSystemSpec::new(3, 4), seed).unwrap();
        let poly: Polyhedron = sys.solution_polyhedron().unwrap();
        let px = poly.project(x.view()).unwrap().point;
        prop_assert!(poly.max_violation(px.view()) <= 1e-9);
        let d = dist(px.view(), x.view());
        // The known solution and its projections toward x are feasible.
        for t in [0.0, 0.25, 0.5] {
            let z = &sys.reference_solution + &((&px - &sys.reference_solution) * t);
            prop_assert!(d <= dist(z.view(), x.view()) + 1e-9);
        }
    }

    #[test]
    fn incsgm_cycle_moves_at_most_m_v(seed in 0u64..200, v in 0.01..2.0f64, x in vec_in(5, 8.0)) {
        let sys = random_halfspace_system(&RandomSystemSpec::new(5, 4), seed).unwrap();
        let (next, evals) = incsgm_cycle(&sys.problem, x.view(), v, DEFAULT_TOL_OPT).unwrap();
        prop_assert!(evals <= 4);
        prop_assert!(dist(next.view(), x.view()) <= evals as f64 * v + 1e-12);
    }

    #[test]
    fn randsgm_step_moves_at_most_v(seed in 0u64..200, v in 0.01..2.0f64, x in vec_in(5, 8.0)) {
        let sys = random_halfspace_system(&RandomSystemSpec::new(5, 4), seed).unwrap();
        let mut rng = rng_from_seed(seed);
        match randsgm_step(&sys.problem, x.view(), v, DEFAULT_TOL_OPT, &mut rng).unwrap() {
            RandStep::Step { point, omega } => {
                prop_assert!(omega < 4);
                prop_assert!(dist(point.view(), x.view()) <= v + 1e-12);
            }
            RandStep::AlreadyOptimal => prop_assert!(sys.problem.in_solution_set(x.view(), 0.0).unwrap()),
        }
    }

    #[test]
    fn feasibility_components_satisfy_descent_property(seed in 0u64..200, x in vec_in(4, 8.0)) {
        let sys = random_halfspace_system(&RandomSystemSpec::new(4, 3), seed).unwrap();
        for c in sys.problem.components() {
            if c.value(x.view()) > 0.0 {
                let g = c.unit_quasi_subgradient(x.view()).unwrap();
                prop_assert!(check_descent_inequality(c.as_ref(), x.view(), g.view(), sys.reference_solution.view(), 1e-9));
            }
        }
    }

    #[test]
    fn ratio_oracle_is_a_normal_to_the_superlevel_set(seed in 0u64..100, t in 0.01..0.5f64) {
        let inst = generate_mcdpe(2, 3, 1, seed).unwrap();
        let x: Point = Array1::from(vec![1.0, 2.0, 1.5]);
        let r = mcdpe_ratio(&inst, 0, x.view()).unwrap();
        let g = ratio_quasi_subgradient(&inst, 0, x.view()).unwrap();
        // Moving against g raises the ratio; moving along g never does.
        let up = &x - &(&g * t);
        let down = &x + &(&g * t);
        prop_assert!(mcdpe_ratio(&inst, 0, up.view()).unwrap() > r);
        if down.iter().all(|&v| v > 0.0) {
            prop_assert!(mcdpe_ratio(&inst, 0, down.view()).unwrap() < r);
        }
        prop_assert!((dot(g.view(), g.view()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stepsize_constants_share_the_hoelder_scale(p in 0.1..3.0f64, m in 1usize..200, l in 0.1..10.0f64) {
        let c = c_pm(p, m, l);
        let r = r_pm(p, m, l);
        prop_assert!(c > 0.0 && r > 0.0);
        let e = 1.0 - 1.0 / p;
        let mf = m as f64;
        let quotient = (2.0 * mf).powf(e).min(1.0) / mf.powf(e).min(1.0);
        prop_assert!((c / r - quotient).abs() <= 1e-12 * quotient);
        prop_assert!(c.max(r) <= l.powf(-1.0 / p) * (1.0 + 1e-12));
    }
}

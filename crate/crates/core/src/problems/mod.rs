//! Problem generators and their oracles.

pub mod examples;
pub mod feasibility;
pub mod mcdpe;

pub use examples::{make_example3, make_example4};
pub use feasibility::{
    make_feasibility_problem, random_halfspace_system, BallConstraint, Constraint, FeasibilityComponent, HalfspaceSystem,
    LinearConstraint, RandomSystemSpec,
};
pub use mcdpe::{
    default_targets, estimate_component_maximum, estimate_lipschitz, generate_mcdpe, mcdpe_projector, mcdpe_ratio,
    ratio_quasi_subgradient, sor_direct_problem, sor_to_sum_problem, McdpeInstance,
};

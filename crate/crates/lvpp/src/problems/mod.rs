//! Benchmark problems with their data and exact solutions.

mod eriksson_johnson;
mod lambert;
mod obstacle;
pub mod topopt;

pub use eriksson_johnson::{
    eriksson_johnson_exact, eriksson_johnson_gradient, eriksson_johnson_roots, BoundedAdvectionBenchmark,
};
pub use lambert::lambert_w_branch;
pub use obstacle::{
    biactive_problem, nonsmooth_multiplier_problem, obstacle_problem_by_name, spherical_constants,
    spherical_obstacle_problem, strict_complementarity_problem, Domain, ExactObstacle, ObstacleProblem, ScalarFn,
    VectorFn, SPHERE_CONE_SLOPE,
};

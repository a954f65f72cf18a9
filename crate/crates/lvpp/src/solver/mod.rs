//! Proximal solvers built on latent variables.

mod advdiff;
mod entropic;
mod hminus1;
mod kkt;
mod mirror;
mod obstacle;
mod report;

pub use advdiff::{
    galerkin_advection_diffusion, lvpp_advection_diffusion, AdvDiffOptions, AdvDiffRun, AdvectionDiffusion,
};
pub use entropic::{solve_entropic_poisson, EntropicSolution};
pub use hminus1::{compute_hminus1_norm, inf_sup_constant, RieszMap};
pub use kkt::{check_kkt, KktResiduals};
pub use mirror::{
    mirror_descent, primal_field, solve_translation, EqualityConstraint, MirrorHistory, MirrorOptions, MirrorStep,
};
pub use obstacle::{
    benchmark_setup, lvpp_obstacle, newton_subproblem, Discretization, ElementPair, LatentLink, LatentMap, LatentState,
    NewtonOutcome, NewtonSettings, ObstacleOptions, ObstacleRun, Subproblem, MEAN_ROUNDOFF,
};
pub use report::{count_linear_solves, fmt_sig, IterationRow, SolveReport, CSV_HEADER};

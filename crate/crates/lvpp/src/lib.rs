//! Latent variable proximal Galerkin (LVPP) finite elements.
//!
//! The crate solves pointwise bound-constrained variational problems by
//! replacing the constraint with an entropy-regularized proximal sequence of
//! smooth saddle-point problems. The primal iterate is recovered from a latent
//! field through `exp` or `sigmoid`, so every iterate is strictly feasible.
//!
//! Modules are layered bottom-up: [`entropy`] and [`schedules`] are pure
//! scalar code, [`mesh`] and [`fespace`] build discretizations, [`linalg`]
//! holds sparse storage and solvers, [`solver`] runs the outer and inner
//! iterations, [`problems`] defines benchmarks and [`oracle`] holds the
//! brute-force reference computations used to check everything else.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod entropy;
pub mod error;
pub mod fespace;
pub mod linalg;
pub mod mesh;
pub mod oracle;
pub mod par;
pub mod problems;
pub mod schedules;
pub mod solver;

pub use error::{Error, Result};

use std::time::Instant;

use super::obstacle::{newton_subproblem, Discretization, ElementPair, LatentLink, NewtonSettings, Subproblem};
use super::report::{IterationRow, SolveReport};
use crate::entropy::{lnit, sigmoid};
use crate::error::{Error, Result};
use crate::fespace::assemble_convection;
use crate::linalg::{solve_general, DirichletReduction};
use crate::mesh::Point;
use crate::schedules::StepSchedule;

/// `−ε Δu + β · ∇u = f` with `u = g` on the boundary.
pub struct AdvectionDiffusion<'a> {
    pub diffusion: f64,
    pub beta: [f64; 2],
    pub f: &'a (dyn Fn(Point) -> f64 + Sync),
    pub g: &'a (dyn Fn(Point) -> f64 + Sync),
}

#[derive(Clone, Copy, Debug)]
pub struct AdvDiffOptions {
    /// Proximal parameter of the `H¹` term.
    pub rho: f64,
    pub iterations: usize,
    pub newton: NewtonSettings,
    /// Distance from the bounds used when clamping data before taking `lnit`.
    pub clamp: f64,
}

impl Default for AdvDiffOptions {
    fn default() -> Self {
        AdvDiffOptions {
            rho: 1.0,
            iterations: 2,
            newton: NewtonSettings { epsilon: 1e-6, tol: 1e-10, max_iter: 50 },
            clamp: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdvDiffRun {
    pub report: SolveReport,
    /// Plain Galerkin solution used as initial guess.
    pub galerkin: Vec<f64>,
    pub u: Vec<f64>,
    /// Nodal latent values; `ũ_h = sigmoid ψ_h`.
    pub psi: Vec<f64>,
}

/// Standard nodal P1 Galerkin solution.
pub fn galerkin_advection_diffusion(disc: &Discretization, data: &AdvectionDiffusion) -> Result<Vec<f64>> {
    if disc.pair != ElementPair::LumpedP1 {
        return Err(Error::InvalidParameter("advection-diffusion is implemented for the nodal P1 pair".into()));
    }
    let conv = assemble_convection(&disc.mesh, &disc.space_v, data.beta)?;
    let a = disc.stiffness.add_scaled(1.0, &conv.scaled(1.0 / data.diffusion))?.scaled(data.diffusion);
    let rhs = disc.load(data.f)?;
    let g = disc.boundary_values(data.g);
    let red = DirichletReduction::new(disc.n_v(), disc.space_v.fixed());
    let (a_ii, b_i) = red.reduce(&a, &rhs, &g);
    let x = if a_ii.nrows() == 0 { Vec::new() } else { solve_general(&a_ii, &b_i)? };
    Ok(red.expand(&x, &g))
}

/// Bound-preserving proximal iteration for `0 ≤ u ≤ 1`, started from the
/// Galerkin solution.
pub fn lvpp_advection_diffusion(
    disc: &Discretization,
    data: &AdvectionDiffusion,
    schedule: &mut StepSchedule,
    opts: &AdvDiffOptions,
) -> Result<AdvDiffRun> {
    let start = Instant::now();
    if !(opts.rho > 0.0) || !(opts.clamp > 0.0 && opts.clamp < 0.5) {
        return Err(Error::InvalidParameter("rho must be positive and the clamp inside (0, 1/2)".into()));
    }
    let galerkin = galerkin_advection_diffusion(disc, data)?;
    let clamp = |v: f64| v.clamp(opts.clamp, 1.0 - opts.clamp);
    let g_clamped = |x: Point| clamp((data.g)(x));
    let boundary = disc.boundary_values(&g_clamped);
    let conv = assemble_convection(&disc.mesh, &disc.space_v, data.beta)?;
    let load = disc.load(data.f)?;
    let link = LatentLink::unit_interval(disc.n_w());
    let mut u = galerkin.clone();
    let mut psi: Vec<f64> = galerkin.iter().map(|&v| lnit(clamp(v))).collect::<Result<_>>()?;
    let mut report = SolveReport::default();
    let mut lin = 0;
    for k in 1..=opts.iterations {
        let alpha = schedule.next_alpha();
        let (u_prev, psi_prev) = (u.clone(), psi.clone());
        let ku = disc.stiffness.mul_vec(&u_prev);
        let nu = conv.mul_vec(&u_prev);
        let coef = 1.0 / opts.rho - data.diffusion;
        let rhs: Vec<f64> = (0..disc.n_v()).map(|i| alpha * (coef * ku[i] - nu[i] + load[i])).collect();
        let sub = Subproblem {
            stiffness_scale: alpha / opts.rho,
            rhs: &rhs,
            psi_prev: &psi_prev,
            link: &link,
            boundary: &boundary,
        };
        let out = newton_subproblem(disc, &sub, &mut u, &mut psi, opts.newton)?;
        lin += out.linear_solves;
        let e: Vec<f64> = u.iter().zip(&u_prev).map(|(a, b)| a - b).collect();
        report.rows.push(IterationRow {
            k,
            alpha,
            inc_h1: disc.h1_norm(&e),
            inc_l2: disc.l2_norm(&e),
            newton_its: out.iterations,
            lin_solves: lin,
            energy: f64::NAN,
            min_gap: psi.iter().map(|&p| sigmoid(p).min(1.0 - sigmoid(p))).fold(f64::INFINITY, f64::min),
            min_excess: u.iter().map(|&v| v.min(1.0 - v)).fold(f64::INFINITY, f64::min),
        });
    }
    report.converged = true;
    report.wall_time = start.elapsed().as_secs_f64();
    report.push_meta("diffusion", data.diffusion);
    report.push_meta("rho", opts.rho);
    report.push_meta("schedule", schedule.rule());
    report.push_meta("cells", disc.mesh.n_cells());
    Ok(AdvDiffRun { report, galerkin, u, psi })
}

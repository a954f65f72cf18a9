use std::time::Instant;

use super::report::{IterationRow, SolveReport};
use crate::entropy::{exp_clamped, lnit, sigmoid, sigmoid_derivative};
use crate::error::{Error, Result};
use crate::fespace::{
    assemble_coupling, assemble_coupling_lumped, assemble_load, assemble_mass, assemble_stiffness, build_space,
    lumped_mass, Coefficient, FeSpace, QuadratureRule, SpaceKind, NORM_DEGREE, SADDLE_DEGREE,
};
use crate::linalg::{condense_and_solve, condense_cells, CellBlock, CsrMatrix, DirichletReduction, SaddleSystem};
use crate::mesh::{BoundaryTag, Mesh, Point};
use crate::problems::ObstacleProblem;
use crate::schedules::{StepRule, StepSchedule, DEFAULT_CAP};

/// Pairing of the primal and latent spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ElementPair {
    /// Continuous P1 plus a cubic bubble per cell, with cellwise constant latent variable.
    #[default]
    BubbleP0,
    /// Nodal P1 for both fields, coupled through the vertex quadrature rule.
    LumpedP1,
}

/// Spaces and mesh-dependent matrices shared by every subproblem on one mesh.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub mesh: Mesh,
    pub pair: ElementPair,
    pub space_v: FeSpace,
    pub space_w: FeSpace,
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// `B[i, j] = ∫ φ_j v_i`.
    pub coupling: CsrMatrix,
    /// `∫ φ_j` for every latent basis function.
    pub w_weights: Vec<f64>,
    /// Point at which each latent dof is sampled: cell centroids or vertices.
    pub w_points: Vec<Point>,
    cell_stiffness: Vec<[[f64; 4]; 4]>,
}

impl Discretization {
    /// Dirichlet conditions on the whole boundary.
    pub fn new(mesh: Mesh, pair: ElementPair) -> Result<Self> {
        Self::with_dirichlet_where(mesh, pair, |_| true)
    }

    /// Dirichlet conditions on boundary edges whose tag satisfies `pred`.
    pub fn with_dirichlet_where(mesh: Mesh, pair: ElementPair, pred: impl Fn(BoundaryTag) -> bool) -> Result<Self> {
        let (kv, kw) = match pair {
            ElementPair::BubbleP0 => (SpaceKind::P1Bubble, SpaceKind::P0Broken),
            ElementPair::LumpedP1 => (SpaceKind::P1Nodal, SpaceKind::P1Nodal),
        };
        let space_v = build_space(&mesh, kv).with_dirichlet_where(&mesh, pred);
        let space_w = build_space(&mesh, kw).without_dirichlet();
        let stiffness = assemble_stiffness(&mesh, &space_v, Coefficient::Const(1.0))?;
        let mass = assemble_mass(&mesh, &space_v)?;
        let (coupling, w_weights, w_points, cell_stiffness) = match pair {
            ElementPair::BubbleP0 => {
                let q = QuadratureRule::with_degree(SADDLE_DEGREE)?;
                let cell_stiffness = crate::par::map_range(mesh.n_cells(), |c| {
                    let geom = mesh.geometry(c);
                    let mut k = [[0.0; 4]; 4];
                    for (l, w) in q.points.iter().zip(&q.weights) {
                        let g = space_v.basis_grads(&geom, *l);
                        for i in 0..4 {
                            for j in 0..4 {
                                k[i][j] += w * 2.0 * geom.area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                            }
                        }
                    }
                    k
                });
                let areas = (0..mesh.n_cells()).map(|c| mesh.geometry(c).area).collect();
                let cents = (0..mesh.n_cells()).map(|c| mesh.geometry(c).centroid()).collect();
                (assemble_coupling(&mesh, &space_v, &space_w)?, areas, cents, cell_stiffness)
            }
            ElementPair::LumpedP1 => (
                assemble_coupling_lumped(&mesh, &space_v, &space_w)?,
                lumped_mass(&mesh),
                mesh.vertices.clone(),
                Vec::new(),
            ),
        };
        Ok(Discretization {
            mesh,
            pair,
            space_v,
            space_w,
            stiffness,
            mass,
            coupling,
            w_weights,
            w_points,
            cell_stiffness,
        })
    }

    pub fn n_v(&self) -> usize {
        self.space_v.ndofs()
    }

    pub fn n_w(&self) -> usize {
        self.space_w.ndofs()
    }

    /// `∫ f v_i`.
    pub fn load(&self, f: &(dyn Fn(Point) -> f64 + Sync)) -> Result<Vec<f64>> {
        assemble_load(&self.mesh, &self.space_v, f, NORM_DEGREE)
    }

    /// Full primal vector holding `g` at Dirichlet vertices and zero elsewhere.
    pub fn boundary_values(&self, g: &(dyn Fn(Point) -> f64 + Sync)) -> Vec<f64> {
        let mut out = vec![0.0; self.n_v()];
        for (i, fixed) in self.space_v.fixed().iter().enumerate() {
            if *fixed {
                out[i] = g(self.mesh.vertices[i]);
            }
        }
        out
    }

    /// `∫ φ_j · lower` for every latent basis function (vertex rule when lumped).
    pub fn lower_moments(&self, lower: &(dyn Fn(Point) -> f64 + Sync)) -> Result<Vec<f64>> {
        match self.pair {
            ElementPair::BubbleP0 => {
                let q = QuadratureRule::with_degree(NORM_DEGREE)?;
                Ok(crate::par::map_range(self.mesh.n_cells(), |c| q.integrate(&self.mesh.geometry(c), |_, x| lower(x))))
            }
            ElementPair::LumpedP1 => {
                Ok(self.w_weights.iter().zip(&self.w_points).map(|(m, p)| m * lower(*p)).collect())
            }
        }
    }

    pub fn l2_norm(&self, e: &[f64]) -> f64 {
        self.mass.quad_form(e).max(0.0).sqrt()
    }

    pub fn h1_norm(&self, e: &[f64]) -> f64 {
        (self.mass.quad_form(e) + self.stiffness.quad_form(e)).max(0.0).sqrt()
    }

    /// `½ uᵀKu − Fᵀu`.
    pub fn energy(&self, u: &[f64], load: &[f64]) -> f64 {
        0.5 * self.stiffness.quad_form(u) - crate::linalg::dot(load, u)
    }
}

/// How the latent variable maps to the primal one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatentMap {
    /// `ũ = lower + exp ψ`.
    Exp,
    /// `ũ = lower + width · sigmoid ψ`.
    Sigmoid,
}

impl LatentMap {
    #[inline]
    pub fn value(&self, psi: f64) -> f64 {
        match self {
            LatentMap::Exp => exp_clamped(psi),
            LatentMap::Sigmoid => sigmoid(psi),
        }
    }

    #[inline]
    pub fn derivative(&self, psi: f64) -> f64 {
        match self {
            LatentMap::Exp => exp_clamped(psi),
            LatentMap::Sigmoid => sigmoid_derivative(psi),
        }
    }

    /// Latent value mapping to `v`, if `v` is in the range of the map.
    pub fn inverse(&self, v: f64) -> Option<f64> {
        match self {
            LatentMap::Exp => (v > 0.0).then(|| v.ln()),
            LatentMap::Sigmoid => lnit(v).ok(),
        }
    }

    /// Whether a local average of `(u − lower) / width` lies in the closed
    /// range of the map, up to roundoff.
    pub fn admits(&self, mean: f64) -> bool {
        match self {
            LatentMap::Exp => mean >= -MEAN_ROUNDOFF,
            LatentMap::Sigmoid => (-MEAN_ROUNDOFF..=1.0 + MEAN_ROUNDOFF).contains(&mean),
        }
    }

    /// Whether a Newton step from `psi` to `target` may skip the step limit:
    /// it moves further into saturation, where the latent variable legitimately
    /// diverges on the contact set, or it ends in the saturated range.
    pub fn safe_step(&self, psi: f64, target: f64) -> bool {
        match self {
            LatentMap::Exp => target <= psi || target <= NEGLIGIBLE_LATENT,
            LatentMap::Sigmoid => {
                target * psi >= 0.0 && (target.abs() >= psi.abs() || target.abs() >= -NEGLIGIBLE_LATENT)
            }
        }
    }
}

/// Data of the constraint equation `(u, φ) − (ũ(ψ), φ) = 0`.
#[derive(Clone, Debug)]
pub struct LatentLink {
    pub map: LatentMap,
    /// `∫ φ_j · lower`.
    pub lower_moments: Vec<f64>,
    /// Distance between the bounds per latent dof (1 for one-sided bounds).
    pub width: Vec<f64>,
}

impl LatentLink {
    pub fn one_sided(lower_moments: Vec<f64>) -> Self {
        let n = lower_moments.len();
        LatentLink { map: LatentMap::Exp, lower_moments, width: vec![1.0; n] }
    }

    pub fn unit_interval(n: usize) -> Self {
        LatentLink { map: LatentMap::Sigmoid, lower_moments: vec![0.0; n], width: vec![1.0; n] }
    }

    /// `ũ − lower` at latent dof `j`.
    #[inline]
    pub fn gap(&self, j: usize, psi: f64) -> f64 {
        self.width[j] * self.map.value(psi)
    }
}

/// One proximal subproblem
///
/// ```text
/// s (∇u, ∇v) + (ψ, v) = ⟨rhs, v⟩ + (ψ_prev, v)
/// (u, φ) − (ũ(ψ), φ)  = 0
/// ```
///
/// with `u` equal to `boundary` on Dirichlet dofs.
#[derive(Clone, Copy, Debug)]
pub struct Subproblem<'a> {
    pub stiffness_scale: f64,
    pub rhs: &'a [f64],
    pub psi_prev: &'a [f64],
    pub link: &'a LatentLink,
    pub boundary: &'a [f64],
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonSettings {
    /// Hessian regularization added to the latent block.
    pub epsilon: f64,
    /// Stop once `‖u − w‖_{L²} ≤ tol` for consecutive iterates.
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOutcome {
    pub iterations: usize,
    pub linear_solves: usize,
    pub last_update: f64,
}

fn linearized_bubble(
    disc: &Discretization,
    sub: &Subproblem,
    r_v: &[f64],
    psi: &[f64],
    eps: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mesh = &disc.mesh;
    let nv = mesh.n_vertices();
    let s = sub.stiffness_scale;
    let link = sub.link;
    let blocks: Vec<CellBlock> = crate::par::map_range(mesh.n_cells(), |c| {
        let k = &disc.cell_stiffness[c];
        let area = disc.w_weights[c];
        let third = area / 3.0;
        let bubble_mean = 0.45 * area;
        let d = link.width[c] * link.map.derivative(psi[c]);
        let mut a_xx = [[0.0; 3]; 3];
        let mut a_xy = [[0.0; 2]; 3];
        for i in 0..3 {
            for j in 0..3 {
                a_xx[i][j] = s * k[i][j];
            }
            a_xy[i] = [s * k[i][3], third];
        }
        CellBlock {
            dofs: mesh.cells[c],
            a_xx,
            a_xy,
            a_yy: [[s * k[3][3], bubble_mean], [bubble_mean, -(d + eps) * area]],
            r_y: [r_v[nv + c], link.lower_moments[c] + area * link.gap(c, psi[c])],
        }
    });
    let fixed = &disc.space_v.fixed()[..nv];
    let sol = condense_cells(nv, &blocks, &r_v[..nv], fixed, &sub.boundary[..nv])?;
    let mut u = sol.x;
    u.extend(sol.y.iter().map(|y| y[0]));
    let delta = sol.y.iter().map(|y| y[1]).collect();
    Ok((u, delta))
}

fn linearized_lumped(
    disc: &Discretization,
    sub: &Subproblem,
    r_v: &[f64],
    psi: &[f64],
    eps: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let red = DirichletReduction::new(disc.n_v(), disc.space_v.fixed());
    let a = disc.stiffness.scaled(sub.stiffness_scale);
    let (a_ii, rhs_v) = red.reduce(&a, r_v, sub.boundary);
    let b = red.restrict_rows(&disc.coupling);
    let link = sub.link;
    let m = &disc.w_weights;
    let c: Vec<f64> = (0..disc.n_w())
        .map(|j| m[j] * (link.width[j] * link.map.derivative(psi[j]) + eps).max(LATENT_CURVATURE_FLOOR))
        .collect();
    let mut rhs_w: Vec<f64> = (0..disc.n_w()).map(|j| link.lower_moments[j] + m[j] * link.gap(j, psi[j])).collect();
    for (i, fixed) in disc.space_v.fixed().iter().enumerate() {
        if *fixed {
            rhs_w[i] -= m[i] * sub.boundary[i];
        }
    }
    let sys = SaddleSystem { a: a_ii, b, c, rhs_v, rhs_w };
    let (u_free, mut delta) = condense_and_solve(&sys)?;
    // `δ = C⁻¹(Bᵀu − rhs_w)` loses every digit where `C` is tiny; on free
    // nodes the momentum row `(A u)_i + m_i δ_i = rhs_i` is then accurate.
    let au = sys.a.mul_vec(&u_free);
    for (local, &i) in red.free().iter().enumerate() {
        let (cols, vals) = sys.a.row(local);
        let row_size: f64 =
            cols.iter().zip(vals).map(|(&k, v)| (v * u_free[k]).abs()).sum::<f64>() + sys.rhs_v[local].abs();
        let via_row = row_size / m[i];
        let via_link = (m[i] * u_free[local]).abs().max(sys.rhs_w[i].abs()) / sys.c[i];
        if via_row < via_link {
            delta[i] = (sys.rhs_v[local] - au[local]) / m[i];
        }
    }
    Ok((red.expand(&u_free, sub.boundary), delta))
}

/// Largest latent step per dof in one Newton iteration, unless the step heads
/// into saturation (see [`LatentMap::safe_step`]).
pub const MAX_LATENT_STEP: f64 = 10.0;

/// Slack allowed on local averages when checking them against the range of
/// the latent map.
pub const MEAN_ROUNDOFF: f64 = 1e-12;

/// Lower bound on the latent curvature `ũ′(ψ) + ε` in the lumped elimination,
/// keeping `1/C` finite.
const LATENT_CURVATURE_FLOOR: f64 = 1e-200;

/// Below this latent value (above its negative for the sigmoid) the map is
/// saturated, so steps that stay beyond it are taken as is.
pub const NEGLIGIBLE_LATENT: f64 = -40.0;

/// Newton iteration (with the latent block shifted by `epsilon`) for one
/// subproblem, updating `u` and `psi` in place.
pub fn newton_subproblem(
    disc: &Discretization,
    sub: &Subproblem,
    u: &mut Vec<f64>,
    psi: &mut [f64],
    settings: NewtonSettings,
) -> Result<NewtonOutcome> {
    let (nv, nw) = (disc.n_v(), disc.n_w());
    if u.len() != nv || psi.len() != nw || sub.rhs.len() != nv || sub.boundary.len() != nv || sub.psi_prev.len() != nw {
        return Err(Error::Dimension("subproblem vectors do not match the discretization".into()));
    }
    if sub.link.lower_moments.len() != nw || sub.link.width.len() != nw {
        return Err(Error::Dimension("latent link does not match the latent space".into()));
    }
    if !(settings.epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("Hessian shift must be nonnegative, got {}", settings.epsilon)));
    }
    let mut update = f64::INFINITY;
    for it in 1..=settings.max_iter {
        let diff: Vec<f64> = sub.psi_prev.iter().zip(psi.iter()).map(|(a, b)| a - b).collect();
        let bd = disc.coupling.mul_vec(&diff);
        let r_v: Vec<f64> = sub.rhs.iter().zip(&bd).map(|(r, b)| r + b).collect();
        let (u_new, delta) = match disc.pair {
            ElementPair::BubbleP0 => linearized_bubble(disc, sub, &r_v, psi, settings.epsilon)?,
            ElementPair::LumpedP1 => linearized_lumped(disc, sub, &r_v, psi, settings.epsilon)?,
        };
        if u_new.iter().chain(&delta).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("Newton iterate {it}")));
        }
        let e: Vec<f64> = u_new.iter().zip(u.iter()).map(|(a, b)| a - b).collect();
        update = disc.l2_norm(&e);
        *u = u_new;
        let mut capped = false;
        let mut moments = None;
        for j in 0..nw {
            let target = psi[j] + delta[j];
            if delta[j].abs() <= MAX_LATENT_STEP || sub.link.map.safe_step(psi[j], target) {
                psi[j] = target;
                continue;
            }
            capped = true;
            // Far from its target the linearized map is useless; restart from
            // the latent value that matches the current local average.
            let bu = moments.get_or_insert_with(|| disc.coupling.mul_transpose_vec(u));
            let mean = (bu[j] - sub.link.lower_moments[j]) / (disc.w_weights[j] * sub.link.width[j]);
            let dir = delta[j].signum();
            let jump = sub.link.map.inverse(mean).filter(|t| (t - psi[j]) * dir > MAX_LATENT_STEP);
            psi[j] = match jump {
                Some(t) if dir > 0.0 => t.min(target),
                Some(t) => t.max(target),
                None => psi[j] + dir * MAX_LATENT_STEP,
            };
        }
        if update <= settings.tol && !capped {
            let bu = moments.get_or_insert_with(|| disc.coupling.mul_transpose_vec(u));
            let consistent = (0..nw).all(|j| {
                let mean = (bu[j] - sub.link.lower_moments[j]) / (disc.w_weights[j] * sub.link.width[j]);
                sub.link.map.admits(mean)
            });
            if consistent {
                return Ok(NewtonOutcome { iterations: it, linear_solves: it, last_update: update });
            }
        }
    }
    Err(Error::NoConvergence { context: "Newton subproblem".into(), iterations: settings.max_iter, residual: update })
}

/// Primal, latent and multiplier coefficients with per-iteration history.
#[derive(Clone, Debug, Default)]
pub struct LatentState {
    pub u: Vec<f64>,
    pub psi: Vec<f64>,
    /// `(ψ^{k−1} − ψ^k) / α_k`.
    pub lambda: Vec<f64>,
    pub k: usize,
    pub alpha: f64,
    /// `(H¹, L²)` norms of successive primal increments.
    pub increments: Vec<(f64, f64)>,
    pub energies: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ObstacleOptions {
    pub epsilon: f64,
    pub tol_exit: f64,
    /// Newton tolerance of the first subproblem; defaults to a hundredth of the domain diameter.
    pub initial_newton_tol: Option<f64>,
    pub max_outer: usize,
    pub max_newton: usize,
    pub u0: Option<Vec<f64>>,
    pub psi0: Option<Vec<f64>>,
    /// Keep a copy of every outer iterate.
    pub keep_iterates: bool,
}

impl Default for ObstacleOptions {
    fn default() -> Self {
        ObstacleOptions {
            epsilon: 1e-6,
            tol_exit: 1e-6,
            initial_newton_tol: None,
            max_outer: 100,
            max_newton: 100,
            u0: None,
            psi0: None,
            keep_iterates: false,
        }
    }
}

/// Schedule and options used for the named benchmark problems.
///
/// The biactive setting reproduces the published increment table and starts
/// with a tight Newton tolerance. Problems with a nonzero multiplier run with
/// `epsilon = 0`: the regularization shifts the constraint by about
/// `epsilon·α·λ`, which becomes visible once `α` is large.
pub fn benchmark_setup(problem_name: &str) -> (StepRule, ObstacleOptions) {
    let dexp = StepRule::PaperDoubleExp { r: 1.5, q: 1.5, floor: 1.0, cap: DEFAULT_CAP };
    let base = ObstacleOptions::default();
    match problem_name {
        "biactive" => (dexp, ObstacleOptions { initial_newton_tol: Some(1e-6), tol_exit: 1e-10, ..base }),
        "spherical" => (StepRule::Fixed { alpha: 1.0 }, ObstacleOptions { epsilon: 0.0, tol_exit: 1e-6, ..base }),
        "strict" => (dexp, ObstacleOptions { epsilon: 0.0, tol_exit: 1e-10, ..base }),
        _ => (dexp, ObstacleOptions { epsilon: 0.0, ..base }),
    }
}

#[derive(Clone, Debug)]
pub struct ObstacleRun {
    pub report: SolveReport,
    pub state: LatentState,
    /// `(u^k, ψ^k, λ^k)` for `k = 1, 2, ...` when requested.
    pub iterates: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
    pub load: Vec<f64>,
}

fn wrap_outer(e: Error, k: usize) -> Error {
    match e {
        Error::NoConvergence { context, iterations, residual } => {
            Error::NoConvergence { context: format!("{context} in outer iteration {k}"), iterations, residual }
        }
        Error::NonFinite(s) => Error::NonFinite(format!("{s} in outer iteration {k}")),
        other => other,
    }
}

/// Local averages of `u − lower`: per cell for broken latent spaces, per vertex when lumped.
fn min_excess(disc: &Discretization, u: &[f64], link: &LatentLink) -> f64 {
    let bu = disc.coupling.mul_transpose_vec(u);
    bu.iter().zip(&link.lower_moments).zip(&disc.w_weights).map(|((b, l), w)| (b - l) / w).fold(f64::INFINITY, f64::min)
}

/// The latent-variable proximal point loop for `problem` on `disc`.
pub fn lvpp_obstacle(
    disc: &Discretization,
    problem: &ObstacleProblem,
    schedule: &mut StepSchedule,
    opts: &ObstacleOptions,
) -> Result<ObstacleRun> {
    let start = Instant::now();
    let load = disc.load(&*problem.f)?;
    let boundary = disc.boundary_values(&*problem.g);
    let link = LatentLink::one_sided(disc.lower_moments(&*problem.obstacle)?);
    let mut u = opts.u0.clone().unwrap_or_else(|| vec![0.0; disc.n_v()]);
    let mut psi = opts.psi0.clone().unwrap_or_else(|| vec![0.0; disc.n_w()]);
    if u.len() != disc.n_v() || psi.len() != disc.n_w() {
        return Err(Error::Dimension("initial guesses do not match the discretization".into()));
    }
    let mut tol = opts.initial_newton_tol.unwrap_or(1e-2 * disc.mesh.diameter());
    let mut state = LatentState::default();
    let mut report = SolveReport::default();
    let mut iterates = Vec::new();
    let mut lin = 0;
    for k in 1..=opts.max_outer {
        let alpha = schedule.next_alpha();
        let (u_prev, psi_prev) = (u.clone(), psi.clone());
        let rhs: Vec<f64> = load.iter().map(|f| alpha * f).collect();
        let sub =
            Subproblem { stiffness_scale: alpha, rhs: &rhs, psi_prev: &psi_prev, link: &link, boundary: &boundary };
        let settings = NewtonSettings { epsilon: opts.epsilon, tol, max_iter: opts.max_newton };
        let out = newton_subproblem(disc, &sub, &mut u, &mut psi, settings).map_err(|e| wrap_outer(e, k))?;
        lin += out.linear_solves;
        let e: Vec<f64> = u.iter().zip(&u_prev).map(|(a, b)| a - b).collect();
        let (inc_h1, inc_l2) = (disc.h1_norm(&e), disc.l2_norm(&e));
        let lambda: Vec<f64> = psi_prev.iter().zip(&psi).map(|(a, b)| (a - b) / alpha).collect();
        let energy = disc.energy(&u, &load);
        let min_gap = (0..disc.n_w()).map(|j| link.gap(j, psi[j])).fold(f64::INFINITY, f64::min);
        report.rows.push(IterationRow {
            k,
            alpha,
            inc_h1,
            inc_l2,
            newton_its: out.iterations,
            lin_solves: lin,
            energy,
            min_gap,
            min_excess: min_excess(disc, &u, &link),
        });
        state.increments.push((inc_h1, inc_l2));
        state.energies.push(energy);
        state.k = k;
        state.alpha = alpha;
        if opts.keep_iterates {
            iterates.push((u.clone(), psi.clone(), lambda.clone()));
        }
        state.lambda = lambda;
        tol = inc_l2;
        if tol < opts.tol_exit {
            report.converged = true;
            break;
        }
    }
    state.u = u;
    state.psi = psi;
    report.wall_time = start.elapsed().as_secs_f64();
    report.push_meta("problem", problem.name);
    report.push_meta("pair", format!("{:?}", disc.pair));
    report.push_meta("cells", disc.mesh.n_cells());
    report.push_meta("h", format!("{:.6e}", disc.mesh.h()));
    report.push_meta("schedule", schedule.rule());
    report.push_meta("epsilon", opts.epsilon);
    report.push_meta("tol_exit", opts.tol_exit);
    Ok(ObstacleRun { report, state, iterates, load })
}

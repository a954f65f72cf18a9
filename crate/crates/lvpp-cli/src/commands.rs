use std::path::Path;

use anyhow::{Context, Result};
use lvpp::entropy::{neg_entropy_density, sigmoid};
use lvpp::fespace::{build_space, compute_error_norms, ExactSolution, SpaceKind};
use lvpp::linalg::{condense_and_solve, DirichletReduction, SaddleSystem};
use lvpp::mesh::{rectangle_mesh, strip_mesh, unit_square_mesh, BoundaryTag, Mesh, Point, VtkWriter};
use lvpp::oracle::{dense_saddle_solve, psor_obstacle_1d, scalar_mirror_step, scalar_prox_step};
use lvpp::problems::topopt::{topopt_solve, TopOptModel, TopOptProblem};
use lvpp::problems::{obstacle_problem_by_name, BoundedAdvectionBenchmark, ObstacleProblem};
use lvpp::schedules::{theoretical_error_ratio, StepRule, StepSchedule};
use lvpp::solver::{
    benchmark_setup, check_kkt, galerkin_advection_diffusion, lvpp_advection_diffusion, lvpp_obstacle, mirror_descent,
    solve_entropic_poisson, AdvDiffOptions, AdvectionDiffusion, Discretization, ElementPair, MirrorOptions,
    NewtonSettings, ObstacleOptions, ObstacleRun,
};
use rayon::prelude::*;

use crate::config::{ConfigError, ExperimentConfig};
use crate::output::{ensure_dir, metadata_header, write_text, Table};

/// Whether every solve of a command reached its stopping criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    NotConverged,
}

impl Status {
    fn from_all(flags: impl IntoIterator<Item = bool>) -> Self {
        if flags.into_iter().all(|c| c) {
            Status::Converged
        } else {
            Status::NotConverged
        }
    }
}

fn parse_rule(spec: &str) -> Result<StepRule> {
    spec.parse::<StepRule>().map_err(|e| ConfigError(format!("schedule '{spec}': {e}")).into())
}

fn pair(cfg: &ExperimentConfig) -> ElementPair {
    if cfg.lumped.unwrap_or(false) {
        ElementPair::LumpedP1
    } else {
        ElementPair::BubbleP0
    }
}

fn positive(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if x.is_nan() || x <= 0.0 => Err(ConfigError(format!("{name} must be positive, got {x}")).into()),
        _ => Ok(()),
    }
}

fn nonnegative(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if x.is_nan() || x < 0.0 => Err(ConfigError(format!("{name} must be nonnegative, got {x}")).into()),
        _ => Ok(()),
    }
}

struct LevelRun {
    level: usize,
    disc: Discretization,
    run: ObstacleRun,
}

pub fn obstacle(cfg: &ExperimentConfig) -> Result<Status> {
    let name = cfg.problem.as_deref().unwrap_or("biactive");
    let problem = obstacle_problem_by_name(name).map_err(|e| ConfigError(e.to_string()))?;
    let (default_rule, mut opts) = benchmark_setup(problem.name);
    let rule = match &cfg.schedule {
        Some(s) => parse_rule(s)?,
        None => default_rule,
    };
    positive("tol_exit", cfg.tol_exit)?;
    nonnegative("hessian_eps", cfg.hessian_eps)?;
    opts.tol_exit = cfg.tol_exit.unwrap_or(opts.tol_exit);
    opts.epsilon = cfg.hessian_eps.unwrap_or(opts.epsilon);
    opts.max_outer = cfg.max_outer.unwrap_or(opts.max_outer);
    let levels = cfg.levels_or(&[4]);
    let out = cfg.out_dir();
    ensure_dir(&out)?;
    let pair = pair(cfg);

    let runs: Vec<LevelRun> = levels
        .par_iter()
        .map(|&level| -> Result<LevelRun> {
            let disc = Discretization::new(problem.domain.mesh(level)?, pair)?;
            let mut schedule = StepSchedule::new(rule)?;
            let run = lvpp_obstacle(&disc, &problem, &mut schedule, &opts)
                .with_context(|| format!("{} at level {level}", problem.name))?;
            Ok(LevelRun { level, disc, run })
        })
        .collect::<Result<_>>()?;

    let header = metadata_header("obstacle", cfg);
    let mut errors = Table::new(&[
        "level",
        "cells",
        "h",
        "iterations",
        "lin_solves",
        "converged",
        "h1_error",
        "l2_error",
        "lambda_l2_error",
        "complementarity",
        "primal_infeasibility",
        "dual_infeasibility",
    ]);
    for LevelRun { level, disc, run } in &runs {
        let stem = format!("obstacle_{}_L{level}", problem.name);
        write_text(&out, &format!("{stem}.csv"), &format!("{header}{}", run.report.to_csv()))?;
        write_obstacle_vtk(&out.join(format!("{stem}.vtk")), disc, &problem, run)?;
        let (h1, l2, lam) = match &problem.exact {
            Some(ex) => {
                let e = compute_error_norms(
                    &disc.mesh,
                    &disc.space_v,
                    &run.state.u,
                    ExactSolution { value: &*ex.u, gradient: Some(&*ex.grad) },
                );
                let el = compute_error_norms(
                    &disc.mesh,
                    &disc.space_w,
                    &run.state.lambda,
                    ExactSolution { value: &*ex.lambda, gradient: None },
                );
                (e.h1, e.l2, el.l2)
            }
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        let kkt =
            check_kkt(&disc.mesh, &disc.space_v, &run.state.u, &disc.space_w, &run.state.lambda, &*problem.obstacle);
        errors.row(vec![
            (*level).into(),
            disc.mesh.n_cells().into(),
            disc.mesh.h().into(),
            run.report.iterations().into(),
            lvpp::solver::count_linear_solves(&run.report).into(),
            run.report.converged.into(),
            h1.into(),
            l2.into(),
            lam.into(),
            kkt.complementarity.into(),
            kkt.primal_infeasibility.into(),
            kkt.dual_infeasibility.into(),
        ]);
        println!(
            "level {level}: {} iterations, {} linear solves, converged {}, H1 error {}",
            run.report.iterations(),
            lvpp::solver::count_linear_solves(&run.report),
            run.report.converged,
            lvpp::solver::fmt_sig(h1)
        );
    }
    let path = write_text(&out, &format!("obstacle_{}_errors.csv", problem.name), &errors.render(&header))?;
    println!("wrote {}", path.display());
    Ok(Status::from_all(runs.iter().map(|r| r.run.report.converged)))
}

fn write_obstacle_vtk(path: &Path, disc: &Discretization, problem: &ObstacleProblem, run: &ObstacleRun) -> Result<()> {
    let nv = disc.mesh.n_vertices();
    let obstacle: Vec<f64> = disc.mesh.vertices.iter().map(|&x| (problem.obstacle)(x)).collect();
    let writer = VtkWriter::new(&disc.mesh, format!("lvpp obstacle {}", problem.name))
        .point_scalars("u", &run.state.u[..nv])
        .point_scalars("obstacle", &obstacle);
    let writer = match disc.pair {
        ElementPair::BubbleP0 => writer.cell_scalars("psi", &run.state.psi).cell_scalars("lambda", &run.state.lambda),
        ElementPair::LumpedP1 => writer.point_scalars("psi", &run.state.psi).point_scalars("lambda", &run.state.lambda),
    };
    writer.write_file(path).with_context(|| format!("cannot write {}", path.display()))
}

pub fn advdiff(cfg: &ExperimentConfig) -> Result<Status> {
    positive("epsilon", cfg.epsilon)?;
    nonnegative("hessian_eps", cfg.hessian_eps)?;
    let diffusion = cfg.epsilon.unwrap_or(1e-2);
    let bench = BoundedAdvectionBenchmark::new(diffusion).map_err(|e| ConfigError(e.to_string()))?;
    let rule = parse_rule(cfg.schedule.as_deref().unwrap_or("fixed:1"))?;
    let mut opts = AdvDiffOptions::default();
    opts.newton.epsilon = cfg.hessian_eps.unwrap_or(opts.newton.epsilon);
    opts.iterations = cfg.max_outer.unwrap_or(opts.iterations);
    let out = cfg.out_dir();
    ensure_dir(&out)?;
    let header = metadata_header("advdiff", cfg);
    let mut report = Table::new(&["level", "n", "method", "min", "max", "violations", "l2_error"]);
    for level in cfg.levels_or(&[5]) {
        let n = 1usize << level;
        let disc = Discretization::new(rectangle_mesh(0.0, 1.0, 0.0, 1.0, n, n)?, ElementPair::LumpedP1)?;
        let exact = move |x: Point| bench.exact(x);
        let data = AdvectionDiffusion { diffusion, beta: bench.beta, f: &|_| 0.0, g: &exact };
        let mut schedule = StepSchedule::new(rule)?;
        let run = lvpp_advection_diffusion(&disc, &data, &mut schedule, &opts)?;
        let galerkin = galerkin_advection_diffusion(&disc, &data)?;
        let latent: Vec<f64> = run.psi.iter().map(|&p| sigmoid(p)).collect();
        let p1 = build_space(&disc.mesh, SpaceKind::P1Nodal);
        let sol = ExactSolution { value: &exact, gradient: None };
        for (method, field) in [("galerkin", &galerkin), ("proximal", &latent), ("proximal_primal", &run.u)] {
            let (lo, hi) = field.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
            let violations = field.iter().filter(|v| !(**v >= 0.0 && **v <= 1.0)).count();
            let err = compute_error_norms(&disc.mesh, &p1, field, sol).l2;
            report.row(vec![
                level.into(),
                n.into(),
                method.into(),
                lo.into(),
                hi.into(),
                violations.into(),
                err.into(),
            ]);
            println!(
                "n = {n}, {method}: min {} max {}, {violations} bound violations",
                lvpp::solver::fmt_sig(lo),
                lvpp::solver::fmt_sig(hi)
            );
        }
        let vtk = out.join(format!("advdiff_L{level}.vtk"));
        VtkWriter::new(&disc.mesh, "lvpp advection-diffusion")
            .point_scalars("galerkin", &galerkin)
            .point_scalars("proximal", &latent)
            .point_scalars("proximal_primal", &run.u)
            .write_file(&vtk)?;
    }
    let path = write_text(&out, "advdiff_report.csv", &report.render(&header))?;
    println!("wrote {}", path.display());
    Ok(Status::Converged)
}

pub fn topopt(cfg: &ExperimentConfig, checkpoint_every: usize) -> Result<Status> {
    positive("filter_radius", cfg.filter_radius)?;
    positive("itol", cfg.itol)?;
    positive("ntol", cfg.ntol)?;
    let rule = parse_rule(cfg.alpha_rule.as_deref().or(cfg.schedule.as_deref()).unwrap_or("arith:25:0"))?;
    let defaults = MirrorOptions::default();
    let opts = MirrorOptions {
        itol: cfg.itol.unwrap_or(defaults.itol),
        ntol: cfg.ntol.unwrap_or(defaults.ntol),
        max_iter: cfg.max_outer.unwrap_or(200),
        checkpoint_every,
    };
    let out = cfg.out_dir();
    ensure_dir(&out)?;
    let header = metadata_header("topopt", cfg);
    let mut all_converged = true;
    for level in cfg.levels_or(&[5]) {
        let mut problem = TopOptProblem::cantilever(level)?;
        if let Some(r) = cfg.filter_radius {
            problem.filter_radius = r;
        }
        let model = TopOptModel::new(problem)?;
        let mut schedule = StepSchedule::new(rule)?;
        let result = topopt_solve(&model, &mut schedule, opts)?;
        let mut table = Table::new(&["k", "alpha", "objective", "increment", "eta", "constraint_error"]);
        for s in &result.history.steps {
            table.row(vec![
                s.k.into(),
                s.alpha.into(),
                s.objective.into(),
                s.increment.into(),
                s.eta.into(),
                s.constraint_error.into(),
            ]);
        }
        let meta = format!(
            "{header}# level = {level}\n# cells = {}\n# compliance = {}\n# converged = {}\n",
            model.mesh().n_cells(),
            lvpp::solver::fmt_sig(result.compliance),
            result.history.converged
        );
        write_text(&out, &format!("topopt_L{level}.csv"), &table.render(&meta))?;
        for (k, rho) in &result.history.snapshots {
            VtkWriter::new(model.mesh(), format!("lvpp density, step {k}"))
                .cell_scalars("density", rho)
                .write_file(out.join(format!("topopt_L{level}_k{k:04}.vtk")))?;
        }
        VtkWriter::new(model.mesh(), "lvpp density, final")
            .cell_scalars("density", &result.density)
            .write_file(out.join(format!("topopt_L{level}_final.vtk")))?;
        println!(
            "level {level}: {} iterations, compliance {}, converged {}",
            result.iterations(),
            lvpp::solver::fmt_sig(result.compliance),
            result.history.converged
        );
        all_converged &= result.history.converged;
    }
    Ok(Status::from_all([all_converged]))
}

/// `(k, alpha_k, partial sum, error ratio)` for the first `k` steps.
pub fn rate_table(rule: StepRule, k: usize) -> Result<Vec<(usize, f64, f64, f64)>> {
    let alphas = StepSchedule::take(rule, k + 1)?;
    let mut sums = Vec::with_capacity(k + 1);
    let mut s = 0.0;
    for a in &alphas {
        s += a;
        sums.push(s);
    }
    Ok((1..=k)
        .map(|j| {
            let ratio = theoretical_error_ratio(&rule, j as u32).unwrap_or(sums[j - 1] / sums[j]);
            (j, alphas[j - 1], sums[j - 1], ratio)
        })
        .collect())
}

pub fn rates(cfg: &ExperimentConfig, case: &str, k: usize) -> Result<Status> {
    if k == 0 {
        return Err(ConfigError("--k must be at least 1".into()).into());
    }
    let rule = parse_rule(case)?;
    let rows = rate_table(rule, k)?;
    let mut table = Table::new(&["k", "alpha", "partial_sum", "error_ratio"]);
    println!("k  alpha  partial_sum  error_ratio");
    for &(j, a, s, r) in &rows {
        table.row(vec![j.into(), a.into(), s.into(), r.into()]);
        println!("{j} {} {} {}", lvpp::solver::fmt_sig(a), lvpp::solver::fmt_sig(s), lvpp::solver::fmt_sig(r));
    }
    if let Some(out) = &cfg.out {
        ensure_dir(out)?;
        let name = format!("rates_{}.csv", case.replace([':', ','], "_"));
        write_text(out, &name, &table.render(&metadata_header("rates", cfg)))?;
    }
    Ok(Status::Converged)
}

/// One oracle comparison: the measured gap and the bound it should respect.
pub struct Check {
    pub name: &'static str,
    pub delta: f64,
    pub bound: f64,
}

fn strip_discretization(n: usize) -> Result<Discretization> {
    Ok(Discretization::with_dirichlet_where(strip_mesh(n)?, ElementPair::LumpedP1, |t| {
        matches!(t, BoundaryTag::Left | BoundaryTag::Right)
    })?)
}

fn nodal_gap(mesh: &Mesh, u: &[f64], reference: &[f64], n: usize) -> f64 {
    mesh.vertices
        .iter()
        .zip(u)
        .map(|(x, v)| (v - reference[(x[0] * n as f64).round() as usize]).abs())
        .fold(0.0, f64::max)
}

pub fn oracle_checks(n: usize, theta: f64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let h = 1.0 / n as f64;
    let f = -8.0;
    let reference = psor_obstacle_1d(n + 1, &|_| f, &|_| 0.0, (1.0, 1.0), 1e-12)?;

    let disc = strip_discretization(n)?;
    let mut problem = obstacle_problem_by_name("strict")?;
    problem.f = std::sync::Arc::new(move |_| f);
    problem.obstacle = std::sync::Arc::new(|_| 0.0);
    problem.g = std::sync::Arc::new(|_| 1.0);
    problem.exact = None;
    let (rule, _) = benchmark_setup("strict");
    let opts = ObstacleOptions { epsilon: 0.0, tol_exit: 1e-10, ..ObstacleOptions::default() };
    let run = lvpp_obstacle(&disc, &problem, &mut StepSchedule::new(rule)?, &opts)?;
    checks.push(Check {
        name: "strip LVPP vs PSOR max nodal gap",
        delta: nodal_gap(&disc.mesh, &run.state.u, &reference.u, n),
        bound: 10.0 * h * h,
    });

    let settings = NewtonSettings { epsilon: 0.0, tol: 1e-12, max_iter: 200 };
    let entropic = solve_entropic_poisson(&disc, theta, &move |_| f, &|_| 1.0, settings)?;
    let ustar: Vec<f64> = disc.mesh.vertices.iter().map(|p| reference.u[(p[0] * n as f64).round() as usize]).collect();
    let e: Vec<f64> = entropic.u.iter().zip(&ustar).map(|(a, b)| a - b).collect();
    let entropy: f64 =
        ustar.iter().zip(&disc.w_weights).map(|(u, w)| w / h * neg_entropy_density(*u).unwrap_or(0.0)).sum();
    checks.push(Check {
        name: "entropic Poisson vs PSOR gradient gap",
        delta: (disc.stiffness.quad_form(&e) / h).sqrt(),
        bound: (2.0 * theta * (entropy + 1.0)).sqrt(),
    });

    let square = Discretization::new(unit_square_mesh(4)?, ElementPair::BubbleP0)?;
    let red = DirichletReduction::new(square.n_v(), square.space_v.fixed());
    let rhs: Vec<f64> = (0..square.n_v()).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
    let (a, rhs_v) = red.reduce(&square.stiffness, &rhs, &vec![0.0; square.n_v()]);
    let sys = SaddleSystem {
        a,
        b: red.restrict_rows(&square.coupling),
        c: square.w_weights.clone(),
        rhs_v,
        rhs_w: vec![0.0; square.n_w()],
    };
    let (u_dense, _) = dense_saddle_solve(&sys)?;
    let (u_cond, _) = condense_and_solve(&sys)?;
    let gap = u_dense.iter().zip(&u_cond).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    checks.push(Check { name: "condensed vs dense block solve", delta: gap, bound: 1e-10 });

    let mut schedule = StepSchedule::new(StepRule::Fixed { alpha: 0.5 })?;
    let hist = mirror_descent(
        vec![0.0],
        &[[0.0, 0.0]],
        &lvpp::entropy::EntropyKind::boltzmann(),
        |x| Ok((0.5 * x[0] * x[0] + x[0], vec![x[0] + 1.0])),
        None,
        &mut schedule,
        &[1.0],
        MirrorOptions { max_iter: 20, itol: 0.0, ntol: 0.0, checkpoint_every: 0 },
    )?;
    let mut x = 1.0;
    for _ in 0..20 {
        x = scalar_mirror_step(x, 0.5);
    }
    checks.push(Check { name: "mirror descent vs scalar recursion", delta: (hist.primal[0] - x).abs(), bound: 1e-14 });
    let x1 = scalar_prox_step(1.0, 1.0);
    checks.push(Check { name: "scalar proximal step optimality", delta: (x1 + 1.0 + x1.ln()).abs(), bound: 1e-13 });
    Ok(checks)
}

pub fn verify(cfg: &ExperimentConfig) -> Result<Status> {
    positive("theta", cfg.theta)?;
    let theta = cfg.theta.unwrap_or(1e-3);
    let level = cfg.levels_or(&[7])[0];
    let n = (1usize << level).max(4);
    let checks = oracle_checks(n, theta)?;
    let mut table = Table::new(&["check", "delta", "bound", "within_bound"]);
    for c in &checks {
        let ok = c.delta <= c.bound;
        println!(
            "{:<40} delta {}  bound {}  {}",
            c.name,
            lvpp::solver::fmt_sig(c.delta),
            lvpp::solver::fmt_sig(c.bound),
            if ok { "ok" } else { "EXCEEDED" }
        );
        table.row(vec![c.name.into(), c.delta.into(), c.bound.into(), ok.into()]);
    }
    if let Some(out) = &cfg.out {
        ensure_dir(out)?;
        write_text(out, "verify.csv", &table.render(&metadata_header("verify", cfg)))?;
    }
    Ok(Status::Converged)
}

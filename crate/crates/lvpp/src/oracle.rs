//! Brute-force references.
//!
//! Nothing here shares code with the production solvers beyond the sparse
//! matrix type used to pass data in: scalar recursions are solved by plain
//! Newton, saddle systems by dense LU on the unreduced block matrix, and the
//! one-dimensional obstacle problem by projected SOR.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, SaddleSystem};

/// Minimizing `e(x) = x²/2 + x` over `[0, ∞)` with the Boltzmann entropy as
/// Bregman generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarProxProblem {
    pub start: f64,
    pub alpha: f64,
}

impl ScalarProxProblem {
    /// `steps + 1` iterates starting with `start`.
    pub fn proximal_iterates(&self, steps: usize) -> Vec<f64> {
        iterate(self.start, steps, |x| scalar_prox_step(x, self.alpha))
    }

    pub fn mirror_iterates(&self, steps: usize) -> Vec<f64> {
        iterate(self.start, steps, |x| scalar_mirror_step(x, self.alpha))
    }
}

fn iterate(x0: f64, steps: usize, step: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = vec![x0];
    for _ in 0..steps {
        out.push(step(*out.last().unwrap()));
    }
    out
}

/// Root of `α(x + 1) + ln x − ln x_k = 0`.
///
/// Newton runs on `t = ln x`, where the function `α(eᵗ + 1) + t − ln x_k` is
/// increasing and convex, so iterates started right of the root decrease
/// monotonically onto it.
pub fn scalar_prox_step(x_k: f64, alpha: f64) -> f64 {
    assert!(x_k > 0.0 && alpha >= 0.0, "proximal step needs x_k > 0 and alpha >= 0");
    let c = x_k.ln();
    let h = |t: f64| alpha * (t.exp() + 1.0) + t - c;
    let mut t = c;
    for _ in 0..200 {
        let r = h(t);
        let step = r / (alpha * t.exp() + 1.0);
        t -= step;
        if step.abs() <= 1e-16 * t.abs().max(1.0) {
            break;
        }
    }
    t.exp()
}

pub fn scalar_mirror_step(x_k: f64, alpha: f64) -> f64 {
    x_k * (-alpha * (x_k + 1.0)).exp()
}

/// Solves the full indefinite block system `[[A, B], [Bᵀ, −C]]` by dense LU.
pub fn dense_saddle_solve(sys: &SaddleSystem) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = to_dense(&sys.full_matrix());
    let n_v = sys.rhs_v.len();
    let rhs = DVector::from_iterator(m.nrows(), sys.rhs_v.iter().chain(&sys.rhs_w).copied());
    let x = m.lu().solve(&rhs).ok_or(Error::LinearSolver("dense block matrix is singular".into()))?;
    Ok((x.rows(0, n_v).iter().copied().collect(), x.rows(n_v, x.len() - n_v).iter().copied().collect()))
}

pub fn to_dense(a: &CsrMatrix) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplets() {
        m[(i, j)] += v;
    }
    m
}

/// Nonlinear latent system
///
/// ```text
/// A u + B ψ             = r
/// Bᵀ u − weights · map(ψ) = lower
/// ```
///
/// with `A` SPD and `map` increasing.
pub struct LatentSystem<'a> {
    pub a: &'a CsrMatrix,
    pub b: &'a CsrMatrix,
    pub rhs: &'a [f64],
    pub lower: &'a [f64],
    pub weights: &'a [f64],
    pub map: &'a dyn Fn(f64) -> f64,
}

/// Damped fixed point on the latent unknown: `u(ψ) = A⁻¹(r − Bψ)` and
/// `ψ ← ψ + τ (Bᵀu(ψ) − lower − weights · map(ψ)) / weights`.
pub fn picard_latent_solve(
    sys: &LatentSystem,
    psi0: &[f64],
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let a = to_dense(sys.a);
    let b = to_dense(sys.b);
    let chol = a.cholesky().ok_or(Error::NotSpd("fixed-point block".into()))?;
    let r = DVector::from_column_slice(sys.rhs);
    let mut psi = DVector::from_column_slice(psi0);
    let mut last = f64::INFINITY;
    for _ in 0..max_iter {
        let u = chol.solve(&(&r - &b * &psi));
        let btu = b.transpose() * &u;
        let mut change: f64 = 0.0;
        for j in 0..psi.len() {
            let g = btu[j] - sys.lower[j] - sys.weights[j] * (sys.map)(psi[j]);
            let d = damping * g / sys.weights[j];
            psi[j] += d;
            change = change.max(d.abs());
        }
        if !change.is_finite() {
            return Err(Error::NonFinite("fixed-point iteration diverged".into()));
        }
        last = change;
        if change <= tol {
            let u = chol.solve(&(&r - &b * &psi));
            return Ok((u.iter().copied().collect(), psi.iter().copied().collect()));
        }
    }
    Err(Error::NoConvergence { context: "damped fixed point".into(), iterations: max_iter, residual: last })
}

/// Outcome of [`psor_obstacle_1d`].
#[derive(Clone, Debug)]
pub struct PsorSolution {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// `max_i |min(u_i − φ_i, r_i)|` with `r = h (K u − F)`.
    pub residual: f64,
    pub sweeps: usize,
}

pub const PSOR_OMEGA: f64 = 1.5;

/// `−u″ = f` on `(0, 1)`, `u ≥ φ`, `u(0) = g.0`, `u(1) = g.1`, on `n`
/// equispaced nodes with the P1 stiffness `(1/h) tridiag(−1, 2, −1)` and the
/// nodal load `h f(x_i)`.
///
/// Projected SOR is run until it stalls or hits the tolerance; the active set
/// it identifies is then polished by primal-dual active set iterations, each
/// of which is an exact tridiagonal solve.
pub fn psor_obstacle_1d(
    n: usize,
    f: &dyn Fn(f64) -> f64,
    obstacle: &dyn Fn(f64) -> f64,
    g: (f64, f64),
    tol: f64,
) -> Result<PsorSolution> {
    psor_with_omega(n, f, obstacle, g, tol, PSOR_OMEGA)
}

pub fn psor_with_omega(
    n: usize,
    f: &dyn Fn(f64) -> f64,
    obstacle: &dyn Fn(f64) -> f64,
    g: (f64, f64),
    tol: f64,
    omega: f64,
) -> Result<PsorSolution> {
    if n < 3 {
        return Err(Error::InvalidParameter("PSOR needs at least three nodes".into()));
    }
    if !(omega > 0.0 && omega < 2.0) {
        return Err(Error::InvalidParameter(format!("relaxation {omega} outside (0, 2)")));
    }
    let h = 1.0 / (n - 1) as f64;
    let x: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let load: Vec<f64> = x.iter().map(|&xi| h * f(xi)).collect();
    let phi: Vec<f64> = x.iter().map(|&xi| obstacle(xi)).collect();
    if g.0 < phi[0] || g.1 < phi[n - 1] {
        return Err(Error::Domain("boundary data below the obstacle".into()));
    }
    let mut u: Vec<f64> = phi.iter().map(|p| if p.is_finite() { p.max(0.0) } else { 0.0 }).collect();
    u[0] = g.0;
    u[n - 1] = g.1;
    for i in 1..n - 1 {
        u[i] = u[i].max(phi[i]);
    }

    let residual = |u: &[f64]| -> f64 {
        (1..n - 1)
            .map(|i| {
                let r = 2.0 * u[i] - u[i - 1] - u[i + 1] - h * load[i];
                (u[i] - phi[i]).min(r).abs()
            })
            .fold(0.0, f64::max)
    };

    let max_sweeps = 20 * n * n.min(200);
    let mut sweeps = 0;
    let mut res = residual(&u);
    let mut stall_ref = res;
    while res > tol && sweeps < max_sweeps {
        for i in 1..n - 1 {
            let gs = 0.5 * (u[i - 1] + u[i + 1] + h * load[i]);
            u[i] = (u[i] + omega * (gs - u[i])).max(phi[i]);
        }
        sweeps += 1;
        if sweeps % 64 == 0 {
            res = residual(&u);
            if !res.is_finite() {
                return Err(Error::NonFinite("PSOR diverged".into()));
            }
            if res > 0.5 * stall_ref && sweeps >= 2048 {
                break;
            }
            stall_ref = stall_ref.min(res);
        }
    }
    res = residual(&u);

    for _ in 0..(4 * n) {
        let active: Vec<bool> = (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 {
                    return false;
                }
                let lam = 2.0 * u[i] - u[i - 1] - u[i + 1] - h * load[i];
                lam + phi[i] - u[i] > 0.0
            })
            .collect();
        let next = active_set_solve(&load, &phi, &active, h, g);
        let changed = next.iter().zip(&u).any(|(a, b)| (a - b).abs() > 0.0);
        u = next;
        res = residual(&u);
        if !changed {
            break;
        }
    }
    if res > tol {
        return Err(Error::NoConvergence { context: "PSOR".into(), iterations: sweeps, residual: res });
    }
    Ok(PsorSolution { x, u, residual: res, sweeps })
}

/// Tridiagonal solve with `u_i = φ_i` on the active set.
fn active_set_solve(load: &[f64], phi: &[f64], active: &[bool], h: f64, g: (f64, f64)) -> Vec<f64> {
    let n = load.len();
    let mut lower = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    rhs[0] = g.0;
    rhs[n - 1] = g.1;
    for i in 1..n - 1 {
        if active[i] {
            rhs[i] = phi[i];
        } else {
            lower[i] = -1.0;
            diag[i] = 2.0;
            upper[i] = -1.0;
            rhs[i] = h * load[i];
        }
    }
    for i in 1..n {
        let m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    let mut u = vec![0.0; n];
    u[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        u[i] = (rhs[i] - upper[i] * u[i + 1]) / diag[i];
    }
    u
}

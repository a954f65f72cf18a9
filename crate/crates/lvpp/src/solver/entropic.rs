use super::obstacle::{newton_subproblem, Discretization, LatentLink, NewtonSettings, Subproblem};
use crate::error::{Error, Result};
use crate::mesh::Point;

#[derive(Clone, Debug)]
pub struct EntropicSolution {
    pub u: Vec<f64>,
    /// `ln ũ` at the latent dofs.
    pub psi: Vec<f64>,
    pub newton_its: usize,
}

/// Solves `(∇u, ∇v) + θ (ln u, v) = (f, v)` with `u = g > 0` on the
/// Dirichlet boundary, writing `ln u` as a latent variable and applying
/// Newton's method to the saddle-point form with `α = 1/θ`.
///
/// Small temperatures are reached by continuation from `θ = 1`, dividing by
/// [`TEMPERATURE_FACTOR`] and warm-starting each stage; `newton_its` counts
/// the iterations of all stages.
pub fn solve_entropic_poisson(
    disc: &Discretization,
    theta: f64,
    f: &(dyn Fn(Point) -> f64 + Sync),
    g: &(dyn Fn(Point) -> f64 + Sync),
    settings: NewtonSettings,
) -> Result<EntropicSolution> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::InvalidParameter(format!("temperature must be positive, got {theta}")));
    }
    let boundary = disc.boundary_values(g);
    if disc.space_v.fixed().iter().zip(&boundary).any(|(fx, v)| *fx && !(*v > 0.0)) {
        return Err(Error::Domain("boundary data must be positive".into()));
    }
    let load = disc.load(f)?;
    let prior = vec![0.0; disc.n_w()];
    let link = LatentLink::one_sided(vec![0.0; disc.n_w()]);
    let nv = disc.mesh.n_vertices();
    let mut u: Vec<f64> = (0..disc.n_v())
        .map(|i| {
            if disc.space_v.fixed()[i] {
                boundary[i]
            } else if i < nv {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let mut psi = vec![0.0; disc.n_w()];
    let mut newton_its = 0;
    let mut stage = theta.max(1.0);
    loop {
        let alpha = 1.0 / stage;
        let rhs: Vec<f64> = load.iter().map(|v| alpha * v).collect();
        let sub = Subproblem { stiffness_scale: alpha, rhs: &rhs, psi_prev: &prior, link: &link, boundary: &boundary };
        newton_its += newton_subproblem(disc, &sub, &mut u, &mut psi, settings)?.iterations;
        if stage <= theta {
            break;
        }
        stage = (stage / TEMPERATURE_FACTOR).max(theta);
    }
    Ok(EntropicSolution { u, psi, newton_its })
}

/// Ratio between consecutive temperatures of the continuation.
pub const TEMPERATURE_FACTOR: f64 = 2.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{strip_mesh, BoundaryTag};
    use crate::solver::ElementPair;

    #[test]
    fn unit_data_gives_unit_solution() {
        for pair in [ElementPair::LumpedP1, ElementPair::BubbleP0] {
            let disc = Discretization::with_dirichlet_where(strip_mesh(16).unwrap(), pair, |t| {
                matches!(t, BoundaryTag::Left | BoundaryTag::Right)
            })
            .unwrap();
            for theta in [1e-1, 1e-3] {
                let s = solve_entropic_poisson(
                    &disc,
                    theta,
                    &|_| 0.0,
                    &|_| 1.0,
                    NewtonSettings { epsilon: 0.0, tol: 1e-12, max_iter: 20 },
                )
                .unwrap();
                let nv = disc.mesh.n_vertices();
                assert!(s.u[..nv].iter().all(|v| (v - 1.0).abs() < 1e-10));
                assert!(s.psi.iter().all(|p| p.exp() > 0.0));
            }
        }
    }
}

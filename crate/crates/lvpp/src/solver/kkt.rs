use crate::fespace::{par_integrate, FeSpace, NORM_DEGREE};
use crate::mesh::{Mesh, Point};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KktResiduals {
    /// `|∫ λ (u − φ)|`.
    pub complementarity: f64,
    /// `∫ max(φ − u, 0)`.
    pub primal_infeasibility: f64,
    /// `∫ max(−λ, 0)`.
    pub dual_infeasibility: f64,
}

/// Integrated KKT residuals of a primal field `u` and multiplier `lambda`
/// against the obstacle, sampled at the points of a degree-6 rule.
pub fn check_kkt(
    mesh: &Mesh,
    space_v: &FeSpace,
    u: &[f64],
    space_w: &FeSpace,
    lambda: &[f64],
    obstacle: &(dyn Fn(Point) -> f64 + Sync),
) -> KktResiduals {
    let sample = |c: usize, g: &crate::mesh::CellGeometry, l: [f64; 3]| {
        (space_v.eval(mesh, u, c, g, l).0, space_w.eval(mesh, lambda, c, g, l).0)
    };
    let comp = par_integrate(mesh, NORM_DEGREE, |c, g, l, x| {
        let (uv, lv) = sample(c, g, l);
        lv * (uv - obstacle(x))
    });
    let primal = par_integrate(mesh, NORM_DEGREE, |c, g, l, x| (obstacle(x) - sample(c, g, l).0).max(0.0));
    let dual = par_integrate(mesh, NORM_DEGREE, |c, g, l, _| (-sample(c, g, l).1).max(0.0));
    KktResiduals { complementarity: comp.abs(), primal_infeasibility: primal, dual_infeasibility: dual }
}

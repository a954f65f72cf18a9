use super::quadrature::QuadratureRule;
use super::{FeSpace, NORM_DEGREE};
use crate::mesh::{CellGeometry, Mesh, Point};

/// Exact field for error measurement; the gradient is needed for H1 norms.
#[derive(Clone, Copy)]
pub struct ExactSolution<'a> {
    pub value: &'a (dyn Fn(Point) -> f64 + Sync),
    pub gradient: Option<&'a (dyn Fn(Point) -> [f64; 2] + Sync)>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1_semi: f64,
    pub h1: f64,
    /// Largest error over quadrature points and vertices.
    pub linf: f64,
}

/// `∫_Ω f` where `f(cell, geometry, barycentric, x)` is sampled at the points of a rule of `degree`.
pub fn integrate<F>(mesh: &Mesh, degree: usize, f: F) -> f64
where
    F: Fn(usize, &CellGeometry, [f64; 3], Point) -> f64,
{
    let q = QuadratureRule::with_degree(degree).expect("supported degree");
    (0..mesh.n_cells())
        .map(|c| {
            let g = mesh.geometry(c);
            q.integrate(&g, |l, x| f(c, &g, l, x))
        })
        .sum()
}

/// [`integrate`] with cells distributed over threads; the reduction order is fixed.
pub fn par_integrate<F>(mesh: &Mesh, degree: usize, f: F) -> f64
where
    F: Fn(usize, &CellGeometry, [f64; 3], Point) -> f64 + Sync + Send,
{
    let q = QuadratureRule::with_degree(degree).expect("supported degree");
    crate::par::sum_range(mesh.n_cells(), |c| {
        let g = mesh.geometry(c);
        q.integrate(&g, |l, x| f(c, &g, l, x))
    })
}

/// L2, H1-seminorm, H1 and sampled max-norm errors of `coeffs` against `exact`.
pub fn compute_error_norms(mesh: &Mesh, space: &FeSpace, coeffs: &[f64], exact: ExactSolution) -> ErrorNorms {
    let q = QuadratureRule::with_degree(NORM_DEGREE).expect("supported degree");
    let per_cell = crate::par::map_range(mesh.n_cells(), |c| {
        let g = mesh.geometry(c);
        let (mut l2, mut h1, mut linf) = (0.0, 0.0, 0.0f64);
        let samples = q
            .points
            .iter()
            .zip(&q.weights)
            .map(|(l, w)| (*l, *w))
            .chain([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].into_iter().map(|l| (l, 0.0)));
        for (l, w) in samples {
            let x = g.point(l);
            let (v, grad) = space.eval(mesh, coeffs, c, &g, l);
            let e = (exact.value)(x) - v;
            linf = linf.max(e.abs());
            let jw = w * 2.0 * g.area;
            l2 += jw * e * e;
            if let Some(dg) = exact.gradient {
                let d = dg(x);
                h1 += jw * ((d[0] - grad[0]).powi(2) + (d[1] - grad[1]).powi(2));
            }
        }
        (l2, h1, linf)
    });
    let l2: f64 = per_cell.iter().map(|p| p.0).sum();
    let h1s: f64 = per_cell.iter().map(|p| p.1).sum();
    let linf = per_cell.iter().fold(0.0f64, |m, p| m.max(p.2));
    ErrorNorms {
        l2: l2.sqrt(),
        h1_semi: if exact.gradient.is_some() { h1s.sqrt() } else { f64::NAN },
        h1: if exact.gradient.is_some() { (l2 + h1s).sqrt() } else { f64::NAN },
        linf,
    }
}

//! Finite element spaces on triangles: continuous P1 with an optional cubic
//! bubble per cell, discontinuous constants, and nodal P1.

mod assembly;
mod norms;
mod quadrature;

pub use assembly::{
    assemble_convection, assemble_coupling, assemble_coupling_lumped, assemble_load, assemble_mass, assemble_stiffness,
    assemble_weighted_mass_w, cell_integrals, lumped_mass, par_assemble_load, par_assemble_mass,
    par_assemble_stiffness, Coefficient,
};
pub use norms::{compute_error_norms, integrate, par_integrate, ErrorNorms, ExactSolution};
pub use quadrature::QuadratureRule;

use crate::mesh::{BoundaryTag, CellGeometry, Mesh, Point};

/// Quadrature degree for saddle-point coupling terms.
pub const SADDLE_DEGREE: usize = 4;
/// Quadrature degree for error norms and non-polynomial integrands.
pub const NORM_DEGREE: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    P1Bubble,
    P0Broken,
    P1Nodal,
}

#[derive(Clone, Debug)]
pub struct FeSpace {
    kind: SpaceKind,
    n_vertices: usize,
    n_cells: usize,
    fixed: Vec<bool>,
}

/// Local dofs of one cell; only the first `len` entries are meaningful.
#[derive(Clone, Copy, Debug)]
pub struct CellDofs {
    pub dofs: [usize; 4],
    pub len: usize,
}

impl CellDofs {
    pub fn as_slice(&self) -> &[usize] {
        &self.dofs[..self.len]
    }
}

/// Builds a space; continuous spaces get homogeneous-type Dirichlet flags on
/// every boundary vertex.
pub fn build_space(mesh: &Mesh, kind: SpaceKind) -> FeSpace {
    let mut s = FeSpace { kind, n_vertices: mesh.n_vertices(), n_cells: mesh.n_cells(), fixed: Vec::new() };
    s.fixed = vec![false; s.ndofs()];
    if s.is_h1() {
        for v in mesh.boundary_vertices() {
            s.fixed[v] = true;
        }
    }
    s
}

impl FeSpace {
    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn ndofs(&self) -> usize {
        match self.kind {
            SpaceKind::P1Bubble => self.n_vertices + self.n_cells,
            SpaceKind::P0Broken => self.n_cells,
            SpaceKind::P1Nodal => self.n_vertices,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn is_h1(&self) -> bool {
        self.kind != SpaceKind::P0Broken
    }

    pub fn local_len(&self) -> usize {
        match self.kind {
            SpaceKind::P1Bubble => 4,
            SpaceKind::P0Broken => 1,
            SpaceKind::P1Nodal => 3,
        }
    }

    pub fn cell_dofs(&self, mesh: &Mesh, cell: usize) -> CellDofs {
        let v = mesh.cells[cell];
        match self.kind {
            SpaceKind::P1Bubble => CellDofs { dofs: [v[0], v[1], v[2], self.n_vertices + cell], len: 4 },
            SpaceKind::P1Nodal => CellDofs { dofs: [v[0], v[1], v[2], 0], len: 3 },
            SpaceKind::P0Broken => CellDofs { dofs: [cell, 0, 0, 0], len: 1 },
        }
    }

    /// Dirichlet flags per dof.
    pub fn fixed(&self) -> &[bool] {
        &self.fixed
    }

    pub fn dirichlet_dofs(&self) -> Vec<usize> {
        (0..self.ndofs()).filter(|&i| self.fixed[i]).collect()
    }

    /// Restricts Dirichlet conditions to boundary edges whose tag satisfies `pred`.
    pub fn with_dirichlet_where(mut self, mesh: &Mesh, pred: impl Fn(BoundaryTag) -> bool) -> Self {
        self.fixed.iter_mut().for_each(|f| *f = false);
        if self.is_h1() {
            for v in mesh.boundary_vertices_where(pred) {
                self.fixed[v] = true;
            }
        }
        self
    }

    /// Drops all Dirichlet conditions (natural boundary conditions everywhere).
    pub fn without_dirichlet(mut self) -> Self {
        self.fixed.iter_mut().for_each(|f| *f = false);
        self
    }

    /// Basis values at barycentric point `l`.
    #[inline]
    pub fn basis(&self, l: [f64; 3]) -> [f64; 4] {
        match self.kind {
            SpaceKind::P1Bubble => [l[0], l[1], l[2], 27.0 * l[0] * l[1] * l[2]],
            SpaceKind::P1Nodal => [l[0], l[1], l[2], 0.0],
            SpaceKind::P0Broken => [1.0, 0.0, 0.0, 0.0],
        }
    }

    /// Physical gradients of the basis at barycentric point `l`.
    #[inline]
    pub fn basis_grads(&self, geom: &CellGeometry, l: [f64; 3]) -> [[f64; 2]; 4] {
        let g = geom.grads;
        match self.kind {
            SpaceKind::P0Broken => [[0.0; 2]; 4],
            SpaceKind::P1Nodal => [g[0], g[1], g[2], [0.0; 2]],
            SpaceKind::P1Bubble => {
                let c = [27.0 * l[1] * l[2], 27.0 * l[0] * l[2], 27.0 * l[0] * l[1]];
                let b = [
                    c[0] * g[0][0] + c[1] * g[1][0] + c[2] * g[2][0],
                    c[0] * g[0][1] + c[1] * g[1][1] + c[2] * g[2][1],
                ];
                [g[0], g[1], g[2], b]
            }
        }
    }

    /// Value and gradient of the field `coeffs` at barycentric point `l` of `cell`.
    pub fn eval(&self, mesh: &Mesh, coeffs: &[f64], cell: usize, geom: &CellGeometry, l: [f64; 3]) -> (f64, [f64; 2]) {
        let dofs = self.cell_dofs(mesh, cell);
        let phi = self.basis(l);
        let grads = self.basis_grads(geom, l);
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for (k, &d) in dofs.as_slice().iter().enumerate() {
            v += coeffs[d] * phi[k];
            g[0] += coeffs[d] * grads[k][0];
            g[1] += coeffs[d] * grads[k][1];
        }
        (v, g)
    }

    /// Nodal interpolation: vertex values for continuous spaces (bubbles set
    /// to zero), centroid values for P0.
    pub fn interpolate(&self, mesh: &Mesh, f: impl Fn(Point) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.ndofs()];
        match self.kind {
            SpaceKind::P0Broken => {
                for (c, o) in out.iter_mut().enumerate() {
                    *o = f(mesh.geometry(c).centroid());
                }
            }
            _ => {
                for (v, p) in mesh.vertices.iter().enumerate() {
                    out[v] = f(*p);
                }
            }
        }
        out
    }

    /// Cell means `(1/|T|) ∫_T f` as P0 coefficients.
    pub fn project_p0(mesh: &Mesh, f: impl Fn(Point) -> f64, degree: usize) -> Vec<f64> {
        let q = QuadratureRule::with_degree(degree).expect("supported degree");
        (0..mesh.n_cells())
            .map(|c| {
                let g = mesh.geometry(c);
                q.integrate(&g, |_, x| f(x)) / g.area
            })
            .collect()
    }
}

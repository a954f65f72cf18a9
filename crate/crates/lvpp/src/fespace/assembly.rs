use super::quadrature::QuadratureRule;
use super::{FeSpace, SpaceKind, NORM_DEGREE, SADDLE_DEGREE};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{CellGeometry, Mesh, Point};

/// Cellwise scalar coefficient of a bilinear form.
#[derive(Clone, Copy, Debug)]
pub enum Coefficient<'a> {
    Const(f64),
    Cellwise(&'a [f64]),
}

impl Coefficient<'_> {
    #[inline]
    fn at(&self, cell: usize) -> f64 {
        match self {
            Coefficient::Const(c) => *c,
            Coefficient::Cellwise(v) => v[cell],
        }
    }
}

type Local = [[f64; 4]; 4];

fn check_mesh(mesh: &Mesh, space: &FeSpace) -> Result<()> {
    if space.n_vertices() != mesh.n_vertices() || space.n_cells() != mesh.n_cells() {
        return Err(Error::Dimension("space was built on a different mesh".into()));
    }
    Ok(())
}

fn local_matrices<F>(mesh: &Mesh, parallel: bool, f: F) -> Vec<Local>
where
    F: Fn(usize, &CellGeometry) -> Local + Sync + Send,
{
    let g = |c: usize| f(c, &mesh.geometry(c));
    if parallel {
        crate::par::map_range(mesh.n_cells(), g)
    } else {
        (0..mesh.n_cells()).map(g).collect()
    }
}

fn scatter(mesh: &Mesh, rows: &FeSpace, cols: &FeSpace, locals: &[Local]) -> CsrMatrix {
    let (nr, nc) = (rows.local_len(), cols.local_len());
    let mut t = Vec::with_capacity(locals.len() * nr * nc);
    for (c, loc) in locals.iter().enumerate() {
        let rd = rows.cell_dofs(mesh, c);
        let cd = cols.cell_dofs(mesh, c);
        for i in 0..nr {
            for j in 0..nc {
                t.push((rd.dofs[i], cd.dofs[j], loc[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(rows.ndofs(), cols.ndofs(), &t).expect("local dofs in range")
}

fn stiffness_impl(mesh: &Mesh, space: &FeSpace, coeff: Coefficient, parallel: bool) -> Result<CsrMatrix> {
    check_mesh(mesh, space)?;
    if !space.is_h1() {
        return Err(Error::InvalidParameter("stiffness needs an H1-conforming space".into()));
    }
    let q = QuadratureRule::with_degree(SADDLE_DEGREE)?;
    let n = space.local_len();
    let locals = local_matrices(mesh, parallel, |c, geom| {
        let k = coeff.at(c);
        let mut loc = [[0.0; 4]; 4];
        if space.kind() == SpaceKind::P1Nodal {
            for i in 0..3 {
                for j in 0..3 {
                    let gi = geom.grads[i];
                    let gj = geom.grads[j];
                    loc[i][j] = k * geom.area * (gi[0] * gj[0] + gi[1] * gj[1]);
                }
            }
            return loc;
        }
        for (l, w) in q.points.iter().zip(&q.weights) {
            let g = space.basis_grads(geom, *l);
            let s = k * w * 2.0 * geom.area;
            for i in 0..n {
                for j in 0..n {
                    loc[i][j] += s * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
        }
        loc
    });
    Ok(scatter(mesh, space, space, &locals))
}

/// `∫ k ∇φ_j · ∇φ_i` with a cellwise coefficient `k`.
pub fn assemble_stiffness(mesh: &Mesh, space: &FeSpace, coeff: Coefficient) -> Result<CsrMatrix> {
    stiffness_impl(mesh, space, coeff, false)
}

/// Parallel-over-cells version of [`assemble_stiffness`].
pub fn par_assemble_stiffness(mesh: &Mesh, space: &FeSpace, coeff: Coefficient) -> Result<CsrMatrix> {
    stiffness_impl(mesh, space, coeff, true)
}

fn mass_impl(mesh: &Mesh, rows: &FeSpace, cols: &FeSpace, parallel: bool) -> Result<CsrMatrix> {
    check_mesh(mesh, rows)?;
    check_mesh(mesh, cols)?;
    let degree = if rows.kind() == SpaceKind::P1Bubble && cols.kind() == SpaceKind::P1Bubble {
        NORM_DEGREE
    } else {
        SADDLE_DEGREE
    };
    let q = QuadratureRule::with_degree(degree)?;
    let (nr, nc) = (rows.local_len(), cols.local_len());
    let locals = local_matrices(mesh, parallel, |_, geom| {
        let mut loc = [[0.0; 4]; 4];
        for (l, w) in q.points.iter().zip(&q.weights) {
            let pr = rows.basis(*l);
            let pc = cols.basis(*l);
            let s = w * 2.0 * geom.area;
            for i in 0..nr {
                for j in 0..nc {
                    loc[i][j] += s * pr[i] * pc[j];
                }
            }
        }
        loc
    });
    Ok(scatter(mesh, rows, cols, &locals))
}

/// Consistent mass matrix `∫ φ_j φ_i`.
pub fn assemble_mass(mesh: &Mesh, space: &FeSpace) -> Result<CsrMatrix> {
    mass_impl(mesh, space, space, false)
}

pub fn par_assemble_mass(mesh: &Mesh, space: &FeSpace) -> Result<CsrMatrix> {
    mass_impl(mesh, space, space, true)
}

/// Rectangular coupling `B[i, j] = ∫ φ_j v_i` between a continuous space
/// (rows) and a latent space (columns), integrated exactly.
pub fn assemble_coupling(mesh: &Mesh, space_v: &FeSpace, space_w: &FeSpace) -> Result<CsrMatrix> {
    if !space_v.is_h1() {
        return Err(Error::InvalidParameter("coupling rows must be an H1-conforming space".into()));
    }
    mass_impl(mesh, space_v, space_w, true)
}

/// Vertex-rule masses `m_i = Σ_{T ∋ i} |T| / 3`.
pub fn lumped_mass(mesh: &Mesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.n_vertices()];
    for (c, cell) in mesh.cells.iter().enumerate() {
        let a = mesh.geometry(c).area / 3.0;
        for &v in cell {
            m[v] += a;
        }
    }
    m
}

/// Coupling between nodal P1 spaces under nodal quadrature: `diag(m_i)`.
pub fn assemble_coupling_lumped(mesh: &Mesh, space_v: &FeSpace, space_w: &FeSpace) -> Result<CsrMatrix> {
    check_mesh(mesh, space_v)?;
    check_mesh(mesh, space_w)?;
    if space_v.kind() != SpaceKind::P1Nodal || space_w.kind() != SpaceKind::P1Nodal {
        return Err(Error::InvalidParameter("lumped coupling is defined for nodal P1 pairs".into()));
    }
    Ok(CsrMatrix::from_diagonal(&lumped_mass(mesh)))
}

/// Diagonal latent-block matrix `∫ weight φ_j φ_i`. For P0 the entry is the
/// cell integral of `weight(cell, x)`; for nodal P1 the vertex rule gives
/// `m_i weight(i, x_i)`.
pub fn assemble_weighted_mass_w(
    mesh: &Mesh,
    space_w: &FeSpace,
    weight: impl Fn(usize, Point) -> f64,
) -> Result<CsrMatrix> {
    check_mesh(mesh, space_w)?;
    let diag: Vec<f64> = match space_w.kind() {
        SpaceKind::P0Broken => {
            let q = QuadratureRule::with_degree(NORM_DEGREE)?;
            let mut d = Vec::with_capacity(mesh.n_cells());
            for c in 0..mesh.n_cells() {
                let geom = mesh.geometry(c);
                let mut bad = None;
                let val = q.integrate(&geom, |_, x| {
                    let w = weight(c, x);
                    if !(w > 0.0) {
                        bad = Some(w);
                    }
                    w
                });
                if let Some(w) = bad {
                    return Err(Error::Domain(format!("weight {w} is not positive in cell {c}")));
                }
                d.push(val);
            }
            d
        }
        SpaceKind::P1Nodal => {
            let m = lumped_mass(mesh);
            let mut d = Vec::with_capacity(m.len());
            for (i, mi) in m.iter().enumerate() {
                let w = weight(i, mesh.vertices[i]);
                if !(w > 0.0) {
                    return Err(Error::Domain(format!("weight {w} is not positive at vertex {i}")));
                }
                d.push(mi * w);
            }
            d
        }
        SpaceKind::P1Bubble => {
            return Err(Error::InvalidParameter("latent space must be P0 or nodal P1".into()));
        }
    };
    Ok(CsrMatrix::from_diagonal(&diag))
}

fn load_impl(
    mesh: &Mesh,
    space: &FeSpace,
    f: &(dyn Fn(Point) -> f64 + Sync),
    degree: usize,
    parallel: bool,
) -> Result<Vec<f64>> {
    check_mesh(mesh, space)?;
    let q = QuadratureRule::with_degree(degree)?;
    let n = space.local_len();
    let locals = local_matrices(mesh, parallel, |_, geom| {
        let mut loc = [[0.0; 4]; 4];
        for (l, w) in q.points.iter().zip(&q.weights) {
            let fx = f(geom.point(*l)) * w * 2.0 * geom.area;
            let phi = space.basis(*l);
            for i in 0..n {
                loc[0][i] += fx * phi[i];
            }
        }
        loc
    });
    let mut b = vec![0.0; space.ndofs()];
    for (c, loc) in locals.iter().enumerate() {
        for (i, &d) in space.cell_dofs(mesh, c).as_slice().iter().enumerate() {
            b[d] += loc[0][i];
        }
    }
    Ok(b)
}

/// Load vector `∫ f φ_i` with a rule of the given degree.
pub fn assemble_load(
    mesh: &Mesh,
    space: &FeSpace,
    f: &(dyn Fn(Point) -> f64 + Sync),
    degree: usize,
) -> Result<Vec<f64>> {
    load_impl(mesh, space, f, degree, false)
}

pub fn par_assemble_load(
    mesh: &Mesh,
    space: &FeSpace,
    f: &(dyn Fn(Point) -> f64 + Sync),
    degree: usize,
) -> Result<Vec<f64>> {
    load_impl(mesh, space, f, degree, true)
}

/// `∫_T f` for every cell.
pub fn cell_integrals(mesh: &Mesh, f: &(dyn Fn(Point) -> f64 + Sync), degree: usize) -> Result<Vec<f64>> {
    let q = QuadratureRule::with_degree(degree)?;
    Ok(crate::par::map_range(mesh.n_cells(), |c| q.integrate(&mesh.geometry(c), |_, x| f(x))))
}

/// Nodal P1 advection matrix `N[i, j] = ∫ (β · ∇φ_j) φ_i` for constant `β`.
pub fn assemble_convection(mesh: &Mesh, space: &FeSpace, beta: [f64; 2]) -> Result<CsrMatrix> {
    check_mesh(mesh, space)?;
    if space.kind() != SpaceKind::P1Nodal {
        return Err(Error::InvalidParameter("advection matrix is implemented for nodal P1".into()));
    }
    let locals = local_matrices(mesh, true, |_, geom| {
        let mut loc = [[0.0; 4]; 4];
        for j in 0..3 {
            let bg = beta[0] * geom.grads[j][0] + beta[1] * geom.grads[j][1];
            for row in loc.iter_mut().take(3) {
                row[j] = geom.area / 3.0 * bg;
            }
        }
        loc
    });
    Ok(scatter(mesh, space, space, &locals))
}

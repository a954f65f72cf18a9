//! Minimum-compliance cantilever with a Helmholtz-filtered, SIMP-penalized
//! density, solved by entropic mirror descent in a cellwise latent variable.

use crate::entropy::{lnit, EntropyKind};
use crate::error::{Error, Result};
use crate::fespace::{assemble_mass, assemble_stiffness, build_space, Coefficient, FeSpace, QuadratureRule, SpaceKind};
use crate::linalg::{Cholesky, CsrMatrix, DirichletReduction};
use crate::mesh::{cantilever_mesh, BoundaryTag, Mesh, Point, LOAD_SEGMENT};
use crate::schedules::StepSchedule;
use crate::solver::{mirror_descent, EqualityConstraint, MirrorHistory, MirrorOptions};

/// Where the external force acts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LoadSpec {
    /// Constant body force on a disk.
    Disk { center: Point, radius: f64, force: [f64; 2] },
    /// Constant traction on the right-edge segment [`LOAD_SEGMENT`].
    Traction { force: [f64; 2] },
}

impl Default for LoadSpec {
    fn default() -> Self {
        LoadSpec::Disk { center: [2.9, 0.5], radius: 0.05, force: [0.0, -1.0] }
    }
}

#[derive(Clone, Debug)]
pub struct TopOptProblem {
    pub mesh: Mesh,
    pub lame_lambda: f64,
    pub lame_mu: f64,
    /// Stiffness of void material.
    pub rho_min: f64,
    pub simp_exponent: f64,
    pub volume_fraction: f64,
    pub filter_radius: f64,
    pub load: LoadSpec,
}

impl TopOptProblem {
    /// The `3 x 1` cantilever on a `3·2^level x 2^level` grid with the
    /// default material and load.
    pub fn cantilever(level: usize) -> Result<Self> {
        let n = 1usize << level;
        Ok(TopOptProblem {
            mesh: cantilever_mesh(3 * n, n)?,
            lame_lambda: 1.0,
            lame_mu: 1.0,
            rho_min: 1e-6,
            simp_exponent: 3.0,
            volume_fraction: 0.5,
            filter_radius: 0.02,
            load: LoadSpec::default(),
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.rho_min > 0.0 && self.rho_min < 1.0) {
            return Err(Error::InvalidParameter(format!("void stiffness must lie in (0, 1), got {}", self.rho_min)));
        }
        if !(self.volume_fraction > 0.0 && self.volume_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "volume fraction must lie in (0, 1), got {}",
                self.volume_fraction
            )));
        }
        if !(self.filter_radius >= 0.0) || !(self.lame_mu > 0.0) || !(self.lame_lambda >= 0.0) {
            return Err(Error::InvalidParameter(
                "filter radius and Lamé parameters must be nonnegative, μ positive".into(),
            ));
        }
        if !(self.simp_exponent >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "SIMP exponent must be at least 1, got {}",
                self.simp_exponent
            )));
        }
        Ok(())
    }
}

/// `r(ρ) = ρ_min + ρ^p (1 − ρ_min)`.
pub fn simp(rho: f64, rho_min: f64, p: f64) -> f64 {
    rho_min + rho.max(0.0).powf(p) * (1.0 - rho_min)
}

pub fn simp_derivative(rho: f64, rho_min: f64, p: f64) -> f64 {
    p * rho.max(0.0).powf(p - 1.0) * (1.0 - rho_min)
}

/// Symmetric-gradient matrix of a P1 cell in Voigt order `(xx, yy, 2xy)`
/// acting on the interleaved displacement dofs `(u0x, u0y, u1x, ...)`.
fn strain_matrix(grads: &[[f64; 2]; 3]) -> [[f64; 6]; 3] {
    let mut b = [[0.0; 6]; 3];
    for (i, g) in grads.iter().enumerate() {
        b[0][2 * i] = g[0];
        b[1][2 * i + 1] = g[1];
        b[2][2 * i] = g[1];
        b[2][2 * i + 1] = g[0];
    }
    b
}

fn elasticity_local(grads: &[[f64; 2]; 3], lambda: f64, mu: f64) -> [[f64; 6]; 6] {
    let b = strain_matrix(grads);
    let d = [[lambda + 2.0 * mu, lambda, 0.0], [lambda, lambda + 2.0 * mu, 0.0], [0.0, 0.0, mu]];
    let mut k = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            let mut s = 0.0;
            for a in 0..3 {
                for c in 0..3 {
                    s += b[a][i] * d[a][c] * b[c][j];
                }
            }
            k[i][j] = s;
        }
    }
    k
}

/// Vector P1 elasticity matrix `∫ s_T σ(u):ε(v)` with a cellwise stiffness
/// factor `s_T` already integrated over the cell (so `s_T = |T|` gives the
/// homogeneous operator).
pub fn assemble_elasticity(mesh: &Mesh, lambda: f64, mu: f64, cell_factor: &[f64]) -> Result<CsrMatrix> {
    if cell_factor.len() != mesh.n_cells() {
        return Err(Error::Dimension("one stiffness factor per cell expected".into()));
    }
    let locals = crate::par::map_range(mesh.n_cells(), |c| {
        let geom = mesh.geometry(c);
        let mut k = elasticity_local(&geom.grads, lambda, mu);
        k.iter_mut().flatten().for_each(|v| *v *= cell_factor[c]);
        k
    });
    let mut t = Vec::with_capacity(36 * mesh.n_cells());
    for (c, k) in locals.iter().enumerate() {
        let cell = mesh.cells[c];
        for i in 0..6 {
            for j in 0..6 {
                t.push((2 * cell[i / 2] + i % 2, 2 * cell[j / 2] + j % 2, k[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(2 * mesh.n_vertices(), 2 * mesh.n_vertices(), &t)
}

/// Pointwise `σ(u):ε(u)`, constant on a P1 cell.
fn strain_energy_density(mesh: &Mesh, cell: usize, u: &[f64], lambda: f64, mu: f64) -> f64 {
    let geom = mesh.geometry(cell);
    let k = elasticity_local(&geom.grads, lambda, mu);
    let v = mesh.cells[cell];
    let loc: Vec<f64> = (0..6).map(|i| u[2 * v[i / 2] + i % 2]).collect();
    let mut s = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            s += loc[i] * k[i][j] * loc[j];
        }
    }
    s
}

fn load_vector(mesh: &Mesh, load: &LoadSpec) -> Result<Vec<f64>> {
    let mut b = vec![0.0; 2 * mesh.n_vertices()];
    match *load {
        LoadSpec::Disk { center, radius, force } => {
            let q = QuadratureRule::with_degree(6)?;
            for c in 0..mesh.n_cells() {
                let geom = mesh.geometry(c);
                let near =
                    geom.vertices.iter().any(|p| (p[0] - center[0]).hypot(p[1] - center[1]) < radius + geom.diameter());
                if !near {
                    continue;
                }
                let mut w = [0.0; 3];
                for (l, wq) in q.points.iter().zip(&q.weights) {
                    let x = geom.point(*l);
                    if (x[0] - center[0]).hypot(x[1] - center[1]) < radius {
                        for i in 0..3 {
                            w[i] += wq * 2.0 * geom.area * l[i];
                        }
                    }
                }
                for (i, &v) in mesh.cells[c].iter().enumerate() {
                    b[2 * v] += force[0] * w[i];
                    b[2 * v + 1] += force[1] * w[i];
                }
            }
        }
        LoadSpec::Traction { force } => {
            let gauss = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
            for e in mesh.boundary_edges.iter().filter(|e| e.tag == BoundaryTag::Load) {
                let [a, bv] = e.vertices;
                let (pa, pb) = (mesh.vertices[a], mesh.vertices[bv]);
                let lo = pa[1].min(pb[1]).max(LOAD_SEGMENT.0);
                let hi = pa[1].max(pb[1]).min(LOAD_SEGMENT.1);
                if hi <= lo {
                    continue;
                }
                for s in gauss {
                    let y = lo + s * (hi - lo);
                    let phi_b = (y - pa[1]) / (pb[1] - pa[1]);
                    let w = 0.5 * (hi - lo);
                    for (v, phi) in [(a, 1.0 - phi_b), (bv, phi_b)] {
                        b[2 * v] += w * force[0] * phi;
                        b[2 * v + 1] += w * force[1] * phi;
                    }
                }
            }
        }
    }
    Ok(b)
}

/// Compliance, the nodal gradient field and its cell averages.
#[derive(Clone, Debug)]
pub struct ComplianceGradient {
    pub compliance: f64,
    /// Nodal values of the filtered sensitivity.
    pub nodal: Vec<f64>,
    /// Cell averages of `nodal`; the ℓ²-representer of the derivative with
    /// respect to the cellwise density.
    pub cellwise: Vec<f64>,
}

/// Factorizations and data shared by every design iteration.
pub struct TopOptModel {
    pub problem: TopOptProblem,
    scalar: FeSpace,
    filter: Cholesky,
    load: Vec<f64>,
    reduction: DirichletReduction,
    quad: QuadratureRule,
}

impl TopOptModel {
    pub fn new(problem: TopOptProblem) -> Result<Self> {
        problem.validate()?;
        let mesh = &problem.mesh;
        let scalar = build_space(mesh, SpaceKind::P1Nodal).without_dirichlet();
        let k = assemble_stiffness(mesh, &scalar, Coefficient::Const(problem.filter_radius.powi(2)))?;
        let m = assemble_mass(mesh, &scalar)?;
        let filter = Cholesky::factor(&k.add_scaled(1.0, &m)?)?;
        let load = load_vector(mesh, &problem.load)?;
        let mut fixed = vec![false; 2 * mesh.n_vertices()];
        for v in mesh.boundary_vertices_where(|t| t == BoundaryTag::Fixed) {
            fixed[2 * v] = true;
            fixed[2 * v + 1] = true;
        }
        if !fixed.iter().any(|f| *f) {
            return Err(Error::InvalidParameter("cantilever mesh has no clamped edge".into()));
        }
        let reduction = DirichletReduction::new(fixed.len(), &fixed);
        Ok(TopOptModel { problem, scalar, filter, load, reduction, quad: QuadratureRule::with_degree(4)? })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.problem.mesh
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    /// Solves `−ε²Δρ̃ + ρ̃ = ρ` with natural boundary conditions for a cellwise density.
    pub fn helmholtz_filter(&self, rho: &[f64]) -> Result<Vec<f64>> {
        let mesh = self.mesh();
        if rho.len() != mesh.n_cells() {
            return Err(Error::Dimension("density must have one value per cell".into()));
        }
        let mut rhs = vec![0.0; self.scalar.ndofs()];
        for (c, cell) in mesh.cells.iter().enumerate() {
            let a = mesh.geometry(c).area / 3.0 * rho[c];
            for &v in cell {
                rhs[v] += a;
            }
        }
        self.filter.solve(&rhs)
    }

    /// Same filter applied to a nodal right-hand side `∫ s φ_i`.
    fn filter_rhs(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.filter.solve(rhs)
    }

    /// `∫_T r(ρ̃)` per cell for a nodal filtered density.
    fn stiffness_factors(&self, filtered: &[f64]) -> Vec<f64> {
        let p = &self.problem;
        let mesh = self.mesh();
        crate::par::map_range(mesh.n_cells(), |c| {
            let geom = mesh.geometry(c);
            let v = mesh.cells[c];
            self.quad.integrate(&geom, |l, _| {
                let r = l[0] * filtered[v[0]] + l[1] * filtered[v[1]] + l[2] * filtered[v[2]];
                simp(r, p.rho_min, p.simp_exponent)
            })
        })
    }

    /// Displacement for a nodal filtered density, with the clamped edge fixed.
    pub fn elasticity_solve(&self, filtered: &[f64]) -> Result<Vec<f64>> {
        let mesh = self.mesh();
        if filtered.len() != mesh.n_vertices() {
            return Err(Error::Dimension("filtered density must be nodal".into()));
        }
        let p = &self.problem;
        let k = assemble_elasticity(mesh, p.lame_lambda, p.lame_mu, &self.stiffness_factors(filtered))?;
        let zero = vec![0.0; k.nrows()];
        let (kr, br) = self.reduction.reduce(&k, &self.load, &zero);
        let x = Cholesky::factor(&kr)?.solve(&br)?;
        Ok(self.reduction.expand(&x, &zero))
    }

    /// `F(ρ) = ∫ u · f` for a cellwise density.
    pub fn compliance(&self, rho: &[f64]) -> Result<f64> {
        let u = self.elasticity_solve(&self.helmholtz_filter(rho)?)?;
        Ok(crate::linalg::dot(&u, &self.load))
    }

    /// Compliance and its derivative with respect to the cellwise density,
    /// using one state solve (the problem is self-adjoint).
    pub fn compliance_gradient(&self, rho: &[f64]) -> Result<ComplianceGradient> {
        let mesh = self.mesh();
        let p = &self.problem;
        let filtered = self.helmholtz_filter(rho)?;
        let u = self.elasticity_solve(&filtered)?;
        let compliance = crate::linalg::dot(&u, &self.load);
        let per_cell: Vec<[f64; 3]> = crate::par::map_range(mesh.n_cells(), |c| {
            let geom = mesh.geometry(c);
            let v = mesh.cells[c];
            let energy = strain_energy_density(mesh, c, &u, p.lame_lambda, p.lame_mu);
            let mut loc = [0.0; 3];
            for (l, w) in self.quad.points.iter().zip(&self.quad.weights) {
                let r = l[0] * filtered[v[0]] + l[1] * filtered[v[1]] + l[2] * filtered[v[2]];
                let s = -simp_derivative(r, p.rho_min, p.simp_exponent) * energy * w * 2.0 * geom.area;
                for i in 0..3 {
                    loc[i] += s * l[i];
                }
            }
            loc
        });
        let mut rhs = vec![0.0; mesh.n_vertices()];
        for (c, loc) in per_cell.iter().enumerate() {
            for (i, &v) in mesh.cells[c].iter().enumerate() {
                rhs[v] += loc[i];
            }
        }
        let nodal = self.filter_rhs(&rhs)?;
        let cellwise = mesh.cells.iter().map(|v| (nodal[v[0]] + nodal[v[1]] + nodal[v[2]]) / 3.0).collect();
        Ok(ComplianceGradient { compliance, nodal, cellwise })
    }
}

#[derive(Clone, Debug)]
pub struct TopOptResult {
    pub history: MirrorHistory,
    /// Cellwise density `sigmoid(ψ)` of the last iterate.
    pub density: Vec<f64>,
    pub filtered: Vec<f64>,
    pub displacement: Vec<f64>,
    pub compliance: f64,
}

impl TopOptResult {
    pub fn iterations(&self) -> usize {
        self.history.steps.len()
    }
}

/// Entropic mirror descent for the cantilever, starting from the uniform
/// density equal to the volume fraction.
pub fn topopt_solve(model: &TopOptModel, schedule: &mut StepSchedule, opts: MirrorOptions) -> Result<TopOptResult> {
    let mesh = model.mesh();
    let theta = model.problem.volume_fraction;
    let areas: Vec<f64> = (0..mesh.n_cells()).map(|c| mesh.geometry(c).area).collect();
    let points: Vec<Point> = (0..mesh.n_cells()).map(|c| mesh.geometry(c).centroid()).collect();
    let constraint = EqualityConstraint { weights: areas.clone(), target: theta * areas.iter().sum::<f64>() };
    let psi0 = vec![lnit(theta)?; mesh.n_cells()];
    let history = mirror_descent(
        psi0,
        &points,
        &EntropyKind::fermi_dirac(),
        |rho| {
            let g = model.compliance_gradient(rho)?;
            Ok((g.compliance, g.cellwise))
        },
        Some(&constraint),
        schedule,
        &areas,
        opts,
    )?;
    let density = history.primal.clone();
    let filtered = model.helmholtz_filter(&density)?;
    let displacement = model.elasticity_solve(&filtered)?;
    let compliance = crate::linalg::dot(&displacement, model.load());
    Ok(TopOptResult { history, density, filtered, displacement, compliance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::rectangle_mesh;

    #[test]
    fn simp_endpoints() {
        assert_eq!(simp(1.0, 1e-6, 3.0), 1.0);
        assert_eq!(simp(0.0, 1e-6, 3.0), 1e-6);
        assert!((simp_derivative(0.5, 0.0, 3.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rigid_motions_have_no_energy() {
        let mesh = rectangle_mesh(0.0, 1.0, 0.0, 1.0, 3, 2).unwrap();
        let areas: Vec<f64> = (0..mesh.n_cells()).map(|c| mesh.geometry(c).area).collect();
        let k = assemble_elasticity(&mesh, 1.0, 1.0, &areas).unwrap();
        let shift: Vec<f64> = (0..2 * mesh.n_vertices()).map(|i| if i % 2 == 0 { 0.3 } else { -1.2 }).collect();
        assert!(k.mul_vec(&shift).iter().all(|v| v.abs() < 1e-12));
        let rot: Vec<f64> = (0..mesh.n_vertices())
            .flat_map(|v| {
                let p = mesh.vertices[v];
                [-p[1], p[0]]
            })
            .collect();
        assert!(k.mul_vec(&rot).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn linear_patch_test() {
        let mesh = rectangle_mesh(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        let areas: Vec<f64> = (0..mesh.n_cells()).map(|c| mesh.geometry(c).area).collect();
        let k = assemble_elasticity(&mesh, 1.3, 0.7, &areas).unwrap();
        let exact = |p: Point| [0.01 * p[0] + 0.002 * p[1], -0.003 * p[0] + 0.02 * p[1]];
        let mut fixed = vec![false; 2 * mesh.n_vertices()];
        let mut g = vec![0.0; 2 * mesh.n_vertices()];
        for v in mesh.boundary_vertices() {
            fixed[2 * v] = true;
            fixed[2 * v + 1] = true;
        }
        for v in 0..mesh.n_vertices() {
            let e = exact(mesh.vertices[v]);
            if fixed[2 * v] {
                g[2 * v] = e[0];
                g[2 * v + 1] = e[1];
            }
        }
        let red = DirichletReduction::new(g.len(), &fixed);
        let (kr, br) = red.reduce(&k, &vec![0.0; g.len()], &g);
        let u = red.expand(&Cholesky::factor(&kr).unwrap().solve(&br).unwrap(), &g);
        for v in 0..mesh.n_vertices() {
            let e = exact(mesh.vertices[v]);
            assert!((u[2 * v] - e[0]).abs() < 1e-10 && (u[2 * v + 1] - e[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn filter_preserves_constants_and_mass() {
        let model = TopOptModel::new(TopOptProblem::cantilever(2).unwrap()).unwrap();
        let n = model.mesh().n_cells();
        let f = model.helmholtz_filter(&vec![0.37; n]).unwrap();
        assert!(f.iter().all(|v| (v - 0.37).abs() < 1e-12));
        let rho: Vec<f64> = (0..n).map(|c| if c % 3 == 0 { 0.9 } else { 0.1 }).collect();
        let f = model.helmholtz_filter(&rho).unwrap();
        let mesh = model.mesh();
        let mass_rho: f64 = (0..n).map(|c| rho[c] * mesh.geometry(c).area).sum();
        let mass_f: f64 = crate::fespace::lumped_mass(mesh).iter().zip(&f).map(|(m, v)| m * v).sum();
        assert!((mass_rho - mass_f).abs() < 1e-10);
    }

    #[test]
    fn zero_load_has_zero_gradient() {
        let mut p = TopOptProblem::cantilever(1).unwrap();
        p.load = LoadSpec::Traction { force: [0.0, 0.0] };
        let model = TopOptModel::new(p).unwrap();
        let g = model.compliance_gradient(&vec![0.5; model.mesh().n_cells()]).unwrap();
        assert_eq!(g.compliance, 0.0);
        assert!(g.cellwise.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn traction_load_sums_to_force_times_length() {
        let mut p = TopOptProblem::cantilever(3).unwrap();
        p.load = LoadSpec::Traction { force: [0.0, -1.0] };
        let model = TopOptModel::new(p).unwrap();
        let fy: f64 = model.load().iter().skip(1).step_by(2).sum();
        assert!((fy + 0.1).abs() < 1e-12);
    }
}

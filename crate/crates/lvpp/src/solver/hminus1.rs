use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fespace::{assemble_coupling, assemble_stiffness, build_space, Coefficient, FeSpace, SpaceKind};
use crate::linalg::{Cholesky, CsrMatrix, DirichletReduction};
use crate::mesh::Mesh;

/// Discrete Riesz map of `H¹₀` on the P1-bubble space: a functional `b`
/// is sent to `r` with `(∇r, ∇v) = b(v)` for all `v`.
pub struct RieszMap {
    space: FeSpace,
    red: DirichletReduction,
    chol: Cholesky,
}

impl RieszMap {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let space = build_space(mesh, SpaceKind::P1Bubble);
        let k = assemble_stiffness(mesh, &space, Coefficient::Const(1.0))?;
        let red = DirichletReduction::new(space.ndofs(), space.fixed());
        let zero = vec![0.0; space.ndofs()];
        let (k_ii, _) = red.reduce(&k, &zero, &zero);
        Ok(RieszMap { chol: Cholesky::factor(&k_ii)?, space, red })
    }

    pub fn space(&self) -> &FeSpace {
        &self.space
    }

    /// Representer of the functional with full-length coefficient vector `b`.
    pub fn representer(&self, b: &[f64]) -> Result<Vec<f64>> {
        let b_i: Vec<f64> = self.red.free().iter().map(|&i| b[i]).collect();
        let r = self.chol.solve(&b_i)?;
        Ok(self.red.expand(&r, &vec![0.0; self.space.ndofs()]))
    }

    /// Dual norm `sup_v b(v) / ‖∇v‖`, i.e. `‖∇r‖_{L²}`.
    pub fn dual_norm(&self, b: &[f64]) -> Result<f64> {
        let r = self.representer(b)?;
        Ok(crate::linalg::dot(b, &r).max(0.0).sqrt())
    }
}

/// Discrete `H⁻¹` norm of a latent field `w`: `‖∇r‖` where `(∇r, ∇v) = (w, v)`
/// over the P1-bubble space on `mesh`.
pub fn compute_hminus1_norm(mesh: &Mesh, space_w: &FeSpace, w: &[f64]) -> Result<f64> {
    if w.len() != space_w.ndofs() {
        return Err(Error::Dimension("field does not match its space".into()));
    }
    let riesz = RieszMap::new(mesh)?;
    let b = assemble_coupling(mesh, riesz.space(), space_w)?.mul_vec(w);
    riesz.dual_norm(&b)
}

/// Dense Gram matrix `Bᵀ K⁻¹ B` restricted to free rows, for the columns of `b`.
fn dual_gram(
    riesz: &RieszMap,
    b: &CsrMatrix,
    prolong: impl Fn(usize) -> Vec<(usize, f64)>,
    n: usize,
) -> Result<DMatrix<f64>> {
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut x = vec![0.0; b.ncols()];
            for (k, v) in prolong(j) {
                x[k] = v;
            }
            b.mul_vec(&x)
        })
        .collect();
    let free = riesz.red.free();
    let rhs: Vec<Vec<f64>> = cols.iter().map(|c| free.iter().map(|&i| c[i]).collect()).collect();
    let sol = riesz.chol.solve_many(&rhs)?;
    Ok(DMatrix::from_fn(n, n, |i, j| crate::linalg::dot(&rhs[i], &sol[j])))
}

/// Discrete inf-sup constant of the (P1-bubble, P0) pair on `mesh`:
///
/// ```text
/// β = min_φ  sup_v (φ, v) / ‖∇v‖  /  ‖φ‖_{H⁻¹}
/// ```
///
/// with the denominator evaluated on the mesh refined `reference_refinements`
/// times. Computed as the
/// square root of the smallest generalized eigenvalue of the two Gram matrices.
pub fn inf_sup_constant(mesh: &Mesh, reference_refinements: usize) -> Result<f64> {
    if reference_refinements == 0 {
        return Err(Error::InvalidParameter("the reference norm needs at least one refinement".into()));
    }
    let depth = reference_refinements;
    let n = mesh.n_cells();
    let coarse = RieszMap::new(mesh)?;
    let w = build_space(mesh, SpaceKind::P0Broken);
    let b = assemble_coupling(mesh, coarse.space(), &w)?;
    let s1 = dual_gram(&coarse, &b, |j| vec![(j, 1.0)], n)?;
    let fine_mesh = mesh.refined(depth);
    let fine = RieszMap::new(&fine_mesh)?;
    let wf = build_space(&fine_mesh, SpaceKind::P0Broken);
    let bf = assemble_coupling(&fine_mesh, fine.space(), &wf)?;
    let per = 1usize << (2 * depth);
    let s2 = dual_gram(&fine, &bf, |j| (per * j..per * j + per).map(|k| (k, 1.0)).collect(), n)?;
    let l = s2.cholesky().ok_or_else(|| Error::NotSpd("reference H^-1 Gram matrix".into()))?.l();
    let l_inv = l.clone().try_inverse().ok_or_else(|| Error::LinearSolver("triangular inverse".into()))?;
    let m = &l_inv * s1 * l_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(min.max(0.0).sqrt())
}

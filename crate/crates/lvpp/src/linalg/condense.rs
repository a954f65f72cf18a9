use super::csr::CsrMatrix;
use super::solve::{solve_spd, Cholesky};
use super::DirichletReduction;
use crate::error::{Error, Result};

/// Block system
///
/// ```text
/// [ A   B ] [u]   [rhs_v]
/// [ Bᵀ -C ] [δ] = [rhs_w]
/// ```
///
/// with `A` SPD and `C` diagonal.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub c: Vec<f64>,
    pub rhs_v: Vec<f64>,
    pub rhs_w: Vec<f64>,
}

impl SaddleSystem {
    fn check(&self) -> Result<()> {
        let (nv, nw) = (self.a.nrows(), self.c.len());
        if self.a.ncols() != nv || self.b.shape() != (nv, nw) || self.rhs_v.len() != nv || self.rhs_w.len() != nw {
            return Err(Error::Dimension(format!(
                "saddle blocks A {:?}, B {:?}, C {}, rhs {} / {}",
                self.a.shape(),
                self.b.shape(),
                nw,
                self.rhs_v.len(),
                self.rhs_w.len()
            )));
        }
        if let Some(k) = self.c.iter().position(|c| !(*c > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "diagonal block entry {k} is {} (the latent block must be positive)",
                self.c[k]
            )));
        }
        Ok(())
    }

    /// The unreduced block matrix, for reference solves.
    pub fn full_matrix(&self) -> CsrMatrix {
        let nv = self.a.nrows();
        let mut t: Vec<_> = self.a.triplets().collect();
        for (i, j, v) in self.b.triplets() {
            t.push((i, nv + j, v));
            t.push((nv + j, i, v));
        }
        for (k, &c) in self.c.iter().enumerate() {
            t.push((nv + k, nv + k, -c));
        }
        CsrMatrix::from_triplets(nv + self.c.len(), nv + self.c.len(), &t).expect("block indices in range")
    }
}

/// Eliminates `δ = C⁻¹(Bᵀu − rhs_w)` and solves `(A + B C⁻¹ Bᵀ) u = rhs_v + B C⁻¹ rhs_w`.
pub fn condense_and_solve(sys: &SaddleSystem) -> Result<(Vec<f64>, Vec<f64>)> {
    sys.check()?;
    let cinv: Vec<f64> = sys.c.iter().map(|c| 1.0 / c).collect();
    let schur = sys.a.add_scaled(1.0, &sys.b.weighted_gram(&cinv)?)?;
    let scaled_w: Vec<f64> = sys.rhs_w.iter().zip(&cinv).map(|(r, ci)| r * ci).collect();
    let bw = sys.b.mul_vec(&scaled_w);
    let rhs: Vec<f64> = sys.rhs_v.iter().zip(&bw).map(|(r, b)| r + b).collect();
    let u = solve_spd(&schur, &rhs, 1e-12)?;
    let btu = sys.b.mul_transpose_vec(&u);
    let delta: Vec<f64> = btu.iter().zip(&sys.rhs_w).zip(&cinv).map(|((bu, r), ci)| (bu - r) * ci).collect();
    Ok((u, delta))
}

/// Relative residuals of the two block rows.
pub fn block_residuals(sys: &SaddleSystem, u: &[f64], delta: &[f64]) -> (f64, f64) {
    let au = sys.a.mul_vec(u);
    let bd = sys.b.mul_vec(delta);
    let btu = sys.b.mul_transpose_vec(u);
    let rel = |res: f64, scale: f64| if scale > 0.0 { res / scale } else { res };
    let r1: f64 = (0..u.len()).map(|i| (au[i] + bd[i] - sys.rhs_v[i]).powi(2)).sum::<f64>().sqrt();
    let s1 = super::norm2(&sys.rhs_v) + super::norm2(&au) + super::norm2(&bd);
    let r2: f64 = (0..delta.len()).map(|k| (btu[k] - sys.c[k] * delta[k] - sys.rhs_w[k]).powi(2)).sum::<f64>().sqrt();
    let cd: Vec<f64> = sys.c.iter().zip(delta).map(|(c, d)| c * d).collect();
    let s2 = super::norm2(&sys.rhs_w) + super::norm2(&btu) + super::norm2(&cd);
    (rel(r1, s1), rel(r2, s2))
}

/// One cell's contribution to a system whose unknowns are shared dofs `x`
/// (three per cell) and two cell-private unknowns `y`:
///
/// ```text
/// [ A_xx  A_xy ] [x]   [r_x]
/// [ A_yx  A_yy ] [y] = [r_y]
/// ```
///
/// `A_yx = A_xyᵀ`; `A_yy` may be indefinite but must be invertible.
#[derive(Clone, Copy, Debug)]
pub struct CellBlock {
    pub dofs: [usize; 3],
    pub a_xx: [[f64; 3]; 3],
    pub a_xy: [[f64; 2]; 3],
    pub a_yy: [[f64; 2]; 2],
    pub r_y: [f64; 2],
}

impl CellBlock {
    fn inverse_yy(&self) -> Result<[[f64; 2]; 2]> {
        let [[p, q], [r, s]] = self.a_yy;
        let (ps, qr) = (p * s, q * r);
        let det = ps - qr;
        // Only a difference of like-signed products can lose digits.
        let cancels = ps * qr > 0.0 && det.abs() <= 1e-14 * ps.abs().max(qr.abs());
        if det == 0.0 || cancels || !det.is_finite() || !(p / det).is_finite() || !(s / det).is_finite() {
            return Err(Error::LinearSolver(format!("singular local block {:?}", self.a_yy)));
        }
        Ok([[s / det, -q / det], [-r / det, p / det]])
    }

    /// Local Schur complement `A_xx − A_xy A_yy⁻¹ A_yx` and the rhs correction `A_xy A_yy⁻¹ r_y`.
    fn reduce(&self) -> Result<([[f64; 3]; 3], [f64; 3])> {
        let inv = self.inverse_yy()?;
        let mut g = [[0.0; 2]; 3];
        for i in 0..3 {
            for k in 0..2 {
                g[i][k] = self.a_xy[i][0] * inv[0][k] + self.a_xy[i][1] * inv[1][k];
            }
        }
        let mut s = self.a_xx;
        let mut corr = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] -= g[i][0] * self.a_xy[j][0] + g[i][1] * self.a_xy[j][1];
            }
            corr[i] = g[i][0] * self.r_y[0] + g[i][1] * self.r_y[1];
        }
        Ok((s, corr))
    }

    fn recover(&self, x: &[f64]) -> Result<[f64; 2]> {
        let inv = self.inverse_yy()?;
        let mut rhs = self.r_y;
        for (i, &d) in self.dofs.iter().enumerate() {
            rhs[0] -= self.a_xy[i][0] * x[d];
            rhs[1] -= self.a_xy[i][1] * x[d];
        }
        Ok([inv[0][0] * rhs[0] + inv[0][1] * rhs[1], inv[1][0] * rhs[0] + inv[1][1] * rhs[1]])
    }
}

/// Result of [`condense_cells`]: shared unknowns and the two private unknowns per cell.
#[derive(Clone, Debug)]
pub struct CellCondensed {
    pub x: Vec<f64>,
    pub y: Vec<[f64; 2]>,
}

/// Eliminates the cell-private unknowns cell by cell, solves the SPD system
/// for the shared unknowns with the entries flagged in `fixed` prescribed to
/// the values in `x_fixed`, and back-substitutes.
pub fn condense_cells(
    n_x: usize,
    blocks: &[CellBlock],
    r_x: &[f64],
    fixed: &[bool],
    x_fixed: &[f64],
) -> Result<CellCondensed> {
    if r_x.len() != n_x || fixed.len() != n_x || x_fixed.len() != n_x {
        return Err(Error::Dimension("shared-dof vectors must have n_x entries".into()));
    }
    let reduced = crate::par::map_range(blocks.len(), |c| blocks[c].reduce());
    let mut triplets = Vec::with_capacity(9 * blocks.len());
    let mut rhs = r_x.to_vec();
    for (blk, red) in blocks.iter().zip(reduced) {
        let (s, corr) = red?;
        for i in 0..3 {
            rhs[blk.dofs[i]] -= corr[i];
            for j in 0..3 {
                triplets.push((blk.dofs[i], blk.dofs[j], s[i][j]));
            }
        }
    }
    let schur = CsrMatrix::from_triplets(n_x, n_x, &triplets)?;
    let red = DirichletReduction::new(n_x, fixed);
    let (a_ii, b_i) = red.reduce(&schur, &rhs, x_fixed);
    let x_i = if a_ii.nrows() == 0 { Vec::new() } else { Cholesky::factor(&a_ii)?.solve(&b_i)? };
    let x = red.expand(&x_i, x_fixed);
    let y = crate::par::map_range(blocks.len(), |c| blocks[c].recover(&x));
    let y = y.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(CellCondensed { x, y })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_decouples() {
        let a = CsrMatrix::from_diagonal(&[2.0, 4.0]);
        let b = CsrMatrix::zeros(2, 1);
        let sys = SaddleSystem { a, b, c: vec![0.5], rhs_v: vec![2.0, 8.0], rhs_w: vec![1.0] };
        let (u, d) = condense_and_solve(&sys).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-14 && (u[1] - 2.0).abs() < 1e-14);
        assert!((d[0] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_latent_block_is_rejected() {
        let sys = SaddleSystem {
            a: CsrMatrix::identity(1),
            b: CsrMatrix::identity(1),
            c: vec![0.0],
            rhs_v: vec![0.0],
            rhs_w: vec![0.0],
        };
        assert!(condense_and_solve(&sys).is_err());
    }
}

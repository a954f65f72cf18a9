use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use super::csr::CsrMatrix;
use crate::error::{Error, Result};

/// Systems with more unknowns than this go to CG when [`SolverKind::Auto`] is used.
pub const DIRECT_LIMIT: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    Auto,
    Direct,
    Cg,
}

fn to_faer(a: &CsrMatrix, lower_only: bool) -> Result<SparseColMat<usize, f64>> {
    let t: Vec<Triplet<usize, usize, f64>> =
        a.triplets().filter(|&(i, j, _)| !lower_only || i >= j).map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    SparseColMat::try_new_from_triplets(a.nrows(), a.ncols(), &t)
        .map_err(|e| Error::LinearSolver(format!("sparse conversion: {e:?}")))
}

fn column(b: &[f64]) -> Mat<f64> {
    Mat::from_fn(b.len(), 1, |i, _| b[i])
}

fn check_finite(x: &[f64], what: &str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

/// Sparse Cholesky factor of an SPD matrix, reusable for many right-hand sides.
pub struct Cholesky {
    n: usize,
    llt: Llt<usize, f64>,
}

impl Cholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!("Cholesky of {:?}", a.shape())));
        }
        if a.diagonal().iter().any(|d| !(*d > 0.0)) {
            return Err(Error::NotSpd("nonpositive diagonal entry".into()));
        }
        let m = to_faer(a, true)?;
        let llt = m.sp_cholesky(Side::Lower).map_err(|e| Error::NotSpd(format!("factorization failed: {e:?}")))?;
        Ok(Cholesky { n: a.nrows(), llt })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Dimension(format!("rhs length {} vs {}", b.len(), self.n)));
        }
        let x = self.llt.solve(&column(b));
        let x: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        check_finite(&x, "Cholesky solve")?;
        Ok(x)
    }

    /// Solves for every column of the row-major `n x m` block `b`.
    pub fn solve_many(&self, b: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if b.is_empty() {
            return Ok(Vec::new());
        }
        let rhs = Mat::from_fn(self.n, b.len(), |i, j| b[j][i]);
        let x = self.llt.solve(&rhs);
        let out: Vec<Vec<f64>> = (0..b.len()).map(|j| (0..self.n).map(|i| x[(i, j)]).collect()).collect();
        for col in &out {
            check_finite(col, "Cholesky solve")?;
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn cg_impl(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize, parallel: bool) -> Result<(Vec<f64>, CgReport)> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension(format!("CG with {:?} and rhs {n}", a.shape())));
    }
    let diag = a.diagonal();
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::NotSpd("Jacobi preconditioner needs a positive diagonal".into()));
    }
    let dot = |x: &[f64], y: &[f64]| if parallel { super::par_dot(x, y) } else { super::dot(x, y) };
    let matvec = |x: &[f64], y: &mut [f64]| if parallel { a.par_mul_vec_into(x, y) } else { a.mul_vec_into(x, y) };
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, CgReport { iterations: 0, relative_residual: 0.0 }));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotSpd(format!("CG breakdown, pᵀAp = {pap:e} at iteration {it}")));
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let res = dot(&r, &r).sqrt() / bnorm;
        if res <= tol {
            return Ok((x, CgReport { iterations: it, relative_residual: res }));
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = dot(&r, &r).sqrt() / bnorm;
    Err(Error::NoConvergence { context: "Jacobi-preconditioned CG".into(), iterations: max_iter, residual: res })
}

/// Conjugate gradients with Jacobi preconditioning, started from zero.
pub fn cg_jacobi(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, CgReport)> {
    cg_impl(a, b, tol, max_iter, false)
}

/// [`cg_jacobi`] with parallel matrix-vector products and reductions.
pub fn par_cg_jacobi(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, CgReport)> {
    cg_impl(a, b, tol, max_iter, true)
}

pub fn solve_spd_with(a: &CsrMatrix, b: &[f64], tol: f64, kind: SolverKind) -> Result<Vec<f64>> {
    let direct = match kind {
        SolverKind::Direct => true,
        SolverKind::Cg => false,
        SolverKind::Auto => a.nrows() <= DIRECT_LIMIT,
    };
    if direct {
        Cholesky::factor(a)?.solve(b)
    } else {
        let max_iter = 20 * a.nrows() + 100;
        Ok(par_cg_jacobi(a, b, tol, max_iter)?.0)
    }
}

/// Solves an SPD system; direct below [`DIRECT_LIMIT`] unknowns, CG above.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    solve_spd_with(a, b, tol, SolverKind::Auto)
}

/// Sparse LU with partial pivoting for nonsymmetric systems.
pub fn solve_general(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() || b.len() != a.nrows() {
        return Err(Error::Dimension(format!("LU of {:?} with rhs {}", a.shape(), b.len())));
    }
    let m = to_faer(a, false)?;
    let lu: Lu<usize, f64> = m.sp_lu().map_err(|e| Error::LinearSolver(format!("LU failed: {e:?}")))?;
    let x = lu.solve(&column(b));
    let x: Vec<f64> = (0..b.len()).map(|i| x[(i, 0)]).collect();
    check_finite(&x, "LU solve")?;
    Ok(x)
}

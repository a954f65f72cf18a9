//! Sparse storage, linear solvers and elimination of the latent block.

mod condense;
mod csr;
mod solve;

pub use condense::{block_residuals, condense_and_solve, condense_cells, CellBlock, CellCondensed, SaddleSystem};
pub use csr::CsrMatrix;
pub use solve::{
    cg_jacobi, par_cg_jacobi, solve_general, solve_spd, solve_spd_with, CgReport, Cholesky, SolverKind, DIRECT_LIMIT,
};

/// Splits dofs into free and prescribed ones and moves prescribed values to
/// the right-hand side.
#[derive(Clone, Debug)]
pub struct DirichletReduction {
    n: usize,
    free: Vec<usize>,
    local: Vec<Option<usize>>,
}

impl DirichletReduction {
    pub fn new(n: usize, fixed: &[bool]) -> Self {
        assert_eq!(fixed.len(), n);
        let mut local = vec![None; n];
        let mut free = Vec::new();
        for i in 0..n {
            if !fixed[i] {
                local[i] = Some(free.len());
                free.push(i);
            }
        }
        DirichletReduction { n, free, local }
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn local(&self, i: usize) -> Option<usize> {
        self.local[i]
    }

    /// Returns `(A_II, b_I - A_IB g_B)` where `g` holds the full vector whose
    /// prescribed entries are used.
    pub fn reduce(&self, a: &CsrMatrix, b: &[f64], g: &[f64]) -> (CsrMatrix, Vec<f64>) {
        let mut triplets = Vec::with_capacity(a.nnz());
        let mut rhs: Vec<f64> = self.free.iter().map(|&i| b[i]).collect();
        for (li, &i) in self.free.iter().enumerate() {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                match self.local[j] {
                    Some(lj) => triplets.push((li, lj, v)),
                    None => rhs[li] -= v * g[j],
                }
            }
        }
        let m = CsrMatrix::from_triplets(self.free.len(), self.free.len(), &triplets)
            .expect("indices are in range by construction");
        (m, rhs)
    }

    /// Rows of `b` restricted to free dofs.
    pub fn restrict_rows(&self, b: &CsrMatrix) -> CsrMatrix {
        b.select_rows(&self.free)
    }

    /// Scatters free values into a copy of `g`.
    pub fn expand(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        let mut out = g.to_vec();
        out.resize(self.n, 0.0);
        for (li, &i) in self.free.iter().enumerate() {
            out[i] = x[li];
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn par_dot(a: &[f64], b: &[f64]) -> f64 {
    crate::par::sum_range(a.len(), |i| a[i] * b[i])
}

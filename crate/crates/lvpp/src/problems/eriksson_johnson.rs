use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::Point;

/// Characteristic roots `(r1, r2)` of mode `n`, with `r1 > 0 > r2`.
pub fn eriksson_johnson_roots(epsilon: f64, n: usize) -> (f64, f64) {
    let lambda = (n as f64 * PI).powi(2) * epsilon;
    let s = (1.0 + 4.0 * epsilon * lambda).sqrt();
    ((1.0 + s) / (2.0 * epsilon), (1.0 - s) / (2.0 * epsilon))
}

fn mode(epsilon: f64, n: usize, x: f64) -> (f64, f64) {
    let (r1, r2) = eriksson_johnson_roots(epsilon, n);
    let denom = r1 * (-r2).exp() - r2 * (-r1).exp();
    let (e1, e2) = ((r1 * (x - 1.0)).exp(), (r2 * (x - 1.0)).exp());
    ((e2 - e1) / denom, (r2 * e2 - r1 * e1) / denom)
}

/// Separated solution of `-ε Δu + ∂u/∂x = 0` on the unit square with mode
/// amplitudes `coeffs[n - 1]`; vanishes at `x = 1` and has zero normal
/// derivative at `y = 0, 1`.
pub fn eriksson_johnson_exact(x: f64, y: f64, epsilon: f64, coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| {
            let n = i + 1;
            c * mode(epsilon, n, x).0 * (n as f64 * PI * y).cos()
        })
        .sum()
}

pub fn eriksson_johnson_gradient(x: f64, y: f64, epsilon: f64, coeffs: &[f64]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (i, c) in coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0) {
        let k = (i + 1) as f64 * PI;
        let (v, dv) = mode(epsilon, i + 1, x);
        g[0] += c * dv * (k * y).cos();
        g[1] -= c * v * k * (k * y).sin();
    }
    g
}

/// First separated mode rescaled into `[0, 1]`: `u = (1 + m) / 2`, where `m`
/// is the mode normalized so that `m(0, y) = cos πy`. The bounds are reached
/// only at the corners `(0, 0)` and `(0, 1)`.
#[derive(Clone, Copy, Debug)]
pub struct BoundedAdvectionBenchmark {
    pub epsilon: f64,
    pub beta: [f64; 2],
    scale: f64,
}

impl BoundedAdvectionBenchmark {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("diffusion must be positive, got {epsilon}")));
        }
        let amplitude = mode(epsilon, 1, 0.0).0;
        Ok(Self { epsilon, beta: [1.0, 0.0], scale: 0.5 / amplitude })
    }

    pub fn exact(&self, x: Point) -> f64 {
        0.5 + self.scale * eriksson_johnson_exact(x[0], x[1], self.epsilon, &[1.0])
    }

    pub fn gradient(&self, x: Point) -> [f64; 2] {
        let g = eriksson_johnson_gradient(x[0], x[1], self.epsilon, &[1.0]);
        [self.scale * g[0], self.scale * g[1]]
    }

    pub fn source(&self, _x: Point) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_for_small_diffusion() {
        let (r1, r2) = eriksson_johnson_roots(0.01, 1);
        assert!((r1 - 100.0986).abs() < 1e-4);
        assert!((r2 + 0.098598).abs() < 1e-6);
    }

    #[test]
    fn vanishes_on_outflow_edge() {
        for &y in &[0.0, 0.3, 0.77, 1.0] {
            assert_eq!(eriksson_johnson_exact(1.0, y, 0.01, &[1.0, 0.5]), 0.0);
        }
    }

    #[test]
    fn satisfies_the_pde() {
        let eps = 0.05;
        let (r1, r2) = eriksson_johnson_roots(eps, 1);
        let denom = r1 * (-r2).exp() - r2 * (-r1).exp();
        for &(x, y) in &[(0.1, 0.2), (0.5, 0.9), (0.93, 0.41)] {
            let (e1, e2) = ((r1 * (x - 1.0)).exp(), (r2 * (x - 1.0)).exp());
            let xx = (e2 - e1) / denom;
            let dx = (r2 * e2 - r1 * e1) / denom;
            let dxx = (r2 * r2 * e2 - r1 * r1 * e1) / denom;
            let cy = (PI * y).cos();
            let lap = dxx * cy - PI * PI * xx * cy;
            assert!((-eps * lap + dx * cy).abs() < 1e-8);
            let g = eriksson_johnson_gradient(x, y, eps, &[1.0]);
            assert!((g[0] - dx * cy).abs() < 1e-12);
        }
    }

    #[test]
    fn neumann_on_horizontal_edges() {
        for &x in &[0.0, 0.4, 0.99] {
            assert!(eriksson_johnson_gradient(x, 0.0, 0.01, &[1.0])[1].abs() < 1e-10);
            assert!(eriksson_johnson_gradient(x, 1.0, 0.01, &[1.0])[1].abs() < 1e-10);
        }
    }

    #[test]
    fn benchmark_range() {
        let b = BoundedAdvectionBenchmark::new(0.01).unwrap();
        assert!((b.exact([0.0, 0.0]) - 1.0).abs() < 1e-14);
        assert!(b.exact([0.0, 1.0]).abs() < 1e-14);
        assert_eq!(b.exact([1.0, 0.3]), 0.5);
        for i in 0..=20 {
            for j in 0..=20 {
                let v = b.exact([i as f64 / 20.0, j as f64 / 20.0]);
                assert!((-1e-14..=1.0 + 1e-14).contains(&v));
            }
        }
    }
}

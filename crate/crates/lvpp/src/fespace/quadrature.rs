use crate::error::{Error, Result};
use crate::mesh::CellGeometry;

/// Symmetric rule on the reference triangle; weights sum to its area, 1/2.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

fn orbit3(a: f64, w: f64, pts: &mut Vec<[f64; 3]>, wts: &mut Vec<f64>) {
    let b = 1.0 - 2.0 * a;
    for p in [[a, a, b], [a, b, a], [b, a, a]] {
        pts.push(p);
        wts.push(0.5 * w);
    }
}

fn orbit6(a: f64, b: f64, w: f64, pts: &mut Vec<[f64; 3]>, wts: &mut Vec<f64>) {
    let c = 1.0 - a - b;
    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        pts.push(p);
        wts.push(0.5 * w);
    }
}

impl QuadratureRule {
    /// The cheapest available rule that is exact for polynomials of `degree`.
    pub fn with_degree(degree: usize) -> Result<Self> {
        let mut p = Vec::new();
        let mut w = Vec::new();
        let exact = match degree {
            0 | 1 => {
                p.push([1.0 / 3.0; 3]);
                w.push(0.5);
                1
            }
            2 => {
                orbit3(1.0 / 6.0, 1.0 / 3.0, &mut p, &mut w);
                2
            }
            3 | 4 => {
                orbit3(0.445_948_490_915_965, 0.223_381_589_678_011, &mut p, &mut w);
                orbit3(0.091_576_213_509_771, 0.109_951_743_655_322, &mut p, &mut w);
                4
            }
            5 => {
                let s = 15f64.sqrt();
                p.push([1.0 / 3.0; 3]);
                w.push(0.5 * 9.0 / 40.0);
                orbit3((6.0 - s) / 21.0, (155.0 - s) / 1200.0, &mut p, &mut w);
                orbit3((6.0 + s) / 21.0, (155.0 + s) / 1200.0, &mut p, &mut w);
                5
            }
            6 => {
                orbit3(0.249_286_745_170_910, 0.116_786_275_726_379, &mut p, &mut w);
                orbit3(0.063_089_014_491_502, 0.050_844_906_370_207, &mut p, &mut w);
                orbit6(0.053_145_049_844_817, 0.310_352_451_033_784, 0.082_851_075_618_374, &mut p, &mut w);
                6
            }
            _ => return Err(Error::InvalidParameter(format!("no quadrature rule of degree {degree}"))),
        };
        Ok(QuadratureRule { points: p, weights: w, degree: exact })
    }

    /// Vertex rule used for mass lumping; exact for linear functions.
    pub fn vertex() -> Self {
        QuadratureRule {
            points: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            weights: vec![1.0 / 6.0; 3],
            degree: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `∫_T f` with `f` given in barycentric coordinates and physical position.
    pub fn integrate(&self, geom: &CellGeometry, mut f: impl FnMut([f64; 3], [f64; 2]) -> f64) -> f64 {
        let jac = 2.0 * geom.area;
        self.points.iter().zip(&self.weights).map(|(l, w)| w * jac * f(*l, geom.point(*l))).sum()
    }
}

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::lambert::lambert_w_branch;
use crate::error::{Error, Result};
use crate::mesh::{disk_mesh, unit_square_mesh, Mesh, Point};

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// `(-1, 1)^2`; level `L` has mesh size `√2 / 2^L`.
    Square,
    /// Unit disk; level `L` is the twelve-triangle base mesh refined `L` times.
    Disk,
}

impl Domain {
    pub fn mesh(&self, level: usize) -> Result<Mesh> {
        Ok(match self {
            Domain::Square => unit_square_mesh(2)?.refined(level),
            Domain::Disk => disk_mesh(level),
        })
    }
}

#[derive(Clone)]
pub struct ExactObstacle {
    pub u: ScalarFn,
    pub grad: VectorFn,
    pub lambda: ScalarFn,
}

/// `min ½|∇u|² − (f, u)` over `u = g` on the boundary and `u >= obstacle`.
#[derive(Clone)]
pub struct ObstacleProblem {
    pub name: &'static str,
    pub domain: Domain,
    pub f: ScalarFn,
    pub obstacle: ScalarFn,
    pub g: ScalarFn,
    pub exact: Option<ExactObstacle>,
}

impl fmt::Debug for ObstacleProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObstacleProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

fn arc(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

/// Solution `x⁴` on the right half of the square, zero on the left half, where
/// both the constraint and the multiplier vanish.
pub fn biactive_problem() -> ObstacleProblem {
    let u = arc(|x| if x[0] >= 0.0 { x[0].powi(4) } else { 0.0 });
    ObstacleProblem {
        name: "biactive",
        domain: Domain::Square,
        f: arc(|x| if x[0] >= 0.0 { -12.0 * x[0] * x[0] } else { 0.0 }),
        obstacle: arc(|_| 0.0),
        g: u.clone(),
        exact: Some(ExactObstacle {
            u,
            grad: Arc::new(|x| if x[0] >= 0.0 { [4.0 * x[0].powi(3), 0.0] } else { [0.0, 0.0] }),
            lambda: arc(|_| 0.0),
        }),
    }
}

/// Zero obstacle and boundary data with load `2π² sin πx sin πy`.
pub fn strict_complementarity_problem() -> ObstacleProblem {
    ObstacleProblem {
        name: "strict",
        domain: Domain::Square,
        f: arc(|x| 2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin()),
        obstacle: arc(|_| 0.0),
        g: arc(|_| 0.0),
        exact: None,
    }
}

/// `u = (1 − 4r²)⁴` inside `r < 1/2`; the multiplier jumps from 0 to 1 at `r² = 3/4`.
pub fn nonsmooth_multiplier_problem() -> ObstacleProblem {
    let lambda = arc(|x| if x[0] * x[0] + x[1] * x[1] > 0.75 { 1.0 } else { 0.0 });
    let lam = lambda.clone();
    ObstacleProblem {
        name: "nonsmooth",
        domain: Domain::Square,
        f: arc(move |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let minus_lap = if r2 < 0.25 {
                let s = 1.0 - 4.0 * r2;
                64.0 * s.powi(3) - 768.0 * r2 * s * s
            } else {
                0.0
            };
            minus_lap - lam(x)
        }),
        obstacle: arc(|_| 0.0),
        g: arc(|_| 0.0),
        exact: Some(ExactObstacle {
            u: arc(|x| {
                let s = 1.0 - 4.0 * (x[0] * x[0] + x[1] * x[1]);
                if s > 0.0 {
                    s.powi(4)
                } else {
                    0.0
                }
            }),
            grad: Arc::new(|x| {
                let s = 1.0 - 4.0 * (x[0] * x[0] + x[1] * x[1]);
                if s > 0.0 {
                    let c = -32.0 * s.powi(3);
                    [c * x[0], c * x[1]]
                } else {
                    [0.0, 0.0]
                }
            }),
            lambda,
        }),
    }
}

/// Slope of the linear continuation of the hemisphere obstacle outside `r = 1/2`.
pub const SPHERE_CONE_SLOPE: f64 = 5.0;

/// Contact radius `a` and log coefficient `A` of the hemisphere solution.
pub fn spherical_constants() -> (f64, f64) {
    let e2 = std::f64::consts::E.powi(2);
    let w = lambert_w_branch(-1.0 / (2.0 * e2), -1).expect("argument inside the branch domain");
    let a = (0.5 * w + 1.0).exp();
    let big_a = (0.25 - a * a).sqrt() / a.ln();
    (a, big_a)
}

fn hemisphere(r: f64) -> f64 {
    if r <= 0.5 {
        (0.25 - r * r).max(0.0).sqrt()
    } else {
        -SPHERE_CONE_SLOPE * (r - 0.5)
    }
}

/// Membrane over a hemisphere of radius 1/2 on the unit disk, zero load and boundary data.
pub fn spherical_obstacle_problem() -> ObstacleProblem {
    let (a, big_a) = spherical_constants();
    ObstacleProblem {
        name: "spherical",
        domain: Domain::Disk,
        f: arc(|_| 0.0),
        obstacle: arc(|x| hemisphere(x[0].hypot(x[1]))),
        g: arc(|_| 0.0),
        exact: Some(ExactObstacle {
            u: arc(move |x| {
                let r = x[0].hypot(x[1]);
                if r <= a {
                    hemisphere(r)
                } else {
                    big_a * r.ln()
                }
            }),
            grad: Arc::new(move |x| {
                let r2 = x[0] * x[0] + x[1] * x[1];
                if r2.sqrt() <= a {
                    let s = (0.25 - r2).sqrt();
                    [-x[0] / s, -x[1] / s]
                } else {
                    [big_a * x[0] / r2, big_a * x[1] / r2]
                }
            }),
            lambda: arc(move |x| {
                let r2 = x[0] * x[0] + x[1] * x[1];
                if r2.sqrt() <= a {
                    let s = (0.25 - r2).sqrt();
                    2.0 / s + r2 / s.powi(3)
                } else {
                    0.0
                }
            }),
        }),
    }
}

pub fn obstacle_problem_by_name(name: &str) -> Result<ObstacleProblem> {
    match name {
        "biactive" => Ok(biactive_problem()),
        "strict" | "strict-complementarity" => Ok(strict_complementarity_problem()),
        "nonsmooth" | "nonsmooth-multiplier" => Ok(nonsmooth_multiplier_problem()),
        "spherical" | "sphere" => Ok(spherical_obstacle_problem()),
        other => Err(Error::InvalidParameter(format!(
            "unknown obstacle problem '{other}' (expected biactive, strict, nonsmooth or spherical)"
        ))),
    }
}

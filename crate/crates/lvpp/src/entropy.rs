//! Boltzmann and Fermi–Dirac entropies, their gradients and Bregman divergences.
//!
//! All functions are pointwise. Field-valued shifts and bounds are evaluated
//! at the point where the entropy is evaluated.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Arguments of `exp` and of the logistic function are clamped to this magnitude.
pub const EXP_CLAMP: f64 = 700.0;

/// `exp(x)` with the argument clamped to `[-EXP_CLAMP, EXP_CLAMP]`.
#[inline]
pub fn exp_clamped(x: f64) -> f64 {
    x.clamp(-EXP_CLAMP, EXP_CLAMP).exp()
}

/// `x ln x - x` with `0 ln 0 = 0`.
pub fn neg_entropy_density(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("entropy density needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(x * x.ln() - x)
}

/// Relative entropy `u ln(u/w) - u + w`.
pub fn bregman_boltzmann(u: f64, w: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::Domain(format!("relative entropy needs w > 0, got {w}")));
    }
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("relative entropy needs u >= 0, got {u}")));
    }
    let log_term = if u == 0.0 { 0.0 } else { u * (u / w).ln() };
    Ok((log_term - u + w).max(0.0))
}

/// Bregman divergence of `x^2 / 2`.
pub fn bregman_quadratic(u: f64, w: f64) -> f64 {
    0.5 * (u - w) * (u - w)
}

/// `ln(x / (1 - x))`.
pub fn lnit(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("lnit needs 0 < x < 1, got {x}")));
    }
    Ok((x / (1.0 - x)).ln())
}

/// Logistic function. The result stays strictly inside `(0, 1)`.
#[inline]
pub fn sigmoid(y: f64) -> f64 {
    let y = y.clamp(-EXP_CLAMP, EXP_CLAMP);
    let s = if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Derivative of [`sigmoid`], `s (1 - s)`, evaluated without cancellation.
#[inline]
pub fn sigmoid_derivative(y: f64) -> f64 {
    let a = y.abs().min(EXP_CLAMP);
    let e = (-a).exp();
    e / ((1.0 + e) * (1.0 + e))
}

pub fn atanh_map(x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::Domain(format!("atanh needs |x| < 1, got {x}")));
    }
    Ok(x.atanh())
}

pub fn tanh_map(y: f64) -> f64 {
    y.tanh()
}

/// Gradient of the shifted entropy, `ln(u - phi)`.
pub fn shifted_gradient(u: f64, phi: f64) -> Result<f64> {
    if !(u > phi) {
        return Err(Error::Domain(format!("shifted gradient needs u > phi, got u={u}, phi={phi}")));
    }
    Ok((u - phi).ln())
}

/// A shift or bound that is either a constant or a function of position.
#[derive(Clone)]
pub enum Bound {
    Const(f64),
    Field(Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>),
}

impl Bound {
    pub fn field(f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        Bound::Field(Arc::new(f))
    }

    #[inline]
    pub fn at(&self, x: [f64; 2]) -> f64 {
        match self {
            Bound::Const(c) => *c,
            Bound::Field(f) => f(x),
        }
    }
}

impl fmt::Debug for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Const(c) => write!(f, "Const({c})"),
            Bound::Field(_) => write!(f, "Field(..)"),
        }
    }
}

impl From<f64> for Bound {
    fn from(c: f64) -> Self {
        Bound::Const(c)
    }
}

/// The two entropy families: one-sided (`u >= shift`) and two-sided
/// (`lower <= u <= upper`).
#[derive(Clone, Debug)]
pub enum EntropyKind {
    Boltzmann { shift: Bound },
    FermiDirac { lower: Bound, upper: Bound },
}

impl EntropyKind {
    pub fn boltzmann() -> Self {
        EntropyKind::Boltzmann { shift: Bound::Const(0.0) }
    }

    pub fn fermi_dirac() -> Self {
        EntropyKind::FermiDirac { lower: Bound::Const(0.0), upper: Bound::Const(1.0) }
    }

    fn bounds_at(&self, x: [f64; 2]) -> Result<(f64, f64)> {
        match self {
            EntropyKind::Boltzmann { shift } => Ok((shift.at(x), f64::INFINITY)),
            EntropyKind::FermiDirac { lower, upper } => {
                let (a, b) = (lower.at(x), upper.at(x));
                if !(a < b) {
                    return Err(Error::Domain(format!("bounds must satisfy lower < upper, got {a} >= {b}")));
                }
                Ok((a, b))
            }
        }
    }

    /// Entropy density at `u`.
    pub fn density(&self, u: f64, x: [f64; 2]) -> Result<f64> {
        let (a, b) = self.bounds_at(x)?;
        match self {
            EntropyKind::Boltzmann { .. } => neg_entropy_density(u - a),
            EntropyKind::FermiDirac { .. } => {
                if !(u >= a && u <= b) {
                    return Err(Error::Domain(format!("{u} outside [{a}, {b}]")));
                }
                Ok(xlnx(u - a) + xlnx(b - u))
            }
        }
    }

    /// Gradient of the entropy, mapping primal values to latent values.
    pub fn gradient(&self, u: f64, x: [f64; 2]) -> Result<f64> {
        let (a, b) = self.bounds_at(x)?;
        match self {
            EntropyKind::Boltzmann { .. } => shifted_gradient(u, a),
            EntropyKind::FermiDirac { .. } => lnit((u - a) / (b - a)),
        }
    }

    /// Inverse gradient, mapping latent values to strictly feasible primal values.
    pub fn primal(&self, psi: f64, x: [f64; 2]) -> Result<f64> {
        let (a, b) = self.bounds_at(x)?;
        Ok(match self {
            EntropyKind::Boltzmann { .. } => a + exp_clamped(psi),
            EntropyKind::FermiDirac { .. } => a + (b - a) * sigmoid(psi),
        })
    }

    /// Bregman divergence `D(u, w)`; `w` must be strictly feasible.
    pub fn divergence(&self, u: f64, w: f64, x: [f64; 2]) -> Result<f64> {
        let (a, b) = self.bounds_at(x)?;
        match self {
            EntropyKind::Boltzmann { .. } => bregman_boltzmann(u - a, w - a),
            EntropyKind::FermiDirac { .. } => {
                if !(w > a && w < b) {
                    return Err(Error::Domain(format!("w = {w} not interior to ({a}, {b})")));
                }
                if !(u >= a && u <= b) {
                    return Err(Error::Domain(format!("u = {u} outside [{a}, {b}]")));
                }
                let lower = if u == a { 0.0 } else { (u - a) * ((u - a) / (w - a)).ln() };
                let upper = if u == b { 0.0 } else { (b - u) * ((b - u) / (b - w)).ln() };
                Ok((lower + upper).max(0.0))
            }
        }
    }
}

fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

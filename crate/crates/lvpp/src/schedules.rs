//! Step-size sequences `alpha_k` and the error ratios they imply.
//!
//! With the divergence between the solution and the initial guess normalized
//! to one, the optimization error after `k` steps is bounded by
//! `eps_k = 1 / (alpha_1 + ... + alpha_k)`. [`theoretical_error_ratio`]
//! evaluates that bound's successive ratios from closed-form partial sums.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_CAP: f64 = 1e10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    /// Constant step.
    Fixed { alpha: f64 },
    /// `alpha_k = c k (k+1) ... (k+m)`.
    Arithmetic { c: f64, m: u32 },
    /// `alpha_k = c mu^(k-1)`.
    Geometric { c: f64, mu: f64 },
    /// `alpha_1 = c`, `alpha_{k+1} = c k k!`.
    Factorial { c: f64 },
    /// Telescoping rule whose partial sums are `r^(1/(q-1)) mu^(q^(k-1))`.
    DoubleExp { r: f64, q: f64, mu: f64, cap: f64 },
    /// `alpha_k = min(max(floor, r^(q^(k-1)) - alpha_{k-1}), cap)` with `alpha_1 = floor`.
    PaperDoubleExp { r: f64, q: f64, floor: f64, cap: f64 },
}

impl StepRule {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("{msg} in {self}")));
        match *self {
            StepRule::Fixed { alpha } if !(alpha > 0.0) => bad("alpha must be positive"),
            StepRule::Arithmetic { c, .. } | StepRule::Factorial { c } if !(c > 0.0) => bad("c must be positive"),
            StepRule::Geometric { c, mu } if !(c > 0.0 && mu > 1.0) => bad("need c > 0 and mu > 1"),
            StepRule::DoubleExp { r, q, mu, cap } if !(r > 1.0 && q > 1.0 && mu > 1.0 && cap > 0.0) => {
                bad("need r > 1, q > 1, mu > 1, cap > 0")
            }
            StepRule::PaperDoubleExp { r, q, floor, cap } if !(r > 1.0 && q > 1.0 && floor > 0.0 && cap >= floor) => {
                bad("need r > 1, q > 1, 0 < floor <= cap")
            }
            _ => Ok(()),
        }
    }

    /// Natural log of the partial sum `alpha_1 + ... + alpha_k` for the rules
    /// with a closed form.
    pub fn log_partial_sum(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidParameter("partial sums start at k = 1".into()));
        }
        let kf = k as f64;
        Ok(match *self {
            StepRule::Fixed { alpha } => (kf * alpha).ln(),
            StepRule::Arithmetic { c, m } => {
                let prod: f64 = (0..=m + 1).map(|j| (kf + j as f64).ln()).sum();
                c.ln() + prod - ((m + 2) as f64).ln()
            }
            StepRule::Geometric { c, mu } => c.ln() + (mu.powf(kf) - 1.0).ln() - (mu - 1.0).ln(),
            StepRule::Factorial { c } => c.ln() + (1..=k).map(|j| (j as f64).ln()).sum::<f64>(),
            StepRule::DoubleExp { r, q, mu, .. } => r.ln() / (q - 1.0) + q.powf(kf - 1.0) * mu.ln(),
            StepRule::PaperDoubleExp { .. } => {
                return Err(Error::InvalidParameter("no closed-form partial sum for the capped rule".into()))
            }
        })
    }
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StepRule::Fixed { alpha } => write!(f, "fixed:{alpha}"),
            StepRule::Arithmetic { c, m } => write!(f, "arith:{c}:{m}"),
            StepRule::Geometric { c: 1.0, mu } => write!(f, "geo:{mu}"),
            StepRule::Geometric { c, mu } => write!(f, "geo:{mu}:{c}"),
            StepRule::Factorial { c } => write!(f, "fact:{c}"),
            StepRule::DoubleExp { r, q, mu, .. } => write!(f, "dexp-tel:{r},{q},{mu}"),
            StepRule::PaperDoubleExp { r, q, .. } => write!(f, "dexp:{r},{q}"),
        }
    }
}

impl FromStr for StepRule {
    type Err = Error;

    /// Grammar: `fixed:A`, `geo:MU[:C]`, `arith:C:M`, `fact:C`,
    /// `dexp:R,Q[,FLOOR[,CAP]]`, `dexp-tel:R,Q,MU[,CAP]`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = |sep: char| -> Result<Vec<f64>> {
            args.split(sep)
                .filter(|a| !a.trim().is_empty())
                .map(|a| {
                    a.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParameter(format!("bad number '{a}' in schedule '{s}'")))
                })
                .collect()
        };
        let need = |v: &[f64], lo: usize, hi: usize| -> Result<()> {
            if v.len() < lo || v.len() > hi {
                Err(Error::InvalidParameter(format!("schedule '{s}' expects {lo}..={hi} parameters")))
            } else {
                Ok(())
            }
        };
        let rule = match name.trim() {
            "fixed" => {
                let v = nums(':')?;
                need(&v, 1, 1)?;
                StepRule::Fixed { alpha: v[0] }
            }
            "geo" => {
                let v = nums(':')?;
                need(&v, 1, 2)?;
                StepRule::Geometric { mu: v[0], c: v.get(1).copied().unwrap_or(1.0) }
            }
            "arith" => {
                let v = nums(':')?;
                need(&v, 2, 2)?;
                if v[1] < 0.0 || v[1].fract() != 0.0 {
                    return Err(Error::InvalidParameter(format!("arith order must be a nonnegative integer in '{s}'")));
                }
                StepRule::Arithmetic { c: v[0], m: v[1] as u32 }
            }
            "fact" => {
                let v = nums(':')?;
                need(&v, 1, 1)?;
                StepRule::Factorial { c: v[0] }
            }
            "dexp" => {
                let v = nums(',')?;
                need(&v, 2, 4)?;
                StepRule::PaperDoubleExp {
                    r: v[0],
                    q: v[1],
                    floor: v.get(2).copied().unwrap_or(1.0),
                    cap: v.get(3).copied().unwrap_or(DEFAULT_CAP),
                }
            }
            "dexp-tel" => {
                let v = nums(',')?;
                need(&v, 3, 4)?;
                StepRule::DoubleExp { r: v[0], q: v[1], mu: v[2], cap: v.get(3).copied().unwrap_or(DEFAULT_CAP) }
            }
            other => return Err(Error::InvalidParameter(format!("unknown schedule '{other}'"))),
        };
        rule.validate()?;
        Ok(rule)
    }
}

/// A stateful generator of `alpha_1, alpha_2, ...`.
#[derive(Clone, Debug)]
pub struct StepSchedule {
    rule: StepRule,
    k: u32,
    prev: f64,
    partial: f64,
}

impl StepSchedule {
    pub fn new(rule: StepRule) -> Result<Self> {
        rule.validate()?;
        Ok(StepSchedule { rule, k: 0, prev: 0.0, partial: 0.0 })
    }

    pub fn rule(&self) -> StepRule {
        self.rule
    }

    /// Index of the most recently produced step (0 before the first call).
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Produces `alpha_k` for the next `k` and advances.
    pub fn next_alpha(&mut self) -> f64 {
        self.k += 1;
        let k = self.k as f64;
        let alpha = match self.rule {
            StepRule::Fixed { alpha } => alpha,
            StepRule::Arithmetic { c, m } => c * (0..=m).map(|j| k + j as f64).product::<f64>(),
            StepRule::Geometric { c, mu } => c * mu.powf(k - 1.0),
            StepRule::Factorial { c } => {
                if self.k == 1 {
                    c
                } else {
                    let km1 = k - 1.0;
                    c * km1 * (1..self.k).map(|j| j as f64).product::<f64>()
                }
            }
            StepRule::DoubleExp { r, q, mu, cap } => {
                let scale = r.powf(1.0 / (q - 1.0));
                let total = scale * mu.powf(q.powf(k - 1.0));
                let a = if self.k == 1 { total } else { total - self.partial };
                a.min(cap)
            }
            StepRule::PaperDoubleExp { r, q, floor, cap } => {
                if self.k == 1 {
                    floor
                } else {
                    (r.powf(q.powf(k - 1.0)) - self.prev).max(floor).min(cap)
                }
            }
        };
        self.prev = alpha;
        self.partial += alpha;
        alpha
    }

    /// The first `n` steps of `rule`.
    pub fn take(rule: StepRule, n: usize) -> Result<Vec<f64>> {
        let mut s = StepSchedule::new(rule)?;
        Ok((0..n).map(|_| s.next_alpha()).collect())
    }
}

impl Iterator for StepSchedule {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_alpha())
    }
}

/// `eps_{k+1} / eps_k` for the polynomial, geometric, factorial and fixed
/// rules, and `eps_{k+1} / eps_k^q` for the telescoping double-exponential rule.
pub fn theoretical_error_ratio(rule: &StepRule, k: u32) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    rule.validate()?;
    let s_k = rule.log_partial_sum(k)?;
    let s_next = rule.log_partial_sum(k + 1)?;
    Ok(match *rule {
        StepRule::DoubleExp { q, .. } => (q * s_k - s_next).exp(),
        StepRule::Geometric { mu, .. } => (mu.powi(k as i32) - 1.0) / (mu.powi(k as i32 + 1) - 1.0),
        _ => (s_k - s_next).exp(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Order {
    Sublinear,
    Linear { rate: f64 },
    Superlinear { order: f64, rate: f64 },
}

/// Ratios within this distance of one count as sublinear.
pub const SUBLINEAR_TOL: f64 = 0.05;

/// Classifies a tail of error ratios. With `q == 1` the ratios are
/// `eps_{k+1} / eps_k`; with `q > 1` they are `eps_{k+1} / eps_k^q`.
pub fn classify_order(ratios: &[f64], q: f64) -> Result<Order> {
    if ratios.len() < 5 {
        return Err(Error::InvalidParameter(format!("need at least 5 ratios, got {}", ratios.len())));
    }
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::InvalidParameter("ratios must be finite and nonnegative".into()));
    }
    let tail = &ratios[ratios.len() - 3..];
    let limit = tail.iter().sum::<f64>() / tail.len() as f64;
    if q > 1.0 {
        return Ok(Order::Superlinear { order: q, rate: limit });
    }
    if (1.0 - limit).abs() <= SUBLINEAR_TOL {
        Ok(Order::Sublinear)
    } else if limit < 1.0 {
        Ok(Order::Linear { rate: limit })
    } else {
        Err(Error::InvalidParameter(format!("ratios tend to {limit} > 1: sequence is not converging")))
    }
}

use crate::entropy::EntropyKind;
use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::schedules::StepSchedule;

/// Linear equality `Σ weights_i · u_i = target` on the primal iterate.
#[derive(Clone, Debug)]
pub struct EqualityConstraint {
    pub weights: Vec<f64>,
    pub target: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct MirrorOptions {
    /// Absolute cap on the increment used for stopping.
    pub itol: f64,
    /// Tolerance on the increment divided by the step size.
    pub ntol: f64,
    pub max_iter: usize,
    /// Keep the primal iterate every this many steps; 0 keeps none.
    pub checkpoint_every: usize,
}

impl Default for MirrorOptions {
    fn default() -> Self {
        MirrorOptions { itol: 1e-2, ntol: 1e-5, max_iter: 500, checkpoint_every: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct MirrorStep {
    pub k: usize,
    pub alpha: f64,
    /// Objective value at the iterate the step started from.
    pub objective: f64,
    /// Constant latent translation restoring the equality constraint.
    pub correction: f64,
    /// Weighted ℓ¹ distance between consecutive primal iterates.
    pub increment: f64,
    /// `increment / alpha`.
    pub eta: f64,
    /// `|Σ w_i u_i − target|` after the correction.
    pub constraint_error: f64,
}

#[derive(Clone, Debug)]
pub struct MirrorHistory {
    pub steps: Vec<MirrorStep>,
    pub latent: Vec<f64>,
    pub primal: Vec<f64>,
    pub converged: bool,
    /// `(k, primal iterate after step k)` at the requested checkpoints.
    pub snapshots: Vec<(usize, Vec<f64>)>,
}

/// Primal values of every latent entry at the matching sample point.
pub fn primal_field(entropy: &EntropyKind, latent: &[f64], points: &[Point]) -> Result<Vec<f64>> {
    latent.iter().zip(points).map(|(&p, &x)| entropy.primal(p, x)).collect()
}

fn constraint_value(
    entropy: &EntropyKind,
    latent: &[f64],
    points: &[Point],
    c: &EqualityConstraint,
    shift: f64,
) -> Result<f64> {
    let mut s = 0.0;
    for ((&p, &x), &w) in latent.iter().zip(points).zip(&c.weights) {
        s += w * entropy.primal(p + shift, x)?;
    }
    Ok(s - c.target)
}

/// Finds the constant `c` with `Σ w_i primal(latent_i + c) = target` by
/// bracket expansion followed by bisection.
pub fn solve_translation(
    entropy: &EntropyKind,
    latent: &[f64],
    points: &[Point],
    constraint: &EqualityConstraint,
) -> Result<f64> {
    if constraint.weights.len() != latent.len() || points.len() != latent.len() {
        return Err(Error::Dimension("constraint weights, latent values and points differ in length".into()));
    }
    let h = |c: f64| constraint_value(entropy, latent, points, constraint, c);
    let (mut lo, mut hi) = (-1.0, 1.0);
    let (mut h_lo, mut h_hi) = (h(lo)?, h(hi)?);
    let mut expansions = 0;
    while h_lo > 0.0 || h_hi < 0.0 {
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Bracket(format!(
                "no translation reaches target {} (values {h_lo:.3e} .. {h_hi:.3e} over [{lo}, {hi}])",
                constraint.target
            )));
        }
        if h_lo > 0.0 {
            hi = lo;
            h_hi = h_lo;
            lo *= 2.0;
            h_lo = h(lo)?;
        } else {
            lo = hi;
            h_lo = h_hi;
            hi *= 2.0;
            h_hi = h(hi)?;
        }
    }
    if h_lo == 0.0 {
        return Ok(lo);
    }
    if h_hi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = h(mid)?;
        if hm == 0.0 {
            return Ok(mid);
        }
        if hm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Half-step mirror descent: a latent gradient step followed by a constant
/// translation enforcing the equality constraint.
///
/// `oracle` receives the primal iterate and returns the objective value and
/// the gradient expressed as one latent-sized vector. `norm_weights` defines
/// the weighted ℓ¹ norm of primal increments used for stopping; the loop ends
/// once an increment is at most `min(alpha_k * ntol, itol)`.
#[allow(clippy::too_many_arguments)]
pub fn mirror_descent<O>(
    latent0: Vec<f64>,
    points: &[Point],
    entropy: &EntropyKind,
    mut oracle: O,
    constraint: Option<&EqualityConstraint>,
    schedule: &mut StepSchedule,
    norm_weights: &[f64],
    opts: MirrorOptions,
) -> Result<MirrorHistory>
where
    O: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let n = latent0.len();
    if points.len() != n || norm_weights.len() != n {
        return Err(Error::Dimension("points and norm weights must match the latent length".into()));
    }
    let mut latent = latent0;
    let mut primal = primal_field(entropy, &latent, points)?;
    let mut steps = Vec::new();
    let mut converged = false;
    let mut snapshots = Vec::new();
    for k in 1..=opts.max_iter {
        let alpha = schedule.next_alpha();
        let (objective, grad) = oracle(&primal)?;
        if grad.len() != n {
            return Err(Error::Dimension(format!("gradient has length {}, expected {n}", grad.len())));
        }
        let mut next: Vec<f64> = latent.iter().zip(&grad).map(|(p, g)| p - alpha * g).collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("latent iterate at step {k}")));
        }
        let (correction, constraint_error) = match constraint {
            Some(c) => {
                let shift = solve_translation(entropy, &next, points, c)?;
                next.iter_mut().for_each(|v| *v += shift);
                let err = constraint_value(entropy, &next, points, c, 0.0)?.abs();
                (shift, err)
            }
            None => (0.0, 0.0),
        };
        let new_primal = primal_field(entropy, &next, points)?;
        let increment: f64 =
            new_primal.iter().zip(&primal).zip(norm_weights).map(|((a, b), w)| w * (a - b).abs()).sum();
        steps.push(MirrorStep { k, alpha, objective, correction, increment, eta: increment / alpha, constraint_error });
        latent = next;
        primal = new_primal;
        if opts.checkpoint_every > 0 && k % opts.checkpoint_every == 0 {
            snapshots.push((k, primal.clone()));
        }
        if increment <= (alpha * opts.ntol).min(opts.itol) {
            converged = true;
            break;
        }
    }
    Ok(MirrorHistory { steps, latent, primal, converged, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::lnit;
    use crate::schedules::StepRule;

    #[test]
    fn scalar_boltzmann_step() {
        let mut s = StepSchedule::new(StepRule::Fixed { alpha: 1.0 }).unwrap();
        let h = mirror_descent(
            vec![0.0],
            &[[0.0, 0.0]],
            &EntropyKind::boltzmann(),
            |x| Ok((0.5 * x[0] * x[0] + x[0], vec![x[0] + 1.0])),
            None,
            &mut s,
            &[1.0],
            MirrorOptions { max_iter: 1, ..Default::default() },
        )
        .unwrap();
        assert!((h.primal[0] - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn translation_restores_volume() {
        let points = vec![[0.0, 0.0]; 4];
        let latent = vec![lnit(0.3).unwrap(); 4];
        let c = EqualityConstraint { weights: vec![0.25; 4], target: 0.5 };
        let shift = solve_translation(&EntropyKind::fermi_dirac(), &latent, &points, &c).unwrap();
        assert!((shift - 0.847298).abs() < 1e-6);
    }

    #[test]
    fn unreachable_target_is_a_bracket_error() {
        let c = EqualityConstraint { weights: vec![1.0], target: 2.0 };
        let e = solve_translation(&EntropyKind::fermi_dirac(), &[0.0], &[[0.0, 0.0]], &c).unwrap_err();
        assert!(matches!(e, Error::Bracket(_)));
    }
}

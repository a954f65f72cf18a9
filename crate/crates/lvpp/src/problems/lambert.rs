use crate::error::{Error, Result};

const INV_E: f64 = 0.367_879_441_171_442_33;

/// Lambert W on the principal branch (`branch = 0`, `z >= -1/e`) or the lower
/// branch (`branch = -1`, `-1/e <= z < 0`), refined with Halley steps.
pub fn lambert_w_branch(z: f64, branch: i32) -> Result<f64> {
    if !z.is_finite() || z < -INV_E * (1.0 + 1e-15) {
        return Err(Error::Domain(format!("Lambert W undefined at z = {z}")));
    }
    let z = z.max(-INV_E);
    let p2 = 2.0 * (1.0 + std::f64::consts::E * z);
    if p2 <= 1e-30 {
        return Ok(-1.0);
    }
    let mut w = match branch {
        0 => {
            if z == 0.0 {
                return Ok(0.0);
            }
            if z < -0.25 {
                let p = p2.sqrt();
                -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
            } else if z < 3.0 {
                z.ln_1p() * (1.0 - z.ln_1p() / (2.0 + z.ln_1p()))
            } else {
                let l = z.ln();
                l - l.ln()
            }
        }
        -1 => {
            if z >= 0.0 {
                return Err(Error::Domain(format!("lower branch needs -1/e <= z < 0, got {z}")));
            }
            if z < -0.25 {
                let p = -p2.sqrt();
                -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
            } else {
                let l = (-z).ln();
                l - (-l).ln()
            }
        }
        _ => return Err(Error::Domain(format!("branch {branch} is not supported"))),
    };
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    if branch == -1 && w > -1.0 {
        w = -1.0;
    }
    Ok(w)
}

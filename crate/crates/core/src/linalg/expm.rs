use super::{require_square, solve_linear, LinalgError, Mat};

const PADE_ORDER: usize = 6;
/// Scaling target for `‖a t / 2^k‖∞`.
const SCALED_NORM: f64 = 0.5;

/// `e^{a t}` by diagonal Padé approximation with scaling and squaring.
pub fn expm_scaled(a: &Mat, t: f64) -> Result<Mat, LinalgError> {
    let n = require_square(a)?;
    if !t.is_finite() {
        return Err(LinalgError::Overflow);
    }
    let x = a.scale(t);
    let norm = x.norm_inf();
    let mut squarings = 0i32;
    if norm > SCALED_NORM {
        squarings = (norm / SCALED_NORM).log2().ceil() as i32;
        // Guard against rounding in the logarithm.
        while norm / 2f64.powi(squarings) > SCALED_NORM {
            squarings += 1;
        }
    }
    let x = x.scale(2f64.powi(-squarings));

    let mut c = 1.0;
    let mut num = Mat::identity(n);
    let mut den = Mat::identity(n);
    let mut power = Mat::identity(n);
    for k in 1..=PADE_ORDER {
        c *= (PADE_ORDER - k + 1) as f64 / (k * (2 * PADE_ORDER - k + 1)) as f64;
        power = x.matmul(&power);
        let term = power.scale(c);
        num = num.add(&term);
        den = if k % 2 == 0 { den.add(&term) } else { den.sub(&term) };
    }
    let mut e = solve_linear(&den, &num).map_err(|_| LinalgError::Overflow)?;
    for _ in 0..squarings {
        e = e.matmul(&e);
        if !e.is_finite() {
            return Err(LinalgError::Overflow);
        }
    }
    if !e.is_finite() {
        return Err(LinalgError::Overflow);
    }
    Ok(e)
}

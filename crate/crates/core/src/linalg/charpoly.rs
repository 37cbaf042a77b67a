use super::{require_square, LinalgError, Mat, Poly};

/// Largest order accepted by [`char_poly`]. The recurrence loses digits
/// combinatorially, so it serves as a small-order oracle only.
pub const CHAR_POLY_MAX_N: usize = 60;

/// Characteristic polynomial `det(sI - a)` and the matrix coefficients of
/// `adj(sI - a)` in descending powers of `s`, by the Faddeev–LeVerrier
/// recurrence.
///
/// The recurrence runs on `a / σ`, with `σ` the power of two nearest `‖a‖∞`,
/// and the results are rescaled exactly. This keeps intermediate magnitudes
/// near one.
pub fn char_poly(a: &Mat) -> Result<(Poly, Vec<Mat>), LinalgError> {
    let n = require_square(a)?;
    if n > CHAR_POLY_MAX_N {
        return Err(LinalgError::SizeLimit {
            n,
            limit: CHAR_POLY_MAX_N,
        });
    }
    let sigma = match a.norm_inf() {
        s if s > 0.0 => 2f64.powi(s.log2().round() as i32),
        _ => 1.0,
    };
    let b = a.scale(1.0 / sigma);

    let mut coeffs = vec![0.0; n + 1];
    coeffs[0] = 1.0;
    let mut adj = Vec::with_capacity(n);
    let mut m = Mat::identity(n);
    for k in 1..=n {
        if k > 1 {
            m = b.matmul(&m);
            for i in 0..n {
                m[(i, i)] += coeffs[k - 1];
            }
        }
        let bm = b.matmul(&m);
        coeffs[k] = -bm.trace() / k as f64;
        adj.push(m.clone());
    }

    let mut pow = 1.0;
    for (k, c) in coeffs.iter_mut().enumerate() {
        if k > 0 {
            pow *= sigma;
        }
        *c *= pow;
    }
    let mut pow = 1.0;
    for (k, mk) in adj.iter_mut().enumerate() {
        if k > 0 {
            pow *= sigma;
            *mk = mk.scale(pow);
        }
    }
    Ok((Poly::new(coeffs), adj))
}

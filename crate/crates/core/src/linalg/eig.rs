use super::{hessenberg, require_square, sort_desc, CScalar, LinalgError, Mat};

/// Subdiagonal entries at or below this fraction of their neighbouring
/// diagonal magnitudes are treated as zero.
const DEFLATION_TOL: f64 = 1e-14;
/// Total QR sweeps allowed per unit of matrix order.
const SWEEPS_PER_ORDER: usize = 50;

/// Diagonal similarity balancing with power-of-two scale factors.
///
/// Returns the balanced matrix `D⁻¹ a D` and the diagonal of `D`. Scaling by
/// powers of two is exact, so eigenvalues are unchanged bit for bit in the
/// similarity itself; only the later rounding behaviour improves.
pub fn balance(a: &Mat) -> (Mat, Vec<f64>) {
    const RADIX: f64 = 2.0;
    const SQRDX: f64 = RADIX * RADIX;
    let n = a.rows();
    let mut m = a.clone();
    let mut scale = vec![1.0; n];
    for _ in 0..100 {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= SQRDX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= SQRDX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                scale[i] *= f;
                let inv = 1.0 / f;
                for j in 0..n {
                    m[(i, j)] *= inv;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
    (m, scale)
}

/// Eigenvalues of a square matrix: isolation of decoupled diagonal entries,
/// balancing, Hessenberg reduction, then Francis double-shift QR with
/// deflation.
///
/// Complex eigenvalues come out as exact conjugate pairs. The result is
/// sorted by real part descending, then imaginary part descending.
pub fn eig_qr(a: &Mat) -> Result<Vec<CScalar>, LinalgError> {
    let n = require_square(a)?;
    if let Some(pos) = a.as_slice().iter().position(|x| !x.is_finite()) {
        return Err(LinalgError::NonFinite {
            row: pos / n,
            col: pos % n,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let (mut out, active) = isolate(a);
    if !active.is_empty() {
        let k = active.len();
        let mut sub = Mat::zeros(k, k);
        for (r, &i) in active.iter().enumerate() {
            for (c, &j) in active.iter().enumerate() {
                sub[(r, c)] = a[(i, j)];
            }
        }
        let (b, _) = balance(&sub);
        let (mut h, _) = hessenberg(&b);
        out.extend(hqr(&mut h)?);
    }
    sort_desc(&mut out);
    Ok(out)
}

/// Splits off eigenvalues that decouple exactly.
///
/// An index whose row or column has no off-diagonal entries inside the
/// remaining block contributes its diagonal entry as an eigenvalue and is
/// removed. Returns those eigenvalues and the indices still coupled.
fn isolate(a: &Mat) -> (Vec<CScalar>, Vec<usize>) {
    let mut active: Vec<usize> = (0..a.rows()).collect();
    let mut found = Vec::new();
    loop {
        let hit = active.iter().position(|&j| {
            let col = active.iter().all(|&i| i == j || a[(i, j)] == 0.0);
            col || active.iter().all(|&i| i == j || a[(j, i)] == 0.0)
        });
        match hit {
            Some(k) => {
                let j = active.remove(k);
                found.push(CScalar::new(a[(j, j)], 0.0));
            }
            None => return (found, active),
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix (destroys `h`).
fn hqr(h: &mut Mat) -> Result<Vec<CScalar>, LinalgError> {
    let nn = h.rows();
    let mut wr = vec![0.0; nn];
    let mut wi = vec![0.0; nn];
    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    let cap = SWEEPS_PER_ORDER * nn;
    let mut total = 0usize;
    let mut iter = 0usize;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z): (f64, f64, f64, f64, f64);
    let (mut x, mut y, mut w);
    let mut n = nn as isize - 1;

    while n >= 0 {
        let nu = n as usize;
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() <= DEFLATION_TOL * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            wr[nu] = h[(nu, nu)] + exshift;
            wi[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            x = h[(nu, nu)] + exshift;
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                wr[nu - 1] = x + z;
                wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                wi[nu - 1] = 0.0;
                wi[nu] = 0.0;
            } else {
                wr[nu - 1] = x + p;
                wr[nu] = x + p;
                wi[nu - 1] = z;
                wi[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            if total >= cap {
                return Err(LinalgError::NonConvergence {
                    iterations: total,
                    remaining: nu + 1,
                });
            }
            x = h[(nu, nu)];
            y = h[(nu - 1, nu - 1)];
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];

            // Exceptional shifts break cycles that the Francis shift can
            // fall into on highly structured matrices.
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 20 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total += 1;

            // Look for two consecutive small subdiagonal elements.
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < f64::EPSILON
                        * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows l..=n and columns m..=n.
            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                }
            }
        }
    }
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| CScalar::new(re, im))
        .collect())
}

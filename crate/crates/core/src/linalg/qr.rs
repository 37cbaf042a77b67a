use super::Mat;

/// Householder reflector `I - beta v vᵀ` that maps `x` onto `alpha e₁`.
/// Returns `(v, beta, alpha)`; `beta = 0` means no reflection is needed.
pub(crate) fn householder(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut v = x.to_vec();
    if x[1..].iter().all(|&t| t == 0.0) {
        return (v, 0.0, x[0]);
    }
    let alpha = if x[0] >= 0.0 { -norm } else { norm };
    v[0] -= alpha;
    let vnorm2: f64 = v.iter().map(|t| t * t).sum();
    if vnorm2 == 0.0 {
        return (v, 0.0, x[0]);
    }
    (v, 2.0 / vnorm2, alpha)
}

/// Applies `I - beta v vᵀ` from the left to rows `r0..r0+len(v)`, columns `c0..`.
pub(crate) fn reflect_left(m: &mut Mat, v: &[f64], beta: f64, r0: usize, c0: usize) {
    if beta == 0.0 {
        return;
    }
    for j in c0..m.cols() {
        let s: f64 = v.iter().enumerate().map(|(k, vk)| vk * m[(r0 + k, j)]).sum();
        let s = s * beta;
        if s != 0.0 {
            for (k, vk) in v.iter().enumerate() {
                m[(r0 + k, j)] -= s * vk;
            }
        }
    }
}

/// Applies `I - beta v vᵀ` from the right to columns `c0..c0+len(v)`, rows `r0..`.
pub(crate) fn reflect_right(m: &mut Mat, v: &[f64], beta: f64, r0: usize, c0: usize) {
    if beta == 0.0 {
        return;
    }
    for i in r0..m.rows() {
        let row = m.row_mut(i);
        let s: f64 = v.iter().enumerate().map(|(k, vk)| vk * row[c0 + k]).sum();
        let s = s * beta;
        if s != 0.0 {
            for (k, vk) in v.iter().enumerate() {
                row[c0 + k] -= s * vk;
            }
        }
    }
}

/// Full Householder QR: `a = q r` with `q` square orthogonal (rows×rows) and
/// `r` upper trapezoidal (rows×cols). Rank deficiency is permitted.
pub fn qr_decompose(a: &Mat) -> (Mat, Mat) {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut q = Mat::identity(m);
    for k in 0..n.min(m.saturating_sub(1)) {
        let x: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        let (v, beta, alpha) = householder(&x);
        if beta == 0.0 {
            continue;
        }
        reflect_left(&mut r, &v, beta, k, k);
        r[(k, k)] = alpha;
        for i in k + 1..m {
            r[(i, k)] = 0.0;
        }
        reflect_right(&mut q, &v, beta, 0, k);
    }
    (q, r)
}

/// QR with column pivoting: `a·P = q r`, with `|r₁₁| ≥ |r₂₂| ≥ …`.
pub struct PivotedQr {
    pub q: Mat,
    pub r: Mat,
    /// `perm[k]` is the original column placed at position `k`.
    pub perm: Vec<usize>,
}

impl PivotedQr {
    /// Numerical rank: count of diagonal entries above `tol · |r₁₁|`.
    pub fn rank(&self, tol: f64) -> usize {
        let k = self.r.rows().min(self.r.cols());
        if k == 0 {
            return 0;
        }
        let r00 = self.r[(0, 0)].abs();
        if r00 == 0.0 {
            return 0;
        }
        (0..k).take_while(|&i| self.r[(i, i)].abs() > tol * r00).count()
    }
}

pub fn qr_pivoted(a: &Mat) -> PivotedQr {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut q = Mat::identity(m);
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n.min(m) {
        // Recompute trailing column norms each step; sizes here are small and
        // this avoids the cancellation issues of downdating.
        let (best, _) = (k..n)
            .map(|j| (j, (k..m).map(|i| r[(i, j)] * r[(i, j)]).sum::<f64>()))
            .fold((k, -1.0), |acc, (j, s)| if s > acc.1 { (j, s) } else { acc });
        if best != k {
            perm.swap(k, best);
            for i in 0..m {
                let t = r[(i, k)];
                r[(i, k)] = r[(i, best)];
                r[(i, best)] = t;
            }
        }
        if k + 1 == m {
            break;
        }
        let x: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        let (v, beta, alpha) = householder(&x);
        if beta == 0.0 {
            continue;
        }
        reflect_left(&mut r, &v, beta, k, k);
        r[(k, k)] = alpha;
        for i in k + 1..m {
            r[(i, k)] = 0.0;
        }
        reflect_right(&mut q, &v, beta, 0, k);
    }
    PivotedQr { q, r, perm }
}

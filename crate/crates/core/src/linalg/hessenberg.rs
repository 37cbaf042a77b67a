use super::qr::{householder, reflect_left, reflect_right};
use super::Mat;

/// Orthogonal reduction to upper Hessenberg form: returns `(h, q)` with
/// `h = qᵀ a q` and `h[i][j] = 0` exactly for `i > j + 1`.
///
/// Panics if `a` is not square.
pub fn hessenberg(a: &Mat) -> (Mat, Mat) {
    assert!(a.is_square(), "hessenberg requires a square matrix");
    let n = a.rows();
    let mut h = a.clone();
    let mut q = Mat::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let (v, beta, alpha) = householder(&x);
        if beta == 0.0 {
            continue;
        }
        reflect_left(&mut h, &v, beta, k + 1, 0);
        reflect_right(&mut h, &v, beta, 0, k + 1);
        reflect_right(&mut q, &v, beta, 0, k + 1);
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    (h, q)
}

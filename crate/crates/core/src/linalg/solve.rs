use super::{require_square, LinalgError, Mat};

/// Pivots below this fraction of `‖a‖∞` are reported as singular.
const SINGULAR_TOL: f64 = 1e-13;

/// LU factorization with partial pivoting, `P a = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Mat,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &Mat) -> Result<Self, LinalgError> {
        let n = require_square(a)?;
        let scale = a.norm_inf();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            if pmax <= SINGULAR_TOL * scale || pmax == 0.0 {
                return Err(LinalgError::Singular { col: k, pivot: pmax });
            }
            if piv != k {
                perm.swap(piv, k);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = t;
                }
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &Mat) -> Result<Mat, LinalgError> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(LinalgError::DimensionMismatch(format!(
                "right-hand side has {} rows, system has {n}",
                b.rows()
            )));
        }
        let mut x = b.select_rows(&self.perm);
        for c in 0..x.cols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.lu[(i, i)];
            }
        }
        Ok(x)
    }
}

/// Solves `a x = b` by partial-pivoting elimination.
pub fn solve_linear(a: &Mat, b: &Mat) -> Result<Mat, LinalgError> {
    Lu::new(a)?.solve(b)
}

pub fn inverse(a: &Mat) -> Result<Mat, LinalgError> {
    solve_linear(a, &Mat::identity(a.rows()))
}

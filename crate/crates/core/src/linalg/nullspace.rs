use super::{qr_pivoted, CScalar, Mat};

/// Orthonormal basis (as columns) of `{x : m x = 0}`.
///
/// The rank is revealed by QR with column pivoting of `mᵀ`: diagonal entries
/// of `R` at or below `tol · |r₁₁|` count as zero. A full-column-rank input
/// yields a basis with zero columns.
pub fn nullspace_basis(m: &Mat, tol: f64) -> Mat {
    let n = m.cols();
    if m.rows() == 0 {
        return Mat::identity(n);
    }
    let f = qr_pivoted(&m.transpose());
    let rank = f.rank(tol);
    f.q.block(0, rank, n, n - rank)
}

/// Orthonormal basis of the complex nullspace of `mr + i·mi`, returned as
/// real and imaginary parts of the basis columns.
///
/// Computed from the real embedding `[[mr, -mi], [mi, mr]]`, whose nullspace
/// has twice the complex dimension; a complex Gram–Schmidt pass keeps one
/// vector per complex direction.
pub fn nullspace_basis_complex(mr: &Mat, mi: &Mat, tol: f64) -> (Mat, Mat) {
    let n = mr.cols();
    let top = Mat::hstack(&[mr, &mi.scale(-1.0)]);
    let bottom = Mat::hstack(&[mi, mr]);
    let real = nullspace_basis(&Mat::vstack(&[&top, &bottom]), tol);

    let mut basis: Vec<Vec<CScalar>> = Vec::new();
    for j in 0..real.cols() {
        let mut v: Vec<CScalar> = (0..n)
            .map(|i| CScalar::new(real[(i, j)], real[(n + i, j)]))
            .collect();
        for _ in 0..2 {
            for u in &basis {
                let dot: CScalar = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= dot * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for z in &mut v {
                *z /= norm;
            }
            basis.push(v);
        }
    }
    let mut re = Mat::zeros(n, basis.len());
    let mut im = Mat::zeros(n, basis.len());
    for (j, v) in basis.iter().enumerate() {
        for (i, z) in v.iter().enumerate() {
            re[(i, j)] = z.re;
            im[(i, j)] = z.im;
        }
    }
    (re, im)
}

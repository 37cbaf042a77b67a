//! Dense numerical kernels: real matrices, orthogonal factorizations,
//! eigenvalues by Hessenberg reduction and shifted QR, characteristic
//! polynomials, linear solves, nullspaces and the matrix exponential.

mod charpoly;
mod eig;
mod expm;
mod hessenberg;
mod mat;
mod nullspace;
mod poly;
mod qr;
mod solve;

pub use charpoly::{char_poly, CHAR_POLY_MAX_N};
pub use eig::{balance, eig_qr};
pub use expm::expm_scaled;
pub use hessenberg::hessenberg;
pub use mat::Mat;
pub use nullspace::{nullspace_basis, nullspace_basis_complex};
pub use poly::{companion_roots, Poly};
pub use qr::{qr_decompose, qr_pivoted, PivotedQr};
pub use solve::{inverse, solve_linear, Lu};

/// Complex scalar used for eigenvalues and pole locations.
pub type CScalar = num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("data length {got} does not match shape (expected {expected})")]
    DataLength { expected: usize, got: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("QR iteration did not converge after {iterations} iterations ({remaining} eigenvalues undeflated)")]
    NonConvergence { iterations: usize, remaining: usize },
    #[error("matrix of order {n} exceeds the characteristic polynomial limit of {limit}")]
    SizeLimit { n: usize, limit: usize },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("matrix is singular to working precision (pivot {pivot:.3e} at column {col})")]
    Singular { col: usize, pivot: f64 },
    #[error("matrix exponential overflowed")]
    Overflow,
}

pub(crate) fn require_square(a: &Mat) -> Result<usize, LinalgError> {
    if a.is_square() {
        Ok(a.rows())
    } else {
        Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}

/// Sorts eigenvalues by real part descending, then imaginary part descending.
pub fn sort_desc(values: &mut [CScalar]) {
    values.sort_by(|a, b| {
        b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
    });
}

/// Greedy nearest pairing of two equally sized point sets.
///
/// Repeatedly picks the globally closest unmatched pair. Returns, for each
/// index of `reference`, the index into `other` it was paired with.
pub fn match_nearest(reference: &[CScalar], other: &[CScalar]) -> Vec<usize> {
    assert_eq!(reference.len(), other.len());
    let n = reference.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, r) in reference.iter().enumerate() {
        for (j, o) in other.iter().enumerate() {
            pairs.push(((r - o).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut left = n;
    for (_, i, j) in pairs {
        if left == 0 {
            break;
        }
        if out[i] == usize::MAX && !used[j] {
            out[i] = j;
            used[j] = true;
            left -= 1;
        }
    }
    out
}

/// Largest relative error `|a - b| / max(|a|, 1)` after nearest pairing.
pub fn max_matched_error(reference: &[CScalar], other: &[CScalar]) -> f64 {
    let pairing = match_nearest(reference, other);
    reference
        .iter()
        .zip(&pairing)
        .map(|(r, &j)| (r - other[j]).norm() / r.norm().max(1.0))
        .fold(0.0, f64::max)
}

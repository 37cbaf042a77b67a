use super::{eig_qr, CScalar, LinalgError, Mat};

/// Real polynomial with coefficients in descending degree.
///
/// Leading zeros are stripped on construction; the zero polynomial is stored
/// as a single `0.0` coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let first = coeffs.iter().position(|&c| c != 0.0);
        let coeffs = match first {
            Some(k) => coeffs[k..].to_vec(),
            None => vec![0.0],
        };
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: CScalar) -> CScalar {
        self.coeffs
            .iter()
            .fold(CScalar::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let pad = |p: &Poly| {
            let mut v = vec![0.0; len - p.coeffs.len()];
            v.extend_from_slice(&p.coeffs);
            v
        };
        let (a, b) = (pad(self), pad(other));
        Poly::new(a.iter().zip(&b).map(|(x, y)| x + y).collect())
    }
}

/// Roots of `p` as the eigenvalues of its companion matrix.
///
/// A nonzero constant polynomial has no roots and yields an empty list.
pub fn companion_roots(p: &Poly) -> Result<Vec<CScalar>, LinalgError> {
    if p.is_zero() {
        return Err(LinalgError::ZeroPolynomial);
    }
    let n = p.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    let c = p.coeffs();
    let lead = c[0];
    let mut m = Mat::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -c[j + 1] / lead;
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    eig_qr(&m)
}

//! Pole placement by state feedback `u = F x + v`.
//!
//! With `b = [U₀ U₁]·[Z; 0]`, each target `λⱼ` admits eigenvectors in
//! `null(U₁ᵀ(a − λⱼ I))`. One vector per target is chosen from these
//! subspaces to keep the eigenvector matrix `X` well conditioned, and the gain
//! follows as `F = Z⁻¹ U₀ᵀ (X Λ X⁻¹ − a)`.

use super::StabilityError;
use crate::linalg::{
    eig_qr, inverse, match_nearest, nullspace_basis, nullspace_basis_complex, qr_decompose,
    solve_linear, CScalar, Mat,
};

/// Relative per-pole distance accepted by [`verify_placement`].
pub const PLACEMENT_TOLERANCE: f64 = 0.10;
/// Tighter internal tolerance reported alongside.
pub const STRICT_TOLERANCE: f64 = 1e-6;

const MAX_SWEEPS: usize = 20;
const MAX_CONDITION: f64 = 1e12;
const NULLSPACE_TOL: f64 = 1e-12;
const PBH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementResult {
    /// `m×n` gain for `u = F x + v`.
    pub f: Mat,
    pub targets: Vec<CScalar>,
    /// Eigenvalues of `a + b F`, sorted by real part descending.
    pub achieved: Vec<CScalar>,
    pub max_rel_error: f64,
    /// 1-norm condition estimate of the unit-column eigenvector matrix.
    pub conditioning: f64,
    /// `‖U₁ᵀ(a X − X Λ)‖∞` in the real block form.
    pub theorem_residual: f64,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub achieved: Vec<CScalar>,
    /// Per target, in target order.
    pub errors: Vec<f64>,
    pub max_rel_error: f64,
    /// Every pole within [`PLACEMENT_TOLERANCE`].
    pub pass: bool,
    /// Every pole within [`STRICT_TOLERANCE`].
    pub pass_strict: bool,
    /// `(target, achieved)` pairs outside [`PLACEMENT_TOLERANCE`].
    pub offenders: Vec<(CScalar, CScalar)>,
}

/// Compares `eig(a + b f)` with `targets` after nearest pairing.
///
/// Errors are relative to `|target|`; zero targets use the largest target
/// magnitude as scale.
pub fn verify_placement(
    a: &Mat,
    b: &Mat,
    f: &Mat,
    targets: &[CScalar],
) -> Result<VerifyReport, StabilityError> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n || f.rows() != b.cols() || f.cols() != n || targets.len() != n
    {
        return Err(StabilityError::DimensionMismatch(format!(
            "a {}x{}, b {}x{}, f {}x{}, {} targets",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            f.rows(),
            f.cols(),
            targets.len()
        )));
    }
    let achieved = eig_qr(&a.add(&b.matmul(f)))?;
    let pairing = match_nearest(targets, &achieved);
    let scale = targets.iter().map(|t| t.norm()).fold(0.0, f64::max);
    let mut errors = Vec::with_capacity(n);
    let mut offenders = Vec::new();
    for (t, &j) in targets.iter().zip(&pairing) {
        let d = (achieved[j] - t).norm();
        let e = if t.norm() > 0.0 {
            d / t.norm()
        } else if scale > 0.0 {
            d / scale
        } else {
            d
        };
        if e > PLACEMENT_TOLERANCE {
            offenders.push((*t, achieved[j]));
        }
        errors.push(e);
    }
    let max_rel_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(VerifyReport {
        achieved,
        pass: max_rel_error <= PLACEMENT_TOLERANCE,
        pass_strict: max_rel_error <= STRICT_TOLERANCE,
        max_rel_error,
        errors,
        offenders,
    })
}

/// A real target or the upper member of a conjugate pair.
#[derive(Debug, Clone, Copy)]
enum Slot {
    Real(f64),
    Pair(CScalar),
}

impl Slot {
    fn width(self) -> usize {
        match self {
            Slot::Real(_) => 1,
            Slot::Pair(_) => 2,
        }
    }
}

fn group_targets(targets: &[CScalar]) -> Result<Vec<Slot>, StabilityError> {
    let mut used = vec![false; targets.len()];
    let mut slots = Vec::new();
    for (i, &t) in targets.iter().enumerate() {
        if used[i] {
            continue;
        }
        used[i] = true;
        if t.im == 0.0 {
            slots.push(Slot::Real(t.re));
            continue;
        }
        let tol = 1e-9 * t.norm().max(1.0);
        let partner = (0..targets.len())
            .filter(|&j| !used[j] && targets[j].im * t.im < 0.0)
            .map(|j| (j, (targets[j] - t.conj()).norm()))
            .filter(|&(_, d)| d <= tol)
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match partner {
            Some((j, _)) => {
                used[j] = true;
                let upper = if t.im > 0.0 { t } else { t.conj() };
                slots.push(Slot::Pair(upper));
            }
            None => return Err(StabilityError::NotConjugateClosed(t)),
        }
    }
    Ok(slots)
}

/// Eigenvalues of `a` that no input reaches: `[a − μI, b]` loses row rank.
fn uncontrollable_modes(a: &Mat, b: &Mat) -> Result<Vec<CScalar>, StabilityError> {
    let n = a.rows();
    let m = b.cols();
    let at = a.transpose();
    let bt = b.transpose();
    let mut out = Vec::new();
    for mu in eig_qr(a)? {
        if mu.im < 0.0 {
            continue;
        }
        // Left nullspace of [a − μI, b] is the nullspace of its conjugate
        // transpose [aᵀ − μ̄I; bᵀ].
        let mr = Mat::vstack(&[&at.shifted(mu.re), &bt]);
        let mi = Mat::vstack(&[&Mat::identity(n).scale(mu.im), &Mat::zeros(m, n)]);
        let (basis, _) = nullspace_basis_complex(&mr, &mi, PBH_TOL);
        if basis.cols() > 0 {
            out.push(mu);
            if mu.im > 0.0 {
                out.push(mu.conj());
            }
        }
    }
    Ok(out)
}

/// Admissible eigenvector subspace for one target, as complex columns.
fn admissible(a: &Mat, u1t: &Mat, slot: Slot) -> Vec<Vec<CScalar>> {
    let n = a.rows();
    match slot {
        Slot::Real(l) => {
            let s = nullspace_basis(&u1t.matmul(&a.shifted(l)), NULLSPACE_TOL);
            (0..s.cols())
                .map(|j| s.col(j).into_iter().map(|x| CScalar::new(x, 0.0)).collect())
                .collect()
        }
        Slot::Pair(l) => {
            let mr = u1t.matmul(&a.shifted(l.re));
            let mi = u1t.scale(-l.im);
            let (sr, si) = nullspace_basis_complex(&mr, &mi, NULLSPACE_TOL);
            (0..sr.cols())
                .map(|j| (0..n).map(|i| CScalar::new(sr[(i, j)], si[(i, j)])).collect())
                .collect()
        }
    }
}

fn dot(u: &[CScalar], v: &[CScalar]) -> CScalar {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn normalize(v: &mut [CScalar]) -> f64 {
    let r = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if r > 0.0 {
        for z in v.iter_mut() {
            *z /= r;
        }
    }
    r
}

/// Projection of `y` onto the span of the orthonormal columns `s`.
fn project(s: &[Vec<CScalar>], y: &[CScalar]) -> Vec<CScalar> {
    let mut x = vec![CScalar::new(0.0, 0.0); y.len()];
    for col in s {
        let c = dot(col, y);
        for (xi, si) in x.iter_mut().zip(col) {
            *xi += c * si;
        }
    }
    x
}

/// Complex inverse (row-major) of the matrix with columns `cols`, through
/// the real embedding `[[Re, −Im], [Im, Re]]`.
fn complex_inverse(cols: &[Vec<CScalar>]) -> Option<Vec<CScalar>> {
    let n = cols.len();
    let mut e = Mat::zeros(2 * n, 2 * n);
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            e[(i, j)] = z.re;
            e[(i, n + j)] = -z.im;
            e[(n + i, j)] = z.im;
            e[(n + i, n + j)] = z.re;
        }
    }
    let inv = inverse(&e).ok()?;
    let mut out = vec![CScalar::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = CScalar::new(inv[(i, j)], inv[(n + i, j)]);
        }
    }
    Some(out)
}

fn complex_norm_1_cols(cols: &[Vec<CScalar>]) -> f64 {
    cols.iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn complex_norm_1_rowmajor(m: &[CScalar], n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| m[i * n + j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Replaces column `c` of `x` by `v`, updating the inverse in place
/// (Sherman–Morrison). Returns false, leaving both untouched, if the update
/// would make the matrix singular.
fn replace_column(x: &mut [Vec<CScalar>], inv: &mut [CScalar], c: usize, v: Vec<CScalar>) -> bool {
    let n = x.len();
    let u: Vec<CScalar> = v.iter().zip(&x[c]).map(|(a, b)| a - b).collect();
    let w: Vec<CScalar> = (0..n)
        .map(|i| (0..n).map(|k| inv[i * n + k] * u[k]).sum())
        .collect();
    let denom = CScalar::new(1.0, 0.0) + w[c];
    if denom.norm() < 1e-10 {
        return false;
    }
    let row_c: Vec<CScalar> = inv[c * n..(c + 1) * n].to_vec();
    for i in 0..n {
        let f = w[i] / denom;
        for k in 0..n {
            inv[i * n + k] -= f * row_c[k];
        }
    }
    x[c] = v;
    true
}

/// Places the eigenvalues of `a + b F` at `targets`.
pub fn place_poles(a: &Mat, b: &Mat, targets: &[CScalar]) -> Result<PlacementResult, StabilityError> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n || b.cols() == 0 || b.cols() > n {
        return Err(StabilityError::DimensionMismatch(format!(
            "a {}x{}, b {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if targets.len() != n {
        return Err(StabilityError::TargetCountMismatch {
            expected: n,
            got: targets.len(),
        });
    }
    let m = b.cols();
    let slots = group_targets(targets)?;

    let (q, r) = qr_decompose(b);
    let z = r.block(0, 0, m, m);
    let zmax = (0..m).map(|k| z[(k, k)].abs()).fold(0.0, f64::max);
    if (0..m).any(|k| z[(k, k)].abs() <= 1e-12 * zmax) || zmax == 0.0 {
        return Err(StabilityError::RankDeficientInput);
    }
    let u0 = q.block(0, 0, n, m);
    let u1t = q.block(0, m, n, n - m).transpose();

    for mu in uncontrollable_modes(a, b)? {
        let tol = 1e-6 * mu.norm().max(1.0);
        if !targets.iter().any(|t| (t - mu).norm() <= tol) {
            return Err(StabilityError::Uncontrollable { mode: mu });
        }
    }

    let spaces: Vec<Vec<Vec<CScalar>>> = slots.iter().map(|&s| admissible(a, &u1t, s)).collect();
    let mut starts = Vec::with_capacity(slots.len());
    let mut cols = 0;
    for s in &slots {
        starts.push(cols);
        cols += s.width();
    }

    // Seed: the first basis column, moving on for repeated targets.
    let mut x: Vec<Vec<CScalar>> = vec![Vec::new(); n];
    let seed = |x: &mut Vec<Vec<CScalar>>, mix: bool| {
        for (k, s) in slots.iter().enumerate() {
            let repeats = slots[..k]
                .iter()
                .filter(|p| match (p, s) {
                    (Slot::Real(u), Slot::Real(v)) => u == v,
                    (Slot::Pair(u), Slot::Pair(v)) => u == v,
                    _ => false,
                })
                .count();
            let space = &spaces[k];
            let pair = matches!(s, Slot::Pair(_));
            let mut v = if mix {
                // A pair needs a genuinely complex vector or it equals its conjugate.
                let w: Vec<CScalar> = (0..space.len())
                    .map(|i| {
                        let t = 1.0 + k as f64 + 2.0 * i as f64;
                        if pair {
                            CScalar::from_polar(1.0, t)
                        } else {
                            CScalar::new(t.cos(), 0.0)
                        }
                    })
                    .collect();
                let mut v = vec![CScalar::new(0.0, 0.0); n];
                for (col, wi) in space.iter().zip(&w) {
                    for (vi, ci) in v.iter_mut().zip(col) {
                        *vi += wi * ci;
                    }
                }
                v
            } else if pair && space.len() > 1 {
                let r = (2 * repeats) % space.len();
                let im = &space[(r + 1) % space.len()];
                space[r].iter().zip(im).map(|(p, q)| p + CScalar::new(0.0, 1.0) * q).collect()
            } else {
                space[repeats % space.len()].clone()
            };
            normalize(&mut v);
            let c = starts[k];
            if let Slot::Pair(_) = s {
                x[c + 1] = v.iter().map(|z| z.conj()).collect();
            }
            x[c] = v;
        }
    };
    seed(&mut x, false);
    let mut inv = match complex_inverse(&x) {
        Some(inv) => inv,
        None => {
            seed(&mut x, true);
            complex_inverse(&x).ok_or(StabilityError::IllConditioned { cond: f64::INFINITY })?
        }
    };

    let mut sweeps = 0;
    for _ in 0..MAX_SWEEPS {
        sweeps += 1;
        let mut change: f64 = 0.0;
        for (k, s) in slots.iter().enumerate() {
            if spaces[k].len() <= 1 {
                continue;
            }
            let c = starts[k];
            // Column c of X⁻ᴴ is orthogonal to every other column of X.
            let y: Vec<CScalar> = (0..n).map(|i| inv[c * n + i].conj()).collect();
            let mut v = project(&spaces[k], &y);
            if let Slot::Real(_) = s {
                let p = (0..n).max_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm())).unwrap_or(0);
                let phase = if v[p].norm() > 0.0 { v[p].conj() / v[p].norm() } else { CScalar::new(1.0, 0.0) };
                v = v.iter().map(|z| CScalar::new((z * phase).re, 0.0)).collect();
            }
            if normalize(&mut v) < 1e-14 {
                continue;
            }
            let old = x[c].clone();
            if !replace_column(&mut x, &mut inv, c, v.clone()) {
                continue;
            }
            if let Slot::Pair(_) = s {
                let vc: Vec<CScalar> = v.iter().map(|z| z.conj()).collect();
                if !replace_column(&mut x, &mut inv, c + 1, vc) {
                    replace_column(&mut x, &mut inv, c, old.clone());
                    continue;
                }
            }
            change = change.max(1.0 - dot(&old, &x[c]).norm());
        }
        // Refresh the inverse so rank-one updates do not accumulate error.
        inv = complex_inverse(&x).ok_or(StabilityError::IllConditioned { cond: f64::INFINITY })?;
        if change < 1e-10 {
            break;
        }
    }

    let conditioning = complex_norm_1_cols(&x) * complex_norm_1_rowmajor(&inv, n);
    if !(conditioning <= MAX_CONDITION) {
        return Err(StabilityError::IllConditioned { cond: conditioning });
    }

    // Real block form: a conjugate pair λ = α + iβ with vector xr + i·xi
    // contributes columns [xr, xi] and the block [[α, β], [−β, α]].
    let mut xr = Mat::zeros(n, n);
    let mut lam = Mat::zeros(n, n);
    for (k, s) in slots.iter().enumerate() {
        let c = starts[k];
        match *s {
            Slot::Real(l) => {
                for i in 0..n {
                    xr[(i, c)] = x[c][i].re;
                }
                lam[(c, c)] = l;
            }
            Slot::Pair(l) => {
                for i in 0..n {
                    xr[(i, c)] = x[c][i].re;
                    xr[(i, c + 1)] = x[c][i].im;
                }
                lam[(c, c)] = l.re;
                lam[(c, c + 1)] = l.im;
                lam[(c + 1, c)] = -l.im;
                lam[(c + 1, c + 1)] = l.re;
            }
        }
    }
    let xl = xr.matmul(&lam);
    // X Λ X⁻¹ from Xᵀ Mᵀ = (X Λ)ᵀ.
    let closed = solve_linear(&xr.transpose(), &xl.transpose())?.transpose();
    let f = solve_linear(&z, &u0.transpose().matmul(&closed.sub(a)))?;
    let theorem_residual = u1t.matmul(&a.matmul(&xr).sub(&xl)).norm_inf();

    let check = verify_placement(a, b, &f, targets)?;
    Ok(PlacementResult {
        f,
        targets: targets.to_vec(),
        achieved: check.achieved,
        max_rel_error: check.max_rel_error,
        conditioning,
        theorem_residual,
        sweeps,
    })
}

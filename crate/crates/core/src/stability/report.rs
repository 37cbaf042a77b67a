use super::StabilityError;
use crate::linalg::{eig_qr, sort_desc, CScalar};
use crate::sstate::Lti;

/// Eigenvalues at or below this magnitude count as structural zero modes.
pub const ZERO_MODE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenEntry {
    pub lambda: CScalar,
    pub damping: f64,
    pub freq_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenReport {
    /// Sorted by real part descending, then imaginary part descending.
    pub entries: Vec<EigenEntry>,
    pub stable: bool,
    pub spectral_abscissa: f64,
}

impl EigenReport {
    pub fn eigenvalues(&self) -> Vec<CScalar> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    /// The eigenvalue with the largest real part, if any.
    pub fn rightmost(&self) -> Option<CScalar> {
        self.entries.first().map(|e| e.lambda)
    }

    pub fn unstable_count(&self) -> usize {
        self.entries.iter().filter(|e| e.lambda.re >= 0.0).count()
    }
}

/// `−Re λ / |λ|`; zero for `λ = 0`.
pub fn damping_ratio(lambda: CScalar) -> f64 {
    let r = lambda.norm();
    if r == 0.0 {
        0.0
    } else {
        (-lambda.re / r).clamp(-1.0, 1.0)
    }
}

pub fn report_from_eigenvalues(mut values: Vec<CScalar>) -> EigenReport {
    sort_desc(&mut values);
    let spectral_abscissa = values.first().map_or(f64::NEG_INFINITY, |l| l.re);
    let entries = values
        .into_iter()
        .map(|lambda| EigenEntry {
            lambda,
            damping: damping_ratio(lambda),
            freq_hz: lambda.im.abs() / (2.0 * std::f64::consts::PI),
        })
        .collect();
    EigenReport {
        entries,
        stable: spectral_abscissa < 0.0,
        spectral_abscissa,
    }
}

pub fn eigen_report(m: &Lti) -> Result<EigenReport, StabilityError> {
    Ok(report_from_eigenvalues(eig_qr(m.a())?))
}

/// Target poles for a report; see [`propose_targets_from`].
pub fn propose_targets(report: &EigenReport, zeta_min: f64) -> Vec<CScalar> {
    propose_targets_from(&report.eigenvalues(), zeta_min)
}

/// Moves each eigenvalue into the well-damped region, position by position.
///
/// Modes with `Re ≥ 0` are mirrored to `Re = −max(|Re|, 0.05|λ|)`; modes with
/// damping below `zeta_min` are rotated onto the cone `ζ = zeta_min` at the
/// same magnitude. Structural zero modes (`|λ| ≤ ZERO_MODE_TOL`) go to
/// distinct real values starting at the slowest nonzero magnitude present.
/// Everything else passes through unchanged.
///
/// # Panics
/// If `zeta_min` is not strictly between 0 and 1.
pub fn propose_targets_from(eigenvalues: &[CScalar], zeta_min: f64) -> Vec<CScalar> {
    assert!(zeta_min > 0.0 && zeta_min < 1.0, "zeta_min must lie in (0, 1)");
    let slowest = eigenvalues
        .iter()
        .map(|l| l.norm())
        .filter(|&r| r > ZERO_MODE_TOL)
        .fold(f64::INFINITY, f64::min);
    let slowest = if slowest.is_finite() { slowest } else { 1.0 };
    let sine = (1.0 - zeta_min * zeta_min).sqrt();
    let mut zero_count = 0usize;
    eigenvalues
        .iter()
        .map(|&l| {
            if l.norm() <= ZERO_MODE_TOL {
                let t = -slowest * (1.0 + 0.1 * zero_count as f64);
                zero_count += 1;
                return CScalar::new(t, 0.0);
            }
            let mut l = l;
            if l.re >= 0.0 {
                l.re = -l.re.abs().max(0.05 * l.norm());
            }
            // The slack keeps a second application from re-rotating values
            // that sit on the cone up to rounding.
            if damping_ratio(l) < zeta_min - 1e-12 {
                let r = l.norm();
                l = CScalar::new(-r * zeta_min, r * sine * l.im.signum());
            }
            l
        })
        .collect()
}

use rayon::prelude::*;

use super::report::report_from_eigenvalues;
use super::StabilityError;
use crate::linalg::{eig_qr, CScalar};
use crate::network::{assemble, GridConfig, Scope};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub m_dc: f64,
    /// Sorted by real part descending; empty if the point failed.
    pub eigenvalues: Vec<CScalar>,
    /// `NaN` if the point failed.
    pub spectral_abscissa: f64,
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn from_eigenvalues(m_dc: f64, eigenvalues: Vec<CScalar>) -> Self {
        let r = report_from_eigenvalues(eigenvalues);
        SweepPoint {
            m_dc,
            spectral_abscissa: r.spectral_abscissa,
            eigenvalues: r.eigenvalues(),
            error: None,
        }
    }

    pub fn failed(m_dc: f64, error: String) -> Self {
        SweepPoint {
            m_dc,
            eigenvalues: Vec::new(),
            spectral_abscissa: f64::NAN,
            error: Some(error),
        }
    }

    pub fn rightmost(&self) -> Option<CScalar> {
        self.eigenvalues.first().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

/// `from + k·step` for `k = 0 ..= floor((to − from)/step)`.
///
/// A relative slack of 1e-9 on the quotient keeps an endpoint that lands on
/// the grid up to rounding.
pub fn sweep_values(from: f64, to: f64, step: f64) -> Result<Vec<f64>, StabilityError> {
    let ok = from.is_finite() && to.is_finite() && step.is_finite() && from < to && step > 0.0;
    if !ok {
        return Err(StabilityError::InvalidRange { from, to, step });
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| from + k as f64 * step).collect())
}

/// Re-solves and re-assembles `scope` with every DC droop gain set to each
/// sweep value. Failed points are recorded and the sweep carries on.
pub fn droop_sweep(
    cfg: &GridConfig,
    scope: &Scope,
    from: f64,
    to: f64,
    step: f64,
) -> Result<SweepResult, StabilityError> {
    let values = sweep_values(from, to, step)?;
    let points = values
        .par_iter()
        .map(|&m_dc| {
            let mut c = cfg.clone();
            for conv in &mut c.dc_converters {
                conv.m_dc_volt_per_watt = m_dc;
            }
            let eigs = assemble(&c, scope)
                .map_err(StabilityError::from)
                .and_then(|m| eig_qr(m.a()).map_err(StabilityError::from));
            match eigs {
                Ok(e) => SweepPoint::from_eigenvalues(m_dc, e),
                Err(e) => SweepPoint::failed(m_dc, e.to_string()),
            }
        })
        .collect();
    Ok(SweepResult { points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingKind {
    Hopf,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    Destabilizing,
    Stabilizing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    /// Indices into the sweep's points.
    pub from_index: usize,
    pub to_index: usize,
    pub kind: CrossingKind,
    pub direction: CrossingDirection,
    /// Rightmost eigenvalue on the unstable side.
    pub rightmost: CScalar,
}

/// Consecutive successful points whose spectral abscissae straddle zero.
///
/// The rightmost eigenvalue on the side with non-negative abscissa decides
/// the kind: a complex pair (|Im| > 1e-6) is a Hopf crossing.
pub fn detect_crossing(s: &SweepResult) -> Vec<Crossing> {
    let ok: Vec<usize> = (0..s.points.len())
        .filter(|&i| s.points[i].error.is_none() && !s.points[i].spectral_abscissa.is_nan())
        .collect();
    let mut out = Vec::new();
    for w in ok.windows(2) {
        let (i, j) = (w[0], w[1]);
        let (a, b) = (&s.points[i], &s.points[j]);
        let sa = a.spectral_abscissa < 0.0;
        let sb = b.spectral_abscissa < 0.0;
        if sa == sb {
            continue;
        }
        let (direction, unstable) = if sa {
            (CrossingDirection::Destabilizing, b)
        } else {
            (CrossingDirection::Stabilizing, a)
        };
        let rightmost = unstable.rightmost().unwrap_or_default();
        let kind = if rightmost.im.abs() > 1e-6 {
            CrossingKind::Hopf
        } else {
            CrossingKind::Real
        };
        out.push(Crossing {
            from_index: i,
            to_index: j,
            kind,
            direction,
            rightmost,
        });
    }
    out
}

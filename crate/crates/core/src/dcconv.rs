//! Six-state small-signal model of a droop-controlled DC-DC converter.
//!
//! State order: `[i_v, i_o, V_o, P_dc, zeta_v, eta_c]`, the filter-inductor
//! current, connector current, capacitor voltage, filtered output power and
//! the voltage- and current-loop integrators. Inputs: `[V_ref, V_dc]`.

use crate::linalg::Mat;
use crate::params::{finite, labels, non_negative, positive, InvalidParam};
use crate::sstate::Lti;

pub const STATES: [&str; 6] = ["i_v", "i_o", "V_o", "P_dc", "zeta_v", "eta_c"];
pub const INPUTS: [&str; 2] = ["V_ref", "V_dc"];
pub const POWER_CIRCUIT_STATES: [&str; 3] = ["i_v", "i_o", "V_o"];
pub const POWER_CIRCUIT_INPUTS: [&str; 2] = ["V_t", "V_dc"];

/// LC filter and RL output connector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcFilterParams {
    pub r_f: f64,
    pub l_f: f64,
    pub c_f: f64,
    pub r_o: f64,
    pub l_o: f64,
}

impl DcFilterParams {
    /// Bundled filter and connector values.
    pub fn nominal() -> Self {
        Self {
            r_f: 0.01,
            l_f: 0.03,
            c_f: 20e-6,
            r_o: 0.01,
            l_o: 0.05,
        }
    }

    pub fn validate(&self) -> Result<(), InvalidParam> {
        positive("r_f", self.r_f)?;
        positive("l_f", self.l_f)?;
        positive("c_f", self.c_f)?;
        positive("r_o", self.r_o)?;
        positive("l_o", self.l_o)
    }
}

/// Voltage PI, current PI, output-current feedforward, power filter and droop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcControllerParams {
    pub k_pv: f64,
    pub k_iv: f64,
    pub k_pc: f64,
    pub k_ic: f64,
    pub h_ff: f64,
    pub w_f: f64,
    pub m_dc: f64,
}

impl DcControllerParams {
    /// Bundled controller gains; `h_ff = 0.75` is a chosen default.
    pub fn nominal() -> Self {
        Self {
            k_pv: 1.0,
            k_iv: 33.0,
            k_pc: 0.2,
            k_ic: 120.0,
            h_ff: 0.75,
            w_f: 2.0 * std::f64::consts::PI * 10.0,
            m_dc: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<(), InvalidParam> {
        non_negative("k_pv", self.k_pv)?;
        non_negative("k_iv", self.k_iv)?;
        non_negative("k_pc", self.k_pc)?;
        non_negative("k_ic", self.k_ic)?;
        finite("h_ff", self.h_ff)?;
        positive("w_f", self.w_f)?;
        non_negative("m_dc", self.m_dc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DcOperatingPoint {
    /// Capacitor voltage.
    pub v_o0: f64,
    /// Connector (output) current.
    pub i_o0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcConverterSpec {
    pub name: String,
    pub filter: DcFilterParams,
    pub ctrl: DcControllerParams,
    pub op: DcOperatingPoint,
}

impl DcConverterSpec {
    pub fn validate(&self) -> Result<(), InvalidParam> {
        self.filter.validate()?;
        self.ctrl.validate()?;
        finite("v_o0", self.op.v_o0)?;
        finite("i_o0", self.op.i_o0)
    }
}

/// Filter and connector alone: states `[i_v, i_o, V_o]`, inputs `[V_t, V_dc]`.
///
/// The inductor currents are driven by the voltage across each inductor,
/// `L_f di_v/dt = V_t − V_o − R_f i_v` and `L_o di_o/dt = V_o − V_dc − R_o i_o`.
pub fn build_dc_power_circuit(filter: &DcFilterParams) -> Result<Lti, InvalidParam> {
    filter.validate()?;
    let f = filter;
    let a = Mat::from_rows(&[
        &[-f.r_f / f.l_f, 0.0, -1.0 / f.l_f],
        &[0.0, -f.r_o / f.l_o, 1.0 / f.l_o],
        &[1.0 / f.c_f, -1.0 / f.c_f, 0.0],
    ]);
    let b = Mat::from_rows(&[&[1.0 / f.l_f, 0.0], &[0.0, -1.0 / f.l_o], &[0.0, 0.0]]);
    Ok(Lti::new(
        a,
        b,
        Mat::identity(3),
        Mat::zeros(3, 2),
        labels(&POWER_CIRCUIT_STATES),
        labels(&POWER_CIRCUIT_INPUTS),
        labels(&POWER_CIRCUIT_STATES),
    )
    .expect("power circuit dimensions are fixed"))
}

/// Full converter with its control loops, linearized at `spec.op`.
///
/// The voltage loop acts on `e = ΔV_ref − m_dc·ΔP − ΔV_dc`; its PI output plus
/// the feedforward `h_ff·Δi_o` is the current reference, and the current PI
/// sets the terminal voltage `V_t`, which is eliminated algebraically.
pub fn build_dc_converter(spec: &DcConverterSpec) -> Result<Lti, InvalidParam> {
    spec.validate()?;
    let f = &spec.filter;
    let k = &spec.ctrl;
    let op = &spec.op;
    const IV: usize = 0;
    const IO: usize = 1;
    const VO: usize = 2;
    const P: usize = 3;
    const ZETA: usize = 4;
    const ETA: usize = 5;

    // Voltage error as a linear form over states (ex) and inputs (eu).
    let mut ex = [0.0; 6];
    ex[P] = -k.m_dc;
    let eu = [1.0, -1.0];

    // Current reference i_v* = ζ + k_pv e + h_ff i_o.
    let mut isx = [0.0; 6];
    isx[ZETA] = 1.0;
    isx[IO] = k.h_ff;
    for (s, e) in isx.iter_mut().zip(ex) {
        *s += k.k_pv * e;
    }
    let isu = eu.map(|e| k.k_pv * e);

    // Current error i_v* − i_v.
    let mut cex = isx;
    cex[IV] -= 1.0;
    let ceu = isu;

    // Terminal voltage V_t = η + k_pc (i_v* − i_v).
    let mut vtx = cex.map(|c| k.k_pc * c);
    vtx[ETA] += 1.0;
    let vtu = ceu.map(|c| k.k_pc * c);

    let mut a = Mat::zeros(6, 6);
    let mut b = Mat::zeros(6, 2);
    for j in 0..6 {
        a[(IV, j)] = vtx[j] / f.l_f;
    }
    a[(IV, IV)] -= f.r_f / f.l_f;
    a[(IV, VO)] -= 1.0 / f.l_f;
    for j in 0..2 {
        b[(IV, j)] = vtu[j] / f.l_f;
    }

    a[(IO, IO)] = -f.r_o / f.l_o;
    a[(IO, VO)] = 1.0 / f.l_o;
    b[(IO, 1)] = -1.0 / f.l_o;

    a[(VO, IV)] = 1.0 / f.c_f;
    a[(VO, IO)] = -1.0 / f.c_f;

    a[(P, IO)] = k.w_f * op.v_o0;
    a[(P, VO)] = k.w_f * op.i_o0;
    a[(P, P)] = -k.w_f;

    for j in 0..6 {
        a[(ZETA, j)] = k.k_iv * ex[j];
        a[(ETA, j)] = k.k_ic * cex[j];
    }
    for j in 0..2 {
        b[(ZETA, j)] = k.k_iv * eu[j];
        b[(ETA, j)] = k.k_ic * ceu[j];
    }

    Ok(Lti::new(
        a,
        b,
        Mat::identity(6),
        Mat::zeros(6, 2),
        labels(&STATES),
        labels(&INPUTS),
        labels(&STATES),
    )
    .expect("converter dimensions are fixed"))
}

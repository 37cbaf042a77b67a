//! Interlinking converter between the AC and DC sub-grids.
//!
//! A dq power circuit with a DC-link capacitor, a virtual-synchronous-machine
//! swing equation setting the frame frequency, and the voltage and current
//! loops of the VSC reused as inner controllers. The current loop output is
//! a bridge-voltage reference which a modulation stage turns into `m_dq`.
//!
//! State order: `[i_icd, i_icq, v_icd, v_icq, v_dc, omega_vsm, delta,
//! phi_d, phi_q, gamma_d, gamma_q]`. `i_od, i_oq` is the current drawn from
//! the AC capacitor node and `i_odc` the current drawn from the DC link.

use crate::acconv::{current_controller, voltage_controller};
use crate::linalg::Mat;
use crate::params::{finite, labels, non_negative, positive, InvalidParam};
use crate::sstate::{interconnect, Lti, Wire};

pub const STATES: [&str; 11] = [
    "i_icd", "i_icq", "v_icd", "v_icq", "v_dc", "omega_vsm", "delta", "phi_d", "phi_q", "gamma_d",
    "gamma_q",
];
pub const INPUTS: [&str; 3] = ["i_od", "i_oq", "i_odc"];
/// Inputs of the extended model used in grid assembly.
pub const INPUTS_WITH_SETPOINTS: [&str; 5] = ["i_od", "i_oq", "i_odc", "p_set", "v_set"];
pub const POWER_CIRCUIT_STATES: [&str; 5] = ["i_icd", "i_icq", "v_icd", "v_icq", "v_dc"];
pub const POWER_CIRCUIT_INPUTS: [&str; 6] = ["m_d", "m_q", "i_od", "i_oq", "omega", "i_odc"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcParams {
    pub r_f: f64,
    pub l_f: f64,
    pub c_f: f64,
    /// DC-link capacitance.
    pub c_dc: f64,
    /// Virtual inertia; `2j` divides the power imbalance.
    pub j: f64,
    /// Damping, W per rad/s.
    pub k_d: f64,
    pub p_ref: f64,
    /// Frequency at which the damping term vanishes, rad/s.
    pub w_g_star: f64,
    /// AC voltage magnitude reference (d-axis).
    pub v_ac_ref: f64,
    pub k_pv: f64,
    pub k_iv: f64,
    pub k_pc: f64,
    pub k_ic: f64,
    pub h_ff: f64,
    /// Frequency used in the inner-loop decoupling terms.
    pub w_n: f64,
}

impl IcParams {
    /// Bundled values: the shared filter and inner-loop gains plus chosen
    /// defaults `c_dc = 1 mF`, `j = 0.2`, `k_d = 10`, `p_ref = 0`.
    pub fn nominal() -> Self {
        let w_n = 2.0 * std::f64::consts::PI * 50.0;
        Self {
            r_f: 0.01,
            l_f: 0.03,
            c_f: 20e-6,
            c_dc: 1e-3,
            j: 0.2,
            k_d: 10.0,
            p_ref: 0.0,
            w_g_star: w_n,
            v_ac_ref: 380.0,
            k_pv: 1.0,
            k_iv: 33.0,
            k_pc: 0.2,
            k_ic: 120.0,
            h_ff: 0.75,
            w_n,
        }
    }

    pub fn validate(&self) -> Result<(), InvalidParam> {
        positive("r_f", self.r_f)?;
        positive("l_f", self.l_f)?;
        positive("c_f", self.c_f)?;
        positive("c_dc", self.c_dc)?;
        positive("j", self.j)?;
        non_negative("k_d", self.k_d)?;
        finite("p_ref", self.p_ref)?;
        positive("w_g_star", self.w_g_star)?;
        positive("v_ac_ref", self.v_ac_ref)?;
        non_negative("k_pv", self.k_pv)?;
        non_negative("k_iv", self.k_iv)?;
        non_negative("k_pc", self.k_pc)?;
        non_negative("k_ic", self.k_ic)?;
        finite("h_ff", self.h_ff)?;
        positive("w_n", self.w_n)
    }
}

/// Linearization point, in the converter's own frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcOperatingPoint {
    pub v_dc0: f64,
    pub i_icd0: f64,
    pub i_icq0: f64,
    pub v_icd0: f64,
    pub v_icq0: f64,
    pub i_od0: f64,
    pub i_oq0: f64,
    /// Modulation indices.
    pub m_d0: f64,
    pub m_q0: f64,
    /// Frame frequency, rad/s.
    pub w0: f64,
    /// Angle of the converter frame relative to the common frame.
    pub delta0: f64,
}

impl IcOperatingPoint {
    /// Steady state with both ports open: only the filter capacitor current
    /// flows, at capacitor voltage `v_ac_ref` and frequency `w_g_star`.
    pub fn no_load(p: &IcParams, v_dc0: f64) -> Self {
        let w = p.w_g_star;
        let v = p.v_ac_ref;
        // i_ic = jω c_f v in the frame aligned with v.
        let (i_d, i_q) = (0.0, w * p.c_f * v);
        // v_br = v + (r_f + jω l_f) i_ic.
        let vbr_d = v + p.r_f * i_d - w * p.l_f * i_q;
        let vbr_q = p.r_f * i_q + w * p.l_f * i_d;
        Self {
            v_dc0,
            i_icd0: i_d,
            i_icq0: i_q,
            v_icd0: v,
            v_icq0: 0.0,
            i_od0: 0.0,
            i_oq0: 0.0,
            m_d0: vbr_d / v_dc0,
            m_q0: vbr_q / v_dc0,
            w0: w,
            delta0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), InvalidParam> {
        positive("v_dc0", self.v_dc0)?;
        for (name, v) in [
            ("i_icd0", self.i_icd0),
            ("i_icq0", self.i_icq0),
            ("v_icd0", self.v_icd0),
            ("v_icq0", self.v_icq0),
            ("i_od0", self.i_od0),
            ("i_oq0", self.i_oq0),
            ("w0", self.w0),
            ("delta0", self.delta0),
        ] {
            finite(name, v)?;
        }
        for (name, m) in [("m_d0", self.m_d0), ("m_q0", self.m_q0)] {
            if !(m.is_finite() && m.abs() <= 1.0) {
                return Err(InvalidParam {
                    field: name.into(),
                    reason: format!("modulation index must lie in [-1, 1], got {m}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcSpec {
    pub name: String,
    pub params: IcParams,
    pub op: IcOperatingPoint,
}

/// Power circuit alone: states [`POWER_CIRCUIT_STATES`], inputs
/// [`POWER_CIRCUIT_INPUTS`]. The DC link feeds the bridge power
/// `1.5 (m_d i_icd + m_q i_icq) v_dc` and the current `i_odc`.
pub fn build_ic_power_circuit(p: &IcParams, op: &IcOperatingPoint) -> Result<Lti, InvalidParam> {
    p.validate()?;
    op.validate()?;
    Ok(power_circuit(p, op))
}

fn power_circuit(p: &IcParams, op: &IcOperatingPoint) -> Lti {
    let (lf, cf, cdc, w) = (p.l_f, p.c_f, p.c_dc, op.w0);
    let a = Mat::from_rows(&[
        &[-p.r_f / lf, w, -1.0 / lf, 0.0, op.m_d0 / lf],
        &[-w, -p.r_f / lf, 0.0, -1.0 / lf, op.m_q0 / lf],
        &[1.0 / cf, 0.0, 0.0, w, 0.0],
        &[0.0, 1.0 / cf, -w, 0.0, 0.0],
        &[-1.5 * op.m_d0 / cdc, -1.5 * op.m_q0 / cdc, 0.0, 0.0, 0.0],
    ]);
    let b = Mat::from_rows(&[
        &[op.v_dc0 / lf, 0.0, 0.0, 0.0, op.i_icq0, 0.0],
        &[0.0, op.v_dc0 / lf, 0.0, 0.0, -op.i_icd0, 0.0],
        &[0.0, 0.0, -1.0 / cf, 0.0, op.v_icq0, 0.0],
        &[0.0, 0.0, 0.0, -1.0 / cf, -op.v_icd0, 0.0],
        &[-1.5 * op.i_icd0 / cdc, -1.5 * op.i_icq0 / cdc, 0.0, 0.0, 0.0, -1.0 / cdc],
    ]);
    Lti::new(
        a,
        b,
        Mat::identity(5),
        Mat::zeros(5, 6),
        labels(&POWER_CIRCUIT_STATES),
        labels(&POWER_CIRCUIT_INPUTS),
        labels(&POWER_CIRCUIT_STATES),
    )
    .expect("power circuit dimensions are fixed")
}

/// Swing equation `2j Δω̇ = Δp_set − ΔP_ic − k_d Δω`, `Δδ̇ = Δω`, with the
/// AC power linearized at the capacitor node.
fn swing(p: &IcParams, op: &IcOperatingPoint) -> Lti {
    let h = 1.0 / (2.0 * p.j);
    let a = Mat::from_rows(&[&[-p.k_d * h, 0.0], &[1.0, 0.0]]);
    let b = Mat::from_rows(&[
        &[
            -1.5 * op.v_icd0 * h,
            -1.5 * op.v_icq0 * h,
            -1.5 * op.i_icd0 * h,
            -1.5 * op.i_icq0 * h,
            h,
        ],
        &[0.0; 5],
    ]);
    Lti::new(
        a,
        b,
        Mat::identity(2),
        Mat::zeros(2, 5),
        labels(&["sw.omega_vsm", "sw.delta"]),
        labels(&["sw.i_icd", "sw.i_icq", "sw.v_icd", "sw.v_icq", "sw.p_set"]),
        labels(&["sw.omega_vsm", "sw.delta"]),
    )
    .expect("swing dimensions are fixed")
}

/// Static modulation `Δm = (Δv_br* − m0 Δv_dc) / v_dc0`.
fn modulation(op: &IcOperatingPoint) -> Lti {
    let k = 1.0 / op.v_dc0;
    Lti::new(
        Mat::zeros(0, 0),
        Mat::zeros(0, 3),
        Mat::zeros(2, 0),
        Mat::from_rows(&[&[k, 0.0, -op.m_d0 * k], &[0.0, k, -op.m_q0 * k]]),
        vec![],
        labels(&["mod.v_d", "mod.v_q", "mod.v_dc"]),
        labels(&["mod.m_d", "mod.m_q"]),
    )
    .expect("modulation dimensions are fixed")
}

/// Identity fan-out so that one external signal can reach several blocks.
fn fan_out(prefix: &str, signals: &[&str]) -> Lti {
    let k = signals.len();
    let names: Vec<String> = signals.iter().map(|s| format!("{prefix}.{s}")).collect();
    let outs: Vec<String> = signals.iter().map(|s| format!("{prefix}.{s}_out")).collect();
    Lti::new(
        Mat::zeros(0, 0),
        Mat::zeros(0, k),
        Mat::zeros(k, 0),
        Mat::identity(k),
        vec![],
        names,
        outs,
    )
    .expect("fan-out dimensions are fixed")
}

fn assemble(p: &IcParams, op: &IcOperatingPoint) -> Lti {
    let blocks = [
        power_circuit(p, op).prefixed("pw"),
        swing(p, op),
        voltage_controller("vc", p.k_pv, p.k_iv, p.k_pc, p.h_ff, p.w_n, p.c_f),
        current_controller("cc", p.k_pc, p.k_ic, p.w_n, p.l_f),
        fan_out("in", &INPUTS_WITH_SETPOINTS),
        modulation(op),
    ];
    let mut wires = vec![
        Wire::new("in.i_odc_out", "pw.i_odc"),
        Wire::new("in.p_set_out", "sw.p_set"),
        Wire::new("in.v_set_out", "vc.v_ref_d"),
        Wire::new("sw.omega_vsm", "pw.omega"),
        Wire::new("pw.v_dc", "mod.v_dc"),
    ];
    for ax in ["d", "q"] {
        wires.push(Wire::new(format!("in.i_o{ax}_out"), format!("pw.i_o{ax}")));
        wires.push(Wire::new(format!("in.i_o{ax}_out"), format!("vc.i_o_{ax}")));
        wires.push(Wire::new(format!("pw.i_ic{ax}"), format!("sw.i_ic{ax}")));
        wires.push(Wire::new(format!("pw.v_ic{ax}"), format!("sw.v_ic{ax}")));
        wires.push(Wire::new(format!("pw.v_ic{ax}"), format!("vc.v_o_{ax}")));
        wires.push(Wire::new(format!("vc.i_ref_{ax}"), format!("cc.i_ref_{ax}")));
        wires.push(Wire::new(format!("pw.i_ic{ax}"), format!("cc.i_{ax}")));
        wires.push(Wire::new(format!("pw.v_ic{ax}"), format!("cc.v_o_{ax}")));
        wires.push(Wire::new(format!("cc.v_{ax}"), format!("mod.v_{ax}")));
        wires.push(Wire::new(format!("mod.m_{ax}"), format!("pw.m_{ax}")));
    }
    let ext: Vec<String> = INPUTS_WITH_SETPOINTS.iter().map(|s| format!("in.{s}")).collect();
    let sys = interconnect(&blocks, &wires, Some(&ext), None).expect("internal wiring is valid");
    let n = sys.n();
    let m = sys.m();
    Lti::new(
        sys.a().clone(),
        sys.b().clone(),
        Mat::identity(n),
        Mat::zeros(n, m),
        labels(&STATES),
        labels(&INPUTS_WITH_SETPOINTS),
        labels(&STATES),
    )
    .expect("relabelled dimensions match")
}

/// Converter model with the power and voltage setpoints exposed as inputs.
pub fn build_ic_with_setpoints(spec: &IcSpec) -> Result<Lti, InvalidParam> {
    spec.params.validate()?;
    spec.op.validate()?;
    Ok(assemble(&spec.params, &spec.op))
}

/// Converter model with inputs `[i_od, i_oq, i_odc]`.
pub fn build_ic(p: &IcParams, op: &IcOperatingPoint) -> Result<Lti, InvalidParam> {
    p.validate()?;
    op.validate()?;
    Ok(assemble(p, op).select_inputs(&INPUTS).expect("inputs exist"))
}

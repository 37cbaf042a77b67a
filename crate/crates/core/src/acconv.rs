//! Thirteen-state dq-frame model of a droop-controlled voltage-source
//! converter with an LCL filter.
//!
//! The converter runs in its own dq frame, rotating at its droop frequency
//! `ω = w_n − m_p·P`; `theta` is the angle of that frame relative to a common
//! frame rotating at `ω_com`. Bus voltages enter in the local frame; the
//! network module handles rotation.

use crate::linalg::Mat;
use crate::params::{finite, labels, non_negative, positive, InvalidParam};
use crate::sstate::{interconnect, Lti, Wire};

pub const STATES: [&str; 13] = [
    "theta", "P", "Q", "phi_d", "phi_q", "gamma_d", "gamma_q", "i_inv_d", "i_inv_q", "i_o_d",
    "i_o_q", "v_o_d", "v_o_q",
];
pub const INPUTS: [&str; 3] = ["v_b_d", "v_b_q", "omega_com"];
/// Inputs of the extended model used in grid assembly: the two droop
/// setpoint channels are exposed as actuators.
pub const INPUTS_WITH_SETPOINTS: [&str; 5] = ["v_b_d", "v_b_q", "omega_com", "omega_set", "v_set"];
pub const EXTRA_OUTPUTS: [&str; 3] = ["omega", "i_port_d", "i_port_q"];
pub const POWER_CIRCUIT_STATES: [&str; 6] = ["i_inv_d", "i_inv_q", "i_o_d", "i_o_q", "v_o_d", "v_o_q"];
pub const POWER_CIRCUIT_INPUTS: [&str; 5] = ["v_inv_d", "v_inv_q", "v_b_d", "v_b_q", "omega"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VscParams {
    pub r_f: f64,
    pub l_f: f64,
    pub c_f: f64,
    pub r_o: f64,
    pub l_o: f64,
    pub k_pv: f64,
    pub k_iv: f64,
    pub k_pc: f64,
    pub k_ic: f64,
    pub h_ff: f64,
    pub w_f: f64,
    /// Frequency droop, rad/s per W.
    pub m_p: f64,
    /// Voltage droop, V per var.
    pub n_q: f64,
    /// Nominal angular frequency, rad/s.
    pub w_n: f64,
}

impl VscParams {
    /// Bundled values: the DC filter and controller set plus chosen AC
    /// defaults `m_p = 1e-4`, `n_q = 1e-3`, `w_n = 2π·50`.
    pub fn nominal() -> Self {
        Self {
            r_f: 0.01,
            l_f: 0.03,
            c_f: 20e-6,
            r_o: 0.01,
            l_o: 0.05,
            k_pv: 1.0,
            k_iv: 33.0,
            k_pc: 0.2,
            k_ic: 120.0,
            h_ff: 0.75,
            w_f: 2.0 * std::f64::consts::PI * 10.0,
            m_p: 1e-4,
            n_q: 1e-3,
            w_n: 2.0 * std::f64::consts::PI * 50.0,
        }
    }

    pub fn validate(&self) -> Result<(), InvalidParam> {
        positive("r_f", self.r_f)?;
        positive("l_f", self.l_f)?;
        positive("c_f", self.c_f)?;
        positive("r_o", self.r_o)?;
        positive("l_o", self.l_o)?;
        non_negative("k_pv", self.k_pv)?;
        non_negative("k_iv", self.k_iv)?;
        non_negative("k_pc", self.k_pc)?;
        non_negative("k_ic", self.k_ic)?;
        finite("h_ff", self.h_ff)?;
        positive("w_f", self.w_f)?;
        non_negative("m_p", self.m_p)?;
        non_negative("n_q", self.n_q)?;
        positive("w_n", self.w_n)
    }
}

/// Linearization point, in the converter's own frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VscOperatingPoint {
    pub v_od0: f64,
    pub v_oq0: f64,
    pub i_od0: f64,
    pub i_oq0: f64,
    pub i_invd0: f64,
    pub i_invq0: f64,
    /// Frame frequency, rad/s.
    pub w0: f64,
    /// Angle of the local frame relative to the common frame.
    pub theta0: f64,
}

impl VscOperatingPoint {
    fn validate(&self) -> Result<(), InvalidParam> {
        for (name, v) in [
            ("v_od0", self.v_od0),
            ("v_oq0", self.v_oq0),
            ("i_od0", self.i_od0),
            ("i_oq0", self.i_oq0),
            ("i_invd0", self.i_invd0),
            ("i_invq0", self.i_invq0),
            ("w0", self.w0),
            ("theta0", self.theta0),
        ] {
            finite(name, v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VscSpec {
    pub name: String,
    pub params: VscParams,
    pub op: VscOperatingPoint,
}

/// LCL filter in the local frame: states `[i_inv_d, i_inv_q, i_o_d, i_o_q,
/// v_o_d, v_o_q]`, inputs `[v_inv_d, v_inv_q, v_b_d, v_b_q, omega]`.
pub fn build_vsc_power_circuit(p: &VscParams, op: &VscOperatingPoint) -> Result<Lti, InvalidParam> {
    p.validate()?;
    op.validate()?;
    Ok(lcl(p.r_f, p.l_f, p.c_f, p.r_o, p.l_o, op))
}

fn lcl(r_f: f64, l_f: f64, c_f: f64, r_o: f64, l_o: f64, op: &VscOperatingPoint) -> Lti {
    let w = op.w0;
    let a = Mat::from_rows(&[
        &[-r_f / l_f, w, 0.0, 0.0, -1.0 / l_f, 0.0],
        &[-w, -r_f / l_f, 0.0, 0.0, 0.0, -1.0 / l_f],
        &[0.0, 0.0, -r_o / l_o, w, 1.0 / l_o, 0.0],
        &[0.0, 0.0, -w, -r_o / l_o, 0.0, 1.0 / l_o],
        &[1.0 / c_f, 0.0, -1.0 / c_f, 0.0, 0.0, w],
        &[0.0, 1.0 / c_f, 0.0, -1.0 / c_f, -w, 0.0],
    ]);
    let b = Mat::from_rows(&[
        &[1.0 / l_f, 0.0, 0.0, 0.0, op.i_invq0],
        &[0.0, 1.0 / l_f, 0.0, 0.0, -op.i_invd0],
        &[0.0, 0.0, -1.0 / l_o, 0.0, op.i_oq0],
        &[0.0, 0.0, 0.0, -1.0 / l_o, -op.i_od0],
        &[0.0, 0.0, 0.0, 0.0, op.v_oq0],
        &[0.0, 0.0, 0.0, 0.0, -op.v_od0],
    ]);
    Lti::new(
        a,
        b,
        Mat::identity(6),
        Mat::zeros(6, 5),
        labels(&POWER_CIRCUIT_STATES),
        labels(&POWER_CIRCUIT_INPUTS),
        labels(&POWER_CIRCUIT_STATES),
    )
    .expect("LCL dimensions are fixed")
}

fn names(prefix: &str, list: &[&str]) -> Vec<String> {
    list.iter().map(|s| format!("{prefix}.{s}")).collect()
}

/// Droop power controller: states `[theta, P, Q]`.
fn power_controller(p: &VscParams, op: &VscOperatingPoint) -> Lti {
    // inputs: i_o_d, i_o_q, v_o_d, v_o_q, omega_com, omega_set, v_set
    let (wf, k) = (p.w_f, 1.5 * p.w_f);
    let a = Mat::from_rows(&[&[0.0, -p.m_p, 0.0], &[0.0, -wf, 0.0], &[0.0, 0.0, -wf]]);
    let b = Mat::from_rows(&[
        &[0.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0],
        &[k * op.v_od0, k * op.v_oq0, k * op.i_od0, k * op.i_oq0, 0.0, 0.0, 0.0],
        &[k * op.v_oq0, -k * op.v_od0, -k * op.i_oq0, k * op.i_od0, 0.0, 0.0, 0.0],
    ]);
    // outputs: theta, P, Q, omega, v_ref_d, v_ref_q
    let c = Mat::from_rows(&[
        &[1.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0],
        &[0.0, 0.0, 1.0],
        &[0.0, -p.m_p, 0.0],
        &[0.0, 0.0, -p.n_q],
        &[0.0, 0.0, 0.0],
    ]);
    let mut d = Mat::zeros(6, 7);
    d[(3, 5)] = 1.0;
    d[(4, 6)] = 1.0;
    Lti::new(
        a,
        b,
        c,
        d,
        names("pc", &["theta", "P", "Q"]),
        names("pc", &["i_o_d", "i_o_q", "v_o_d", "v_o_q", "omega_com", "omega_set", "v_set"]),
        names("pc", &["theta", "P", "Q", "omega", "v_ref_d", "v_ref_q"]),
    )
    .expect("power controller dimensions are fixed")
}

/// Voltage PI with output-current feedforward and capacitor decoupling:
/// states `[phi_d, phi_q]`, inputs `[v_ref_dq, i_o_dq, v_o_dq]`.
pub(crate) fn voltage_controller(
    prefix: &str,
    k_pv: f64,
    k_iv: f64,
    k_pc: f64,
    h_ff: f64,
    w_n: f64,
    c_f: f64,
) -> Lti {
    let a = Mat::zeros(2, 2);
    let b = Mat::from_rows(&[
        &[k_iv, 0.0, 0.0, 0.0, -k_iv, 0.0],
        &[0.0, k_iv, 0.0, 0.0, 0.0, -k_iv],
    ]);
    let c = Mat::identity(2);
    let wc = w_n * c_f;
    let d = Mat::from_rows(&[
        &[k_pv, 0.0, h_ff, 0.0, -k_pc, -wc],
        &[0.0, k_pv, 0.0, h_ff, wc, -k_pc],
    ]);
    Lti::new(
        a,
        b,
        c,
        d,
        names(prefix, &["phi_d", "phi_q"]),
        names(prefix, &["v_ref_d", "v_ref_q", "i_o_d", "i_o_q", "v_o_d", "v_o_q"]),
        names(prefix, &["i_ref_d", "i_ref_q"]),
    )
    .expect("voltage controller dimensions are fixed")
}

/// Current PI with inductor decoupling and capacitor-voltage feedforward:
/// states `[gamma_d, gamma_q]`, inputs `[i_ref_dq, i_dq, v_o_dq]`.
pub(crate) fn current_controller(prefix: &str, k_pc: f64, k_ic: f64, w_n: f64, l_f: f64) -> Lti {
    let a = Mat::zeros(2, 2);
    let b = Mat::from_rows(&[
        &[k_ic, 0.0, -k_ic, 0.0, 0.0, 0.0],
        &[0.0, k_ic, 0.0, -k_ic, 0.0, 0.0],
    ]);
    let c = Mat::identity(2);
    let wl = w_n * l_f;
    let d = Mat::from_rows(&[
        &[k_pc, 0.0, -k_pc, -wl, 1.0, 0.0],
        &[0.0, k_pc, wl, -k_pc, 0.0, 1.0],
    ]);
    Lti::new(
        a,
        b,
        c,
        d,
        names(prefix, &["gamma_d", "gamma_q"]),
        names(prefix, &["i_ref_d", "i_ref_q", "i_d", "i_q", "v_o_d", "v_o_q"]),
        names(prefix, &["v_d", "v_q"]),
    )
    .expect("current controller dimensions are fixed")
}

/// Converter model with the setpoint actuators exposed: inputs
/// [`INPUTS_WITH_SETPOINTS`], outputs [`STATES`] then [`EXTRA_OUTPUTS`].
pub fn build_vsc_with_setpoints(spec: &VscSpec) -> Result<Lti, InvalidParam> {
    spec.params.validate()?;
    spec.op.validate()?;
    Ok(assemble(&spec.params, &spec.op))
}

fn assemble(p: &VscParams, op: &VscOperatingPoint) -> Lti {
    let blocks = [
        power_controller(p, op),
        voltage_controller("vc", p.k_pv, p.k_iv, p.k_pc, p.h_ff, p.w_n, p.c_f),
        current_controller("cc", p.k_pc, p.k_ic, p.w_n, p.l_f),
        lcl(p.r_f, p.l_f, p.c_f, p.r_o, p.l_o, op).prefixed("lcl"),
    ];
    let mut wires = Vec::new();
    for ax in ["d", "q"] {
        wires.push(Wire::new(format!("lcl.i_o_{ax}"), format!("pc.i_o_{ax}")));
        wires.push(Wire::new(format!("lcl.v_o_{ax}"), format!("pc.v_o_{ax}")));
        wires.push(Wire::new(format!("pc.v_ref_{ax}"), format!("vc.v_ref_{ax}")));
        wires.push(Wire::new(format!("lcl.i_o_{ax}"), format!("vc.i_o_{ax}")));
        wires.push(Wire::new(format!("lcl.v_o_{ax}"), format!("vc.v_o_{ax}")));
        wires.push(Wire::new(format!("vc.i_ref_{ax}"), format!("cc.i_ref_{ax}")));
        wires.push(Wire::new(format!("lcl.i_inv_{ax}"), format!("cc.i_{ax}")));
        wires.push(Wire::new(format!("lcl.v_o_{ax}"), format!("cc.v_o_{ax}")));
        wires.push(Wire::new(format!("cc.v_{ax}"), format!("lcl.v_inv_{ax}")));
    }
    wires.push(Wire::new("pc.omega", "lcl.omega"));
    let ext_in: Vec<String> = ["lcl.v_b_d", "lcl.v_b_q", "pc.omega_com", "pc.omega_set", "pc.v_set"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let sys = interconnect(&blocks, &wires, Some(&ext_in), None).expect("internal wiring is valid");

    // Outputs: every state, then ω and the port current.
    let extra: Vec<usize> = ["pc.omega", "lcl.i_o_d", "lcl.i_o_q"]
        .iter()
        .map(|o| sys.output_index(o).expect("output exists"))
        .collect();
    let c = Mat::vstack(&[&Mat::identity(13), &sys.c().select_rows(&extra)]);
    let d = Mat::vstack(&[&Mat::zeros(13, 5), &sys.d().select_rows(&extra)]);
    let mut out_names = labels(&STATES);
    out_names.extend(labels(&EXTRA_OUTPUTS));
    Lti::new(
        sys.a().clone(),
        sys.b().clone(),
        c,
        d,
        labels(&STATES),
        labels(&INPUTS_WITH_SETPOINTS),
        out_names,
    )
    .expect("relabelled dimensions match")
}

/// Converter model with inputs `[v_b_d, v_b_q, omega_com]`.
pub fn build_vsc(spec: &VscSpec) -> Result<Lti, InvalidParam> {
    let full = build_vsc_with_setpoints(spec)?;
    Ok(full.select_inputs(&INPUTS).expect("inputs exist"))
}

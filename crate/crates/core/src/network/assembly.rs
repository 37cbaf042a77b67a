//! Linear assembly of converters, lines, loads and buses.
//!
//! Each non-interlink bus is a static block `v = r_eff·Σ(±i)` with
//! `r_eff = (1/r_virtual + Σ 1/R_load)⁻¹` over its resistive loads. Buses that
//! host the interlinking converter take their voltage from its capacitor
//! states instead, and a static block returns the net current drawn from it.
//! AC quantities live in the common frame; each grid-forming unit sees them
//! through a linearized rotation by its own angle state.

use std::collections::HashMap;

use super::config::{BusKind, GridConfig, LineKind, LoadKind};
use super::equilibrium::{solve_equilibrium, OperatingPoints};
use super::frame::linearized_rotation;
use super::NetworkError;
use crate::acconv::{build_vsc, build_vsc_with_setpoints, VscSpec};
use crate::dcconv::{build_dc_converter, DcConverterSpec};
use crate::interlink::{build_ic, build_ic_with_setpoints, IcSpec};
use crate::linalg::Mat;
use crate::sstate::{interconnect, Lti, Wire};

/// Which part of a grid to model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    Dc,
    Ac,
    Hybrid,
    /// One converter, by name, at its operating point in the full grid.
    Converter(String),
}

impl std::str::FromStr for Scope {
    type Err = String;

    /// Parses `dc`, `ac`, `hybrid` or `converter:<name>`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dc" => Ok(Scope::Dc),
            "ac" => Ok(Scope::Ac),
            "hybrid" => Ok(Scope::Hybrid),
            _ => match s.strip_prefix("converter:") {
                Some(name) if !name.is_empty() => Ok(Scope::Converter(name.to_string())),
                _ => Err(format!("unknown scope `{s}` (expected dc, ac, hybrid or converter:<name>)")),
            },
        }
    }
}

impl std::fmt::Display for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scope::Dc => f.write_str("dc"),
            Scope::Ac => f.write_str("ac"),
            Scope::Hybrid => f.write_str("hybrid"),
            Scope::Converter(n) => write!(f, "converter:{n}"),
        }
    }
}

/// Builds the model selected by `scope`.
pub fn assemble(cfg: &GridConfig, scope: &Scope) -> Result<Lti, NetworkError> {
    match scope {
        Scope::Dc => assemble_dc_subgrid(cfg),
        Scope::Ac => assemble_ac_subgrid(cfg),
        Scope::Hybrid => assemble_hybrid(cfg),
        Scope::Converter(name) => assemble_converter(cfg, name),
    }
}

/// DC sub-grid alone, linearized at its own equilibrium.
pub fn assemble_dc_subgrid(cfg: &GridConfig) -> Result<Lti, NetworkError> {
    cfg.validate()?;
    assemble_grid(&cfg.dc_part())
}

/// AC sub-grid alone, linearized at its own equilibrium.
pub fn assemble_ac_subgrid(cfg: &GridConfig) -> Result<Lti, NetworkError> {
    cfg.validate()?;
    assemble_grid(&cfg.ac_part())
}

/// Both sub-grids joined by the interlinking converter.
pub fn assemble_hybrid(cfg: &GridConfig) -> Result<Lti, NetworkError> {
    if cfg.ic.is_none() {
        return Err(NetworkError::MissingInterlink);
    }
    assemble_grid(cfg)
}

/// Whatever the config holds, linearized at its solved equilibrium.
pub fn assemble_grid(cfg: &GridConfig) -> Result<Lti, NetworkError> {
    let ops = solve_equilibrium(cfg)?;
    assemble_at(cfg, &ops)
}

/// One converter on its own, at the operating point it has in the full grid.
/// State labels are not prefixed.
pub fn assemble_converter(cfg: &GridConfig, name: &str) -> Result<Lti, NetworkError> {
    let ops = solve_equilibrium(cfg)?;
    if let Some(k) = cfg.dc_converters.iter().position(|c| c.name == name) {
        let c = &cfg.dc_converters[k];
        let spec = DcConverterSpec {
            name: c.name.clone(),
            filter: c.filter(),
            ctrl: c.ctrl(),
            op: ops.dc[k],
        };
        return Ok(build_dc_converter(&spec)?);
    }
    if let Some(k) = cfg.ac_converters.iter().position(|c| c.name == name) {
        let c = &cfg.ac_converters[k];
        let spec = VscSpec {
            name: c.name.clone(),
            params: c.params(),
            op: ops.ac[k],
        };
        return Ok(build_vsc(&spec)?);
    }
    match (&cfg.ic, &ops.ic) {
        (Some(ic), Some(op)) if ic.name == name => Ok(build_ic(&ic.params(), op)?),
        _ => Err(NetworkError::UnknownConverter(name.to_string())),
    }
}

#[derive(Default)]
struct Builder {
    blocks: Vec<Lti>,
    wires: Vec<Wire>,
    external: Vec<String>,
    states: Vec<String>,
}

impl Builder {
    fn add(&mut self, block: Lti) {
        self.states.extend(block.state_names().iter().cloned());
        self.blocks.push(block);
    }

    fn wire(&mut self, from: impl Into<String>, to: impl Into<String>) {
        self.wires.push(Wire::new(from, to));
    }

    fn finish(self) -> Result<Lti, NetworkError> {
        Ok(interconnect(&self.blocks, &self.wires, Some(&self.external), Some(&self.states))?)
    }
}

fn static_block(inputs: Vec<String>, outputs: Vec<String>, d: Mat) -> Lti {
    let (p, m) = (outputs.len(), inputs.len());
    Lti::new(Mat::zeros(0, 0), Mat::zeros(0, m), Mat::zeros(p, 0), d, vec![], inputs, outputs)
        .expect("static block dimensions match")
}

fn dynamic_block(a: Mat, b: Mat, states: Vec<String>, inputs: Vec<String>) -> Lti {
    let n = states.len();
    let m = inputs.len();
    Lti::new(a, b, Mat::identity(n), Mat::zeros(n, m), states.clone(), inputs, states)
        .expect("dynamic block dimensions match")
}

/// A current entering a bus: signal labels (one for DC, D and Q for AC) and
/// the sign with which it counts as an injection.
struct Incident {
    labels: Vec<String>,
    sign: f64,
}

/// Builds the linear model of `cfg` about the given operating points.
pub fn assemble_at(cfg: &GridConfig, ops: &OperatingPoints) -> Result<Lti, NetworkError> {
    cfg.validate()?;
    let mut bld = Builder::default();
    add_dc(&mut bld, cfg, ops)?;
    add_ac(&mut bld, cfg, ops)?;
    bld.finish()
}

fn resistive_conductance(cfg: &GridConfig, bus: &str) -> f64 {
    cfg.loads
        .iter()
        .filter(|l| l.bus == bus && l.kind == LoadKind::Resistive)
        .map(|l| 1.0 / l.r_ohm)
        .sum()
}

fn add_dc(bld: &mut Builder, cfg: &GridConfig, ops: &OperatingPoints) -> Result<(), NetworkError> {
    let buses: Vec<&str> = cfg
        .buses
        .iter()
        .filter(|b| b.kind == BusKind::Dc)
        .map(|b| b.name.as_str())
        .collect();
    if buses.is_empty() {
        return Ok(());
    }
    let ic_bus = cfg.ic.as_ref().map(|ic| (ic.dc_bus.as_str(), ic.name.as_str()));
    let mut voltage: HashMap<&str, String> = HashMap::new();
    for &b in &buses {
        let sig = match ic_bus {
            Some((ib, name)) if ib == b => format!("{name}.v_dc"),
            _ => format!("bus.{b}.v"),
        };
        voltage.insert(b, sig);
    }
    let mut incident: HashMap<&str, Vec<Incident>> = HashMap::new();
    let mut consumers: Vec<(String, &str)> = vec![];

    for (k, c) in cfg.dc_converters.iter().enumerate() {
        let spec = DcConverterSpec {
            name: c.name.clone(),
            filter: c.filter(),
            ctrl: c.ctrl(),
            op: ops.dc[k],
        };
        bld.add(build_dc_converter(&spec)?.prefixed(&c.name));
        bld.external.push(format!("{}.V_ref", c.name));
        incident.entry(&c.bus).or_default().push(Incident {
            labels: vec![format!("{}.i_o", c.name)],
            sign: 1.0,
        });
        consumers.push((format!("{}.V_dc", c.name), &c.bus));
    }

    for (li, l) in cfg.dc_lines.iter().enumerate() {
        let p = format!("dcline{}", li + 1);
        let ins = vec![format!("{p}.v_from"), format!("{p}.v_to")];
        let block = match l.kind {
            LineKind::Rl => dynamic_block(
                Mat::from_rows(&[&[-l.r_ohm / l.l_henry]]),
                Mat::from_rows(&[&[1.0 / l.l_henry, -1.0 / l.l_henry]]),
                vec![format!("{p}.i")],
                ins,
            ),
            LineKind::Resistive => static_block(
                ins,
                vec![format!("{p}.i")],
                Mat::from_rows(&[&[1.0 / l.r_ohm, -1.0 / l.r_ohm]]),
            ),
        };
        bld.add(block);
        let cur = vec![format!("{p}.i")];
        incident.entry(&l.from).or_default().push(Incident { labels: cur.clone(), sign: -1.0 });
        incident.entry(&l.to).or_default().push(Incident { labels: cur, sign: 1.0 });
        consumers.push((format!("{p}.v_from"), &l.from));
        consumers.push((format!("{p}.v_to"), &l.to));
    }

    for (j, l) in cfg.loads.iter().enumerate() {
        if l.kind != LoadKind::Rl || !buses.contains(&l.bus.as_str()) {
            continue;
        }
        let p = format!("load{}", j + 1);
        bld.add(dynamic_block(
            Mat::from_rows(&[&[-l.r_ohm / l.l_henry]]),
            Mat::from_rows(&[&[1.0 / l.l_henry]]),
            vec![format!("{p}.i")],
            vec![format!("{p}.v")],
        ));
        incident.entry(&l.bus).or_default().push(Incident {
            labels: vec![format!("{p}.i")],
            sign: -1.0,
        });
        consumers.push((format!("{p}.v"), &l.bus));
    }

    for &b in &buses {
        let inc = incident.remove(b).unwrap_or_default();
        let mut ins: Vec<String> = (0..inc.len()).map(|i| format!("bus.{b}.in{i}")).collect();
        let g = resistive_conductance(cfg, b);
        match ic_bus {
            Some((ib, name)) if ib == b => {
                // Net current drawn from the DC link: outflows minus injections
                // plus the resistive loads on the link voltage.
                let mut d: Vec<f64> = inc.iter().map(|x| -x.sign).collect();
                d.push(g);
                ins.push(format!("bus.{b}.v"));
                bld.wire(format!("{name}.v_dc"), format!("bus.{b}.v"));
                bld.add(static_block(ins, vec![format!("bus.{b}.i_out")], Mat::row_vector(&d)));
                bld.wire(format!("bus.{b}.i_out"), format!("{name}.i_odc"));
            }
            _ => {
                let r_eff = 1.0 / (1.0 / cfg.r_virtual_ohm + g);
                let d: Vec<f64> = inc.iter().map(|x| r_eff * x.sign).collect();
                bld.add(static_block(ins, vec![format!("bus.{b}.v")], Mat::row_vector(&d)));
            }
        }
        for (i, x) in inc.iter().enumerate() {
            bld.wire(x.labels[0].clone(), format!("bus.{b}.in{i}"));
        }
    }
    for (input, bus) in consumers {
        bld.wire(voltage[bus].clone(), input);
    }
    Ok(())
}

fn add_ac(bld: &mut Builder, cfg: &GridConfig, ops: &OperatingPoints) -> Result<(), NetworkError> {
    let buses: Vec<&str> = cfg
        .buses
        .iter()
        .filter(|b| b.kind == BusKind::Ac)
        .map(|b| b.name.as_str())
        .collect();
    if buses.is_empty() {
        return Ok(());
    }
    let w = ops.omega.expect("AC buses have a solved frequency");
    let bus_v = |name: &str| {
        let g = cfg.buses.iter().position(|b| b.name == name).expect("validated bus");
        ops.bus_voltages[g]
    };
    let ic_bus = cfg.ic.as_ref().map(|ic| (ic.ac_bus.as_str(), ic.name.as_str()));
    let mut voltage: HashMap<&str, [String; 2]> = HashMap::new();
    for &b in &buses {
        let sig = match ic_bus {
            Some((ib, name)) if ib == b => [format!("frame.{name}.V_D"), format!("frame.{name}.V_Q")],
            _ => [format!("bus.{b}.v_D"), format!("bus.{b}.v_Q")],
        };
        voltage.insert(b, sig);
    }
    let mut incident: HashMap<&str, Vec<Incident>> = HashMap::new();
    let mut consumers: Vec<([String; 2], &str)> = vec![];

    for (k, c) in cfg.ac_converters.iter().enumerate() {
        let n = &c.name;
        let op = ops.ac[k];
        let spec = VscSpec {
            name: n.clone(),
            params: c.params(),
            op,
        };
        bld.add(build_vsc_with_setpoints(&spec)?.prefixed(n));
        bld.external.push(format!("{n}.omega_set"));
        bld.external.push(format!("{n}.v_set"));

        // Local current out to the common frame, common bus voltage into the local frame.
        let (t, dt) = linearized_rotation(op.theta0);
        let i0 = [op.i_od0, op.i_oq0];
        let v0 = bus_v(&c.bus);
        let tt = t.transpose();
        let dtt = dt.transpose();
        let mut d = Mat::zeros(4, 6);
        for r in 0..2 {
            d[(r, 0)] = t[(r, 0)];
            d[(r, 1)] = t[(r, 1)];
            d[(r, 2)] = dt[(r, 0)] * i0[0] + dt[(r, 1)] * i0[1];
            d[(2 + r, 3)] = tt[(r, 0)];
            d[(2 + r, 4)] = tt[(r, 1)];
            d[(2 + r, 5)] = dtt[(r, 0)] * v0.re + dtt[(r, 1)] * v0.im;
        }
        let f = format!("frame.{n}");
        let ins = ["i_d", "i_q", "theta_o", "V_D", "V_Q", "theta_i"].map(|s| format!("{f}.{s}"));
        let outs = ["I_D", "I_Q", "v_d", "v_q"].map(|s| format!("{f}.{s}"));
        bld.add(static_block(ins.to_vec(), outs.to_vec(), d));
        bld.wire(format!("{n}.i_o_d"), format!("{f}.i_d"));
        bld.wire(format!("{n}.i_o_q"), format!("{f}.i_q"));
        bld.wire(format!("{n}.theta"), format!("{f}.theta_o"));
        bld.wire(format!("{n}.theta"), format!("{f}.theta_i"));
        bld.wire(format!("{f}.v_d"), format!("{n}.v_b_d"));
        bld.wire(format!("{f}.v_q"), format!("{n}.v_b_q"));
        incident.entry(&c.bus).or_default().push(Incident {
            labels: vec![format!("{f}.I_D"), format!("{f}.I_Q")],
            sign: 1.0,
        });
        consumers.push(([format!("{f}.V_D"), format!("{f}.V_Q")], &c.bus));
    }

    let rl = |r: f64, l: f64| Mat::from_rows(&[&[-r / l, w], &[-w, -r / l]]);
    for (li, l) in cfg.ac_lines.iter().enumerate() {
        let p = format!("acline{}", li + 1);
        let ins: Vec<String> = ["v_from_D", "v_from_Q", "v_to_D", "v_to_Q"]
            .iter()
            .map(|s| format!("{p}.{s}"))
            .collect();
        let cur = vec![format!("{p}.i_D"), format!("{p}.i_Q")];
        let block = match l.kind {
            LineKind::Rl => {
                let k = 1.0 / l.l_henry;
                dynamic_block(
                    rl(l.r_ohm, l.l_henry),
                    Mat::from_rows(&[&[k, 0.0, -k, 0.0], &[0.0, k, 0.0, -k]]),
                    cur.clone(),
                    ins,
                )
            }
            LineKind::Resistive => {
                let g = 1.0 / l.r_ohm;
                static_block(ins, cur.clone(), Mat::from_rows(&[&[g, 0.0, -g, 0.0], &[0.0, g, 0.0, -g]]))
            }
        };
        bld.add(block);
        incident.entry(&l.from).or_default().push(Incident { labels: cur.clone(), sign: -1.0 });
        incident.entry(&l.to).or_default().push(Incident { labels: cur, sign: 1.0 });
        consumers.push(([format!("{p}.v_from_D"), format!("{p}.v_from_Q")], &l.from));
        consumers.push(([format!("{p}.v_to_D"), format!("{p}.v_to_Q")], &l.to));
    }

    for (j, l) in cfg.loads.iter().enumerate() {
        if l.kind != LoadKind::Rl || !buses.contains(&l.bus.as_str()) {
            continue;
        }
        let p = format!("load{}", j + 1);
        let k = 1.0 / l.l_henry;
        let cur = vec![format!("{p}.i_D"), format!("{p}.i_Q")];
        bld.add(dynamic_block(
            rl(l.r_ohm, l.l_henry),
            Mat::from_rows(&[&[k, 0.0], &[0.0, k]]),
            cur.clone(),
            vec![format!("{p}.v_D"), format!("{p}.v_Q")],
        ));
        incident.entry(&l.bus).or_default().push(Incident { labels: cur, sign: -1.0 });
        consumers.push(([format!("{p}.v_D"), format!("{p}.v_Q")], &l.bus));
    }

    if let (Some(ic), Some(op)) = (&cfg.ic, &ops.ic) {
        let n = &ic.name;
        let spec = IcSpec {
            name: n.clone(),
            params: ic.params(),
            op: *op,
        };
        bld.add(build_ic_with_setpoints(&spec)?.prefixed(n));
        bld.external.push(format!("{n}.p_set"));
        bld.external.push(format!("{n}.v_set"));
        let (t, dt) = linearized_rotation(op.delta0);
        let v0 = [op.v_icd0, op.v_icq0];
        let i0 = t.matvec(&[op.i_od0, op.i_oq0]);
        let tt = t.transpose();
        let dtt = dt.transpose();
        let mut d = Mat::zeros(4, 6);
        for r in 0..2 {
            d[(r, 0)] = t[(r, 0)];
            d[(r, 1)] = t[(r, 1)];
            d[(r, 2)] = dt[(r, 0)] * v0[0] + dt[(r, 1)] * v0[1];
            d[(2 + r, 3)] = tt[(r, 0)];
            d[(2 + r, 4)] = tt[(r, 1)];
            d[(2 + r, 5)] = dtt[(r, 0)] * i0[0] + dtt[(r, 1)] * i0[1];
        }
        let f = format!("frame.{n}");
        let ins = ["v_d", "v_q", "delta_o", "I_D", "I_Q", "delta_i"].map(|s| format!("{f}.{s}"));
        let outs = ["V_D", "V_Q", "i_d", "i_q"].map(|s| format!("{f}.{s}"));
        bld.add(static_block(ins.to_vec(), outs.to_vec(), d));
        bld.wire(format!("{n}.v_icd"), format!("{f}.v_d"));
        bld.wire(format!("{n}.v_icq"), format!("{f}.v_q"));
        bld.wire(format!("{n}.delta"), format!("{f}.delta_o"));
        bld.wire(format!("{n}.delta"), format!("{f}.delta_i"));
        bld.wire(format!("{f}.i_d"), format!("{n}.i_od"));
        bld.wire(format!("{f}.i_q"), format!("{n}.i_oq"));
    }

    for &b in &buses {
        let inc = incident.remove(b).unwrap_or_default();
        let mut ins = vec![];
        for i in 0..inc.len() {
            ins.push(format!("bus.{b}.in{i}_D"));
            ins.push(format!("bus.{b}.in{i}_Q"));
        }
        let g = resistive_conductance(cfg, b);
        let k = ins.len();
        match ic_bus {
            Some((ib, name)) if ib == b => {
                let mut d = Mat::zeros(2, k + 2);
                for (i, x) in inc.iter().enumerate() {
                    d[(0, 2 * i)] = -x.sign;
                    d[(1, 2 * i + 1)] = -x.sign;
                }
                d[(0, k)] = g;
                d[(1, k + 1)] = g;
                ins.push(format!("bus.{b}.v_D"));
                ins.push(format!("bus.{b}.v_Q"));
                bld.wire(format!("frame.{name}.V_D"), format!("bus.{b}.v_D"));
                bld.wire(format!("frame.{name}.V_Q"), format!("bus.{b}.v_Q"));
                bld.add(static_block(ins, vec![format!("bus.{b}.I_D"), format!("bus.{b}.I_Q")], d));
                bld.wire(format!("bus.{b}.I_D"), format!("frame.{name}.I_D"));
                bld.wire(format!("bus.{b}.I_Q"), format!("frame.{name}.I_Q"));
            }
            _ => {
                let r_eff = 1.0 / (1.0 / cfg.r_virtual_ohm + g);
                let mut d = Mat::zeros(2, k);
                for (i, x) in inc.iter().enumerate() {
                    d[(0, 2 * i)] = r_eff * x.sign;
                    d[(1, 2 * i + 1)] = r_eff * x.sign;
                }
                bld.add(static_block(ins, vec![format!("bus.{b}.v_D"), format!("bus.{b}.v_Q")], d));
            }
        }
        for (i, x) in inc.iter().enumerate() {
            bld.wire(x.labels[0].clone(), format!("bus.{b}.in{i}_D"));
            bld.wire(x.labels[1].clone(), format!("bus.{b}.in{i}_Q"));
        }
    }
    for (inputs, bus) in consumers {
        let [vd, vq] = voltage[bus].clone();
        bld.wire(vd, inputs[0].clone());
        bld.wire(vq, inputs[1].clone());
    }
    Ok(())
}

//! Declarative grid description, read from JSON with unit-suffixed fields.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::NetworkError;
use crate::acconv::VscParams;
use crate::dcconv::{DcControllerParams, DcFilterParams};
use crate::interlink::IcParams;
use crate::params::{positive, InvalidParam};

fn default_r_virtual() -> f64 {
    1e3
}
fn default_h_ff() -> f64 {
    0.75
}
fn default_m_p() -> f64 {
    1e-4
}
fn default_n_q() -> f64 {
    1e-3
}
fn default_w_n() -> f64 {
    2.0 * std::f64::consts::PI * 50.0
}
fn default_c_dc() -> f64 {
    1e-3
}
fn default_j() -> f64 {
    0.2
}
fn default_k_d() -> f64 {
    10.0
}
fn default_ic_name() -> String {
    "ic".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Ac,
    Dc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusConfig {
    pub name: String,
    pub kind: BusKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    #[default]
    Rl,
    Resistive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineConfig {
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub kind: LineKind,
    pub r_ohm: f64,
    #[serde(default)]
    pub l_henry: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadKind {
    Resistive,
    Rl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadConfig {
    pub bus: String,
    pub kind: LoadKind,
    pub r_ohm: f64,
    #[serde(default)]
    pub l_henry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcConverterConfig {
    pub name: String,
    pub bus: String,
    pub v_ref_volt: f64,
    pub r_f_ohm: f64,
    pub l_f_henry: f64,
    pub c_f_farad: f64,
    pub r_o_ohm: f64,
    pub l_o_henry: f64,
    pub k_pv: f64,
    pub k_iv: f64,
    pub k_pc: f64,
    pub k_ic: f64,
    #[serde(default = "default_h_ff")]
    pub h_ff: f64,
    pub w_f_rad_s: f64,
    pub m_dc_volt_per_watt: f64,
}

impl DcConverterConfig {
    pub fn filter(&self) -> DcFilterParams {
        DcFilterParams {
            r_f: self.r_f_ohm,
            l_f: self.l_f_henry,
            c_f: self.c_f_farad,
            r_o: self.r_o_ohm,
            l_o: self.l_o_henry,
        }
    }

    pub fn ctrl(&self) -> DcControllerParams {
        DcControllerParams {
            k_pv: self.k_pv,
            k_iv: self.k_iv,
            k_pc: self.k_pc,
            k_ic: self.k_ic,
            h_ff: self.h_ff,
            w_f: self.w_f_rad_s,
            m_dc: self.m_dc_volt_per_watt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VscConfig {
    pub name: String,
    pub bus: String,
    /// Capacitor voltage magnitude setpoint (dq peak).
    pub v_n_volt: f64,
    pub r_f_ohm: f64,
    pub l_f_henry: f64,
    pub c_f_farad: f64,
    pub r_o_ohm: f64,
    pub l_o_henry: f64,
    pub k_pv: f64,
    pub k_iv: f64,
    pub k_pc: f64,
    pub k_ic: f64,
    #[serde(default = "default_h_ff")]
    pub h_ff: f64,
    pub w_f_rad_s: f64,
    #[serde(default = "default_m_p")]
    pub m_p_rad_s_per_watt: f64,
    #[serde(default = "default_n_q")]
    pub n_q_volt_per_var: f64,
    #[serde(default = "default_w_n")]
    pub w_n_rad_s: f64,
}

impl VscConfig {
    pub fn params(&self) -> VscParams {
        VscParams {
            r_f: self.r_f_ohm,
            l_f: self.l_f_henry,
            c_f: self.c_f_farad,
            r_o: self.r_o_ohm,
            l_o: self.l_o_henry,
            k_pv: self.k_pv,
            k_iv: self.k_iv,
            k_pc: self.k_pc,
            k_ic: self.k_ic,
            h_ff: self.h_ff,
            w_f: self.w_f_rad_s,
            m_p: self.m_p_rad_s_per_watt,
            n_q: self.n_q_volt_per_var,
            w_n: self.w_n_rad_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcConfig {
    #[serde(default = "default_ic_name")]
    pub name: String,
    pub ac_bus: String,
    pub dc_bus: String,
    pub r_f_ohm: f64,
    pub l_f_henry: f64,
    pub c_f_farad: f64,
    #[serde(default = "default_c_dc")]
    pub c_dc_farad: f64,
    #[serde(default = "default_j")]
    pub j: f64,
    #[serde(default = "default_k_d")]
    pub k_d: f64,
    #[serde(default)]
    pub p_ref_watt: f64,
    /// Defaults to `w_n_rad_s`.
    #[serde(default)]
    pub w_g_star_rad_s: Option<f64>,
    pub v_ref_volt: f64,
    pub k_pv: f64,
    pub k_iv: f64,
    pub k_pc: f64,
    pub k_ic: f64,
    #[serde(default = "default_h_ff")]
    pub h_ff: f64,
    #[serde(default = "default_w_n")]
    pub w_n_rad_s: f64,
}

impl IcConfig {
    pub fn params(&self) -> IcParams {
        IcParams {
            r_f: self.r_f_ohm,
            l_f: self.l_f_henry,
            c_f: self.c_f_farad,
            c_dc: self.c_dc_farad,
            j: self.j,
            k_d: self.k_d,
            p_ref: self.p_ref_watt,
            w_g_star: self.w_g_star_rad_s.unwrap_or(self.w_n_rad_s),
            v_ac_ref: self.v_ref_volt,
            k_pv: self.k_pv,
            k_iv: self.k_iv,
            k_pc: self.k_pc,
            k_ic: self.k_ic,
            h_ff: self.h_ff,
            w_n: self.w_n_rad_s,
        }
    }
}

/// Buses, converters, lines and loads of a hybrid microgrid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Shunt resistance used to express bus voltages through injected currents.
    #[serde(default = "default_r_virtual")]
    pub r_virtual_ohm: f64,
    pub buses: Vec<BusConfig>,
    #[serde(default)]
    pub dc_converters: Vec<DcConverterConfig>,
    #[serde(default)]
    pub ac_converters: Vec<VscConfig>,
    #[serde(default)]
    pub ic: Option<IcConfig>,
    #[serde(default)]
    pub dc_lines: Vec<LineConfig>,
    #[serde(default)]
    pub ac_lines: Vec<LineConfig>,
    #[serde(default)]
    pub loads: Vec<LoadConfig>,
}

impl GridConfig {
    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        serde_json::from_str(text).map_err(|e| NetworkError::InvalidConfig(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn bus_kind(&self, name: &str) -> Option<BusKind> {
        self.buses.iter().find(|b| b.name == name).map(|b| b.kind)
    }

    /// The DC buses, converters, lines and loads only.
    pub fn dc_part(&self) -> GridConfig {
        self.part(BusKind::Dc)
    }

    /// The AC buses, converters, lines and loads only.
    pub fn ac_part(&self) -> GridConfig {
        self.part(BusKind::Ac)
    }

    fn part(&self, kind: BusKind) -> GridConfig {
        let keep: HashSet<&str> = self
            .buses
            .iter()
            .filter(|b| b.kind == kind)
            .map(|b| b.name.as_str())
            .collect();
        GridConfig {
            r_virtual_ohm: self.r_virtual_ohm,
            buses: self.buses.iter().filter(|b| b.kind == kind).cloned().collect(),
            dc_converters: if kind == BusKind::Dc { self.dc_converters.clone() } else { vec![] },
            ac_converters: if kind == BusKind::Ac { self.ac_converters.clone() } else { vec![] },
            ic: None,
            dc_lines: if kind == BusKind::Dc { self.dc_lines.clone() } else { vec![] },
            ac_lines: if kind == BusKind::Ac { self.ac_lines.clone() } else { vec![] },
            loads: self.loads.iter().filter(|l| keep.contains(l.bus.as_str())).cloned().collect(),
        }
    }

    /// Checks names, references, bus kinds and parameter ranges. Errors name
    /// the offending field, e.g. `loads[1].bus`.
    pub fn validate(&self) -> Result<(), NetworkError> {
        at("r_virtual_ohm", positive("r_virtual_ohm", self.r_virtual_ohm))?;
        let mut kinds: HashMap<&str, BusKind> = HashMap::new();
        for b in &self.buses {
            if kinds.insert(b.name.as_str(), b.kind).is_some() {
                return Err(NetworkError::InvalidConfig(format!("duplicate bus `{}`", b.name)));
            }
        }
        let expect = |bus: &str, kind: BusKind, field: String| -> Result<(), NetworkError> {
            match kinds.get(bus) {
                None => Err(NetworkError::UnknownBus {
                    field,
                    bus: bus.to_string(),
                }),
                Some(&k) if k != kind => Err(NetworkError::InvalidConfig(format!(
                    "{field}: needs a {} bus, `{bus}` is {}",
                    kind_name(kind),
                    kind_name(k)
                ))),
                Some(_) => Ok(()),
            }
        };

        let mut names = HashSet::new();
        let mut unique = |name: &str, field: String| -> Result<(), NetworkError> {
            let reserved = name.is_empty()
                || name.contains('.')
                || name == "bus"
                || name == "frame"
                || name.starts_with("dcline")
                || name.starts_with("acline")
                || name.starts_with("load");
            if reserved {
                return Err(NetworkError::InvalidConfig(format!(
                    "{field}: reserved or empty unit name `{name}`"
                )));
            }
            if !names.insert(name.to_string()) {
                return Err(NetworkError::InvalidConfig(format!("{field}: duplicate unit name `{name}`")));
            }
            Ok(())
        };

        let mut attached: HashSet<&str> = HashSet::new();
        for (k, c) in self.dc_converters.iter().enumerate() {
            let path = format!("dc_converters[{k}]");
            unique(&c.name, format!("{path}.name"))?;
            expect(&c.bus, BusKind::Dc, format!("{path}.bus"))?;
            at(&path, c.filter().validate())?;
            at(&path, c.ctrl().validate())?;
            at(&path, positive("v_ref_volt", c.v_ref_volt))?;
            attached.insert(&c.bus);
        }
        for (k, c) in self.ac_converters.iter().enumerate() {
            let path = format!("ac_converters[{k}]");
            unique(&c.name, format!("{path}.name"))?;
            expect(&c.bus, BusKind::Ac, format!("{path}.bus"))?;
            at(&path, c.params().validate())?;
            at(&path, positive("v_n_volt", c.v_n_volt))?;
            attached.insert(&c.bus);
        }
        if let Some(ic) = &self.ic {
            unique(&ic.name, "ic.name".into())?;
            expect(&ic.ac_bus, BusKind::Ac, "ic.ac_bus".into())?;
            expect(&ic.dc_bus, BusKind::Dc, "ic.dc_bus".into())?;
            at("ic", ic.params().validate())?;
            attached.insert(&ic.ac_bus);
            attached.insert(&ic.dc_bus);
        }
        for (lines, kind, key) in [
            (&self.dc_lines, BusKind::Dc, "dc_lines"),
            (&self.ac_lines, BusKind::Ac, "ac_lines"),
        ] {
            for (k, l) in lines.iter().enumerate() {
                let path = format!("{key}[{k}]");
                expect(&l.from, kind, format!("{path}.from"))?;
                expect(&l.to, kind, format!("{path}.to"))?;
                if l.from == l.to {
                    return Err(NetworkError::InvalidConfig(format!(
                        "{path}: line `{}` loops onto itself",
                        l.from
                    )));
                }
                at(&path, positive("r_ohm", l.r_ohm))?;
                if l.kind == LineKind::Rl {
                    at(&path, positive("l_henry", l.l_henry))?;
                }
                attached.insert(&l.from);
                attached.insert(&l.to);
            }
        }
        for (k, l) in self.loads.iter().enumerate() {
            let path = format!("loads[{k}]");
            if !kinds.contains_key(l.bus.as_str()) {
                return Err(NetworkError::UnknownBus {
                    field: format!("{path}.bus"),
                    bus: l.bus.clone(),
                });
            }
            at(&path, positive("r_ohm", l.r_ohm))?;
            if l.kind == LoadKind::Rl {
                at(&path, positive("l_henry", l.l_henry))?;
            }
            attached.insert(&l.bus);
        }
        for b in &self.buses {
            if !attached.contains(b.name.as_str()) {
                return Err(NetworkError::IslandedBus(b.name.clone()));
            }
        }
        Ok(())
    }
}

fn kind_name(k: BusKind) -> &'static str {
    match k {
        BusKind::Ac => "AC",
        BusKind::Dc => "DC",
    }
}

/// Prefixes a parameter error with the path of the entry it came from.
fn at(path: &str, r: Result<(), InvalidParam>) -> Result<(), NetworkError> {
    r.map_err(|e| NetworkError::InvalidConfig(format!("{path}: {e}")))
}

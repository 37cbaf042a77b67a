//! Steady state of the nonlinear grid equations.
//!
//! The AC side is solved first in a frame rotating at the common steady-state
//! frequency: unknowns are that frequency, the angles of the grid-forming
//! units (the first one is the angle reference) and the capacitor voltage
//! magnitudes of the VSCs. The interlinking converter's bridge power then
//! enters the DC side as a constant-power draw at its DC bus. Every bus other
//! than those formed by the interlinking converter carries the virtual
//! resistor as a real shunt, so the linear models are expanded about their
//! own equilibrium.

use num_complex::Complex64 as C64;

use super::config::{BusKind, GridConfig, LineKind, LoadKind};
use super::NetworkError;
use crate::acconv::VscOperatingPoint;
use crate::dcconv::DcOperatingPoint;
use crate::interlink::IcOperatingPoint;
use crate::linalg::{solve_linear, Mat};

const TOL: f64 = 1e-10;
const ACCEPT: f64 = 1e-9;
const MAX_ITER: usize = 100;

/// Solved linearization points, in config order.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoints {
    /// Common AC frequency, rad/s; `None` without AC buses.
    pub omega: Option<f64>,
    pub dc: Vec<DcOperatingPoint>,
    pub ac: Vec<VscOperatingPoint>,
    pub ic: Option<IcOperatingPoint>,
    /// Bus voltages aligned with `cfg.buses`; DC buses have zero imaginary part,
    /// AC values are dq phasors in the common frame.
    pub bus_voltages: Vec<C64>,
    /// Largest scaled residual at the solution.
    pub residual: f64,
    pub iterations: usize,
}

pub fn solve_equilibrium(cfg: &GridConfig) -> Result<OperatingPoints, NetworkError> {
    cfg.validate()?;
    let mut bus_voltages = vec![C64::new(0.0, 0.0); cfg.buses.len()];
    let mut residual: f64 = 0.0;
    let mut iterations = 0;

    let has_ac = cfg.buses.iter().any(|b| b.kind == BusKind::Ac);
    let ac = if has_ac {
        let sol = solve_ac(cfg)?;
        residual = residual.max(sol.residual);
        iterations += sol.iterations;
        for (&b, &v) in sol.net.bus_index.iter().zip(&sol.net.bus_v) {
            bus_voltages[b] = v;
        }
        Some(sol)
    } else {
        None
    };

    let bridge_power = ac.as_ref().and_then(|s| s.ic.as_ref()).map(|ic| ic.p_bridge);
    let has_dc = cfg.buses.iter().any(|b| b.kind == BusKind::Dc);
    let (dc, dc_ops) = if has_dc {
        let sol = solve_dc(cfg, bridge_power.unwrap_or(0.0))?;
        residual = residual.max(sol.residual);
        iterations += sol.iterations;
        for (&b, &v) in sol.bus_index.iter().zip(&sol.bus_v) {
            bus_voltages[b] = C64::new(v, 0.0);
        }
        let ops = cfg
            .dc_converters
            .iter()
            .zip(&sol.currents)
            .map(|(c, &i)| {
                let v_b = sol.bus_v[sol.local(cfg, &c.bus)];
                DcOperatingPoint { v_o0: v_b + c.r_o_ohm * i, i_o0: i }
            })
            .collect();
        (Some(sol), ops)
    } else {
        (None, vec![])
    };

    let mut ac_ops = vec![];
    let mut ic_op = None;
    let mut omega = None;
    if let Some(sol) = &ac {
        omega = Some(sol.omega);
        let w = sol.omega;
        for (k, c) in cfg.ac_converters.iter().enumerate() {
            let delta = sol.angles[k];
            let v_o = C64::new(sol.magnitudes[k], 0.0);
            let i_o = sol.net.i_o[k] * C64::from_polar(1.0, -delta);
            let i_inv = i_o + C64::new(0.0, w * c.c_f_farad) * v_o;
            ac_ops.push(VscOperatingPoint {
                v_od0: v_o.re,
                v_oq0: v_o.im,
                i_od0: i_o.re,
                i_oq0: i_o.im,
                i_invd0: i_inv.re,
                i_invq0: i_inv.im,
                w0: w,
                theta0: delta,
            });
        }
        if let (Some(icc), Some(ics)) = (&cfg.ic, &sol.ic) {
            let dc_sol = dc.as_ref().ok_or(NetworkError::MissingInterlink)?;
            let v_dc0 = dc_sol.bus_v[dc_sol.local(cfg, &icc.dc_bus)];
            let m = ics.v_br / v_dc0;
            ic_op = Some(IcOperatingPoint {
                v_dc0,
                i_icd0: ics.i_ic.re,
                i_icq0: ics.i_ic.im,
                v_icd0: icc.v_ref_volt,
                v_icq0: 0.0,
                i_od0: ics.i_o.re,
                i_oq0: ics.i_o.im,
                m_d0: m.re,
                m_q0: m.im,
                w0: w,
                delta0: ics.delta,
            });
        }
    }

    Ok(OperatingPoints {
        omega,
        dc: dc_ops,
        ac: ac_ops,
        ic: ic_op,
        bus_voltages,
        residual,
        iterations,
    })
}

/// Damped Newton iteration with a central-difference Jacobian. `f` returns
/// `None` where the iterate leaves the physical domain.
fn newton<F>(f: F, x0: Vec<f64>) -> Result<(Vec<f64>, f64, usize), NetworkError>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let norm = |r: &[f64]| r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let fail = |x: &[f64], res: f64, it: usize| NetworkError::NoConvergence {
        residual: res,
        iterate: x.to_vec(),
        iterations: it,
    };
    let mut x = x0;
    let mut r = f(&x).ok_or_else(|| fail(&x, f64::INFINITY, 0))?;
    let mut res = norm(&r);
    let n = x.len();
    for it in 0..MAX_ITER {
        if res <= TOL {
            return Ok((x, res, it));
        }
        let mut jac = Mat::zeros(n, n);
        for j in 0..n {
            let h = 1e-6 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (fp, fm) = match (f(&xp), f(&xm)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(fail(&x, res, it)),
            };
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let rhs = Mat::column(&r.iter().map(|v| -v).collect::<Vec<_>>());
        let dx = solve_linear(&jac, &rhs).map_err(|_| fail(&x, res, it))?;
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-6 {
            let xn: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + t * dx[(i, 0)]).collect();
            if let Some(rn) = f(&xn) {
                let resn = norm(&rn);
                if resn < res {
                    x = xn;
                    r = rn;
                    res = resn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return if res <= ACCEPT { Ok((x, res, it)) } else { Err(fail(&x, res, it)) };
        }
    }
    if res <= ACCEPT {
        Ok((x, res, MAX_ITER))
    } else {
        Err(fail(&x, res, MAX_ITER))
    }
}

struct DcSolution {
    bus_index: Vec<usize>,
    bus_v: Vec<f64>,
    currents: Vec<f64>,
    residual: f64,
    iterations: usize,
}

impl DcSolution {
    fn local(&self, cfg: &GridConfig, bus: &str) -> usize {
        let g = cfg.buses.iter().position(|b| b.name == bus).expect("validated bus");
        self.bus_index.iter().position(|&i| i == g).expect("DC bus")
    }
}

fn solve_dc(cfg: &GridConfig, p_bridge: f64) -> Result<DcSolution, NetworkError> {
    let bus_index: Vec<usize> = (0..cfg.buses.len()).filter(|&i| cfg.buses[i].kind == BusKind::Dc).collect();
    let nb = bus_index.len();
    let local = |name: &str| {
        bus_index
            .iter()
            .position(|&i| cfg.buses[i].name == name)
            .expect("validated DC bus")
    };
    let conv_bus: Vec<usize> = cfg.dc_converters.iter().map(|c| local(&c.bus)).collect();
    let lines: Vec<(usize, usize, f64)> = cfg
        .dc_lines
        .iter()
        .map(|l| (local(&l.from), local(&l.to), 1.0 / l.r_ohm))
        .collect();
    let mut shunt = vec![0.0; nb];
    for l in &cfg.loads {
        if let Some(b) = bus_index.iter().position(|&i| cfg.buses[i].name == l.bus) {
            shunt[b] += 1.0 / l.r_ohm;
        }
    }
    let ic_bus = cfg.ic.as_ref().map(|ic| local(&ic.dc_bus));
    for (b, s) in shunt.iter_mut().enumerate() {
        if Some(b) != ic_bus {
            *s += 1.0 / cfg.r_virtual_ohm;
        }
    }
    let nk = cfg.dc_converters.len();

    let f = |x: &[f64]| -> Option<Vec<f64>> {
        let (v, i) = x.split_at(nb);
        if v.iter().any(|&vb| vb <= 0.0) {
            return None;
        }
        let mut r = Vec::with_capacity(nb + nk);
        let mut kcl: Vec<f64> = (0..nb).map(|b| -shunt[b] * v[b]).collect();
        for (k, &b) in conv_bus.iter().enumerate() {
            kcl[b] += i[k];
        }
        for &(a, b, g) in &lines {
            let flow = g * (v[a] - v[b]);
            kcl[a] -= flow;
            kcl[b] += flow;
        }
        if let Some(b) = ic_bus {
            kcl[b] -= p_bridge / v[b];
        }
        r.extend(kcl);
        for (k, c) in cfg.dc_converters.iter().enumerate() {
            let vb = v[conv_bus[k]];
            let p = (vb + c.r_o_ohm * i[k]) * i[k];
            r.push(c.v_ref_volt - c.m_dc_volt_per_watt * p - vb);
        }
        Some(r)
    };

    let v_init = if nk > 0 {
        cfg.dc_converters.iter().map(|c| c.v_ref_volt).sum::<f64>() / nk as f64
    } else {
        1.0
    };
    let mut x0 = vec![v_init; nb];
    x0.extend(std::iter::repeat(0.0).take(nk));
    let (x, residual, iterations) = newton(f, x0)?;
    Ok(DcSolution {
        bus_index,
        bus_v: x[..nb].to_vec(),
        currents: x[nb..].to_vec(),
        residual,
        iterations,
    })
}

struct AcNetwork {
    bus_index: Vec<usize>,
    bus_v: Vec<C64>,
    /// Connector current of each VSC, common frame.
    i_o: Vec<C64>,
    /// Current leaving the interlinking converter's capacitor node.
    i_ic: Option<C64>,
}

struct IcSteady {
    delta: f64,
    i_o: C64,
    i_ic: C64,
    v_br: C64,
    p_bridge: f64,
}

struct AcSolution {
    omega: f64,
    angles: Vec<f64>,
    magnitudes: Vec<f64>,
    net: AcNetwork,
    ic: Option<IcSteady>,
    residual: f64,
    iterations: usize,
}

fn series(r: f64, l: f64, w: f64) -> C64 {
    C64::new(1.0, 0.0) / C64::new(r, w * l)
}

/// Bus voltages and branch currents for given source phasors.
fn ac_network(cfg: &GridConfig, w: f64, sources: &[C64], ic_v: Option<C64>) -> Option<AcNetwork> {
    let bus_index: Vec<usize> = (0..cfg.buses.len()).filter(|&i| cfg.buses[i].kind == BusKind::Ac).collect();
    let nb = bus_index.len();
    let local = |name: &str| {
        bus_index
            .iter()
            .position(|&i| cfg.buses[i].name == name)
            .expect("validated AC bus")
    };
    let ic_bus = cfg.ic.as_ref().map(|ic| local(&ic.ac_bus));
    // Unknown buses are numbered without the one fixed by the interlinking converter.
    let unknown: Vec<usize> = (0..nb).filter(|&b| Some(b) != ic_bus).collect();
    let slot = |b: usize| unknown.iter().position(|&u| u == b);
    let nu = unknown.len();

    let mut y = vec![vec![C64::new(0.0, 0.0); nu]; nu];
    let mut rhs = vec![C64::new(0.0, 0.0); nu];
    let conv_y: Vec<C64> = cfg
        .ac_converters
        .iter()
        .map(|c| series(c.r_o_ohm, c.l_o_henry, w))
        .collect();
    for (k, c) in cfg.ac_converters.iter().enumerate() {
        if let Some(s) = slot(local(&c.bus)) {
            y[s][s] += conv_y[k];
            rhs[s] += conv_y[k] * sources[k];
        }
    }
    let line_y: Vec<C64> = cfg
        .ac_lines
        .iter()
        .map(|l| match l.kind {
            LineKind::Rl => series(l.r_ohm, l.l_henry, w),
            LineKind::Resistive => C64::new(1.0 / l.r_ohm, 0.0),
        })
        .collect();
    for (li, l) in cfg.ac_lines.iter().enumerate() {
        let (a, b) = (local(&l.from), local(&l.to));
        let g = line_y[li];
        match (slot(a), slot(b)) {
            (Some(sa), Some(sb)) => {
                y[sa][sa] += g;
                y[sb][sb] += g;
                y[sa][sb] -= g;
                y[sb][sa] -= g;
            }
            (Some(sa), None) => {
                y[sa][sa] += g;
                rhs[sa] += g * ic_v?;
            }
            (None, Some(sb)) => {
                y[sb][sb] += g;
                rhs[sb] += g * ic_v?;
            }
            (None, None) => return None,
        }
    }
    let mut load_y = vec![C64::new(0.0, 0.0); nb];
    for l in &cfg.loads {
        if let Some(b) = bus_index.iter().position(|&i| cfg.buses[i].name == l.bus) {
            load_y[b] += match l.kind {
                LoadKind::Resistive => C64::new(1.0 / l.r_ohm, 0.0),
                LoadKind::Rl => series(l.r_ohm, l.l_henry, w),
            };
        }
    }
    for (s, &b) in unknown.iter().enumerate() {
        y[s][s] += load_y[b] + C64::new(1.0 / cfg.r_virtual_ohm, 0.0);
    }

    // Real embedding of the complex nodal system.
    let mut m = Mat::zeros(2 * nu, 2 * nu);
    let mut r = Mat::zeros(2 * nu, 1);
    for i in 0..nu {
        for j in 0..nu {
            let g = y[i][j];
            m[(2 * i, 2 * j)] = g.re;
            m[(2 * i, 2 * j + 1)] = -g.im;
            m[(2 * i + 1, 2 * j)] = g.im;
            m[(2 * i + 1, 2 * j + 1)] = g.re;
        }
        r[(2 * i, 0)] = rhs[i].re;
        r[(2 * i + 1, 0)] = rhs[i].im;
    }
    let sol = solve_linear(&m, &r).ok()?;
    let mut bus_v = vec![C64::new(0.0, 0.0); nb];
    for (s, &b) in unknown.iter().enumerate() {
        bus_v[b] = C64::new(sol[(2 * s, 0)], sol[(2 * s + 1, 0)]);
    }
    if let Some(b) = ic_bus {
        bus_v[b] = ic_v?;
    }
    let i_o: Vec<C64> = cfg
        .ac_converters
        .iter()
        .enumerate()
        .map(|(k, c)| conv_y[k] * (sources[k] - bus_v[local(&c.bus)]))
        .collect();
    let i_ic = ic_bus.map(|b| {
        let mut out = load_y[b] * bus_v[b];
        for (li, l) in cfg.ac_lines.iter().enumerate() {
            let (a, c) = (local(&l.from), local(&l.to));
            if a == b {
                out += line_y[li] * (bus_v[a] - bus_v[c]);
            } else if c == b {
                out += line_y[li] * (bus_v[c] - bus_v[a]);
            }
        }
        for (k, c) in cfg.ac_converters.iter().enumerate() {
            if local(&c.bus) == b {
                out -= i_o[k];
            }
        }
        out
    });
    Some(AcNetwork {
        bus_index,
        bus_v,
        i_o,
        i_ic,
    })
}

fn solve_ac(cfg: &GridConfig) -> Result<AcSolution, NetworkError> {
    let nk = cfg.ac_converters.len();
    let ic = cfg.ic.as_ref().map(|c| c.params());
    let units = nk + usize::from(ic.is_some());
    if units == 0 {
        return Err(NetworkError::InvalidConfig("AC buses without a grid-forming converter".into()));
    }
    // x = [ω, angles of units 2.., VSC magnitudes]
    let unpack = |x: &[f64]| -> (f64, Vec<f64>, Vec<f64>) {
        let mut angles = vec![0.0];
        angles.extend_from_slice(&x[1..units]);
        (x[0], angles, x[units..units + nk].to_vec())
    };
    let evaluate = |x: &[f64]| -> Option<(AcNetwork, Option<IcSteady>, Vec<f64>)> {
        let (w, angles, mags) = unpack(x);
        if w <= 0.0 || mags.iter().any(|&e| e <= 0.0) {
            return None;
        }
        let sources: Vec<C64> = (0..nk).map(|k| C64::from_polar(mags[k], angles[k])).collect();
        let ic_v = ic.map(|p| C64::from_polar(p.v_ac_ref, angles[nk]));
        let net = ac_network(cfg, w, &sources, ic_v)?;
        let mut r = Vec::with_capacity(units + nk);
        for (k, c) in cfg.ac_converters.iter().enumerate() {
            let s = sources[k] * net.i_o[k].conj() * 1.5;
            r.push(w - (c.w_n_rad_s - c.m_p_rad_s_per_watt * s.re));
            r.push(mags[k] - (c.v_n_volt - c.n_q_volt_per_var * s.im));
        }
        let steady = match (ic, ic_v, net.i_ic) {
            (Some(p), Some(v), Some(i_net)) => {
                let p_ic = 1.5 * (v * i_net.conj()).re;
                r.push((p_ic - p.p_ref + p.k_d * (w - p.w_g_star)) / p.k_d.max(1.0));
                let rot = C64::from_polar(1.0, -angles[nk]);
                let v_loc = v * rot;
                let i_o = i_net * rot;
                let i_ic = i_o + C64::new(0.0, w * p.c_f) * v_loc;
                let v_br = v_loc + C64::new(p.r_f, w * p.l_f) * i_ic;
                Some(IcSteady {
                    delta: angles[nk],
                    i_o,
                    i_ic,
                    v_br,
                    p_bridge: 1.5 * (v_br * i_ic.conj()).re,
                })
            }
            _ => None,
        };
        Some((net, steady, r))
    };

    let w_init = cfg
        .ac_converters
        .first()
        .map(|c| c.w_n_rad_s)
        .or(ic.map(|p| p.w_g_star))
        .expect("at least one unit");
    let mut x0 = vec![w_init];
    x0.extend(std::iter::repeat(0.0).take(units - 1));
    x0.extend(cfg.ac_converters.iter().map(|c| c.v_n_volt));
    let (x, residual, iterations) = newton(|x| evaluate(x).map(|e| e.2), x0)?;
    let (net, ic_steady, _) = evaluate(&x).expect("solution is feasible");
    let (omega, angles, magnitudes) = unpack(&x);
    Ok(AcSolution {
        omega,
        angles,
        magnitudes,
        net,
        ic: ic_steady,
        residual,
        iterations,
    })
}

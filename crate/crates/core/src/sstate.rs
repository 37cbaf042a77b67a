//! Continuous-time LTI models with named signals, block interconnection,
//! poles, SISO zeros, DC gain and step responses.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::linalg::{
    char_poly, companion_roots, eig_qr, expm_scaled, solve_linear, CScalar, LinalgError, Mat, Poly,
};
use crate::serial::ExactSlice;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LtiError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("duplicate {kind} label `{label}`")]
    DuplicateLabel { kind: &'static str, label: String },
    #[error("unknown {kind} label `{label}`")]
    UnknownLabel { kind: &'static str, label: String },
    #[error("algebraic loop is singular")]
    SingularAlgebraicLoop,
    #[error("transfer channel {input} -> {output} is identically zero")]
    ZeroNumerator { input: String, output: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Linear time-invariant model `ẋ = Ax + Bu`, `y = Cx + Du`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lti {
    a: Mat,
    b: Mat,
    c: Mat,
    d: Mat,
    state_names: Vec<String>,
    input_names: Vec<String>,
    output_names: Vec<String>,
}

fn check_unique(kind: &'static str, labels: &[String]) -> Result<(), LtiError> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(LtiError::DuplicateLabel {
                kind,
                label: l.clone(),
            });
        }
    }
    Ok(())
}

fn shape_err(what: &str, got: (usize, usize), want: (usize, usize)) -> LtiError {
    LtiError::DimensionMismatch(format!(
        "{what} is {}x{}, expected {}x{}",
        got.0, got.1, want.0, want.1
    ))
}

/// Validated construction. `c` defaults to the identity (all states are
/// outputs, named after the states) and `d` defaults to zero.
pub fn make_lti(
    a: Mat,
    b: Mat,
    c: Option<Mat>,
    d: Option<Mat>,
    states: Vec<String>,
    inputs: Vec<String>,
    outputs: Option<Vec<String>>,
) -> Result<Lti, LtiError> {
    let n = a.rows();
    let c = c.unwrap_or_else(|| Mat::identity(n));
    let outputs = match outputs {
        Some(o) => o,
        None if c.rows() == n => states.clone(),
        None => {
            return Err(LtiError::DimensionMismatch(
                "output labels are required when c is not square".into(),
            ))
        }
    };
    let p = c.rows();
    let m = b.cols();
    let d = d.unwrap_or_else(|| Mat::zeros(p, m));
    Lti::new(a, b, c, d, states, inputs, outputs)
}

impl Lti {
    pub fn new(
        a: Mat,
        b: Mat,
        c: Mat,
        d: Mat,
        states: Vec<String>,
        inputs: Vec<String>,
        outputs: Vec<String>,
    ) -> Result<Self, LtiError> {
        let n = a.rows();
        if a.cols() != n {
            return Err(shape_err("a", (a.rows(), a.cols()), (n, n)));
        }
        let m = b.cols();
        let p = c.rows();
        if b.rows() != n {
            return Err(shape_err("b", (b.rows(), b.cols()), (n, m)));
        }
        if c.cols() != n {
            return Err(shape_err("c", (c.rows(), c.cols()), (p, n)));
        }
        if d.rows() != p || d.cols() != m {
            return Err(shape_err("d", (d.rows(), d.cols()), (p, m)));
        }
        for (kind, labels, want) in [
            ("state", &states, n),
            ("input", &inputs, m),
            ("output", &outputs, p),
        ] {
            if labels.len() != want {
                return Err(LtiError::DimensionMismatch(format!(
                    "{} {kind} labels for {want} {kind}s",
                    labels.len()
                )));
            }
            check_unique(kind, labels)?;
        }
        for (name, mat) in [("a", &a), ("b", &b), ("c", &c), ("d", &d)] {
            if !mat.is_finite() {
                return Err(LtiError::InvalidArgument(format!("{name} has non-finite entries")));
            }
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            state_names: states,
            input_names: inputs,
            output_names: outputs,
        })
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }
    pub fn b(&self) -> &Mat {
        &self.b
    }
    pub fn c(&self) -> &Mat {
        &self.c
    }
    pub fn d(&self) -> &Mat {
        &self.d
    }
    pub fn n(&self) -> usize {
        self.a.rows()
    }
    pub fn m(&self) -> usize {
        self.b.cols()
    }
    pub fn p(&self) -> usize {
        self.c.rows()
    }
    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }
    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }
    pub fn output_names(&self) -> &[String] {
        &self.output_names
    }

    pub fn state_index(&self, label: &str) -> Result<usize, LtiError> {
        find("state", &self.state_names, label)
    }
    pub fn input_index(&self, label: &str) -> Result<usize, LtiError> {
        find("input", &self.input_names, label)
    }
    pub fn output_index(&self, label: &str) -> Result<usize, LtiError> {
        find("output", &self.output_names, label)
    }

    /// Copy with every label rewritten as `prefix.label`.
    pub fn prefixed(&self, prefix: &str) -> Lti {
        let pre = |v: &[String]| v.iter().map(|l| format!("{prefix}.{l}")).collect();
        Lti {
            state_names: pre(&self.state_names),
            input_names: pre(&self.input_names),
            output_names: pre(&self.output_names),
            ..self.clone()
        }
    }

    /// Copy keeping only the listed inputs, in the given order.
    pub fn select_inputs(&self, labels: &[&str]) -> Result<Lti, LtiError> {
        let idx = labels
            .iter()
            .map(|l| self.input_index(l))
            .collect::<Result<Vec<_>, _>>()?;
        Lti::new(
            self.a.clone(),
            self.b.select_cols(&idx),
            self.c.clone(),
            self.d.select_cols(&idx),
            self.state_names.clone(),
            idx.iter().map(|&i| self.input_names[i].clone()).collect(),
            self.output_names.clone(),
        )
    }

    /// Copy keeping only the listed outputs, in the given order.
    pub fn select_outputs(&self, labels: &[&str]) -> Result<Lti, LtiError> {
        let idx = labels
            .iter()
            .map(|l| self.output_index(l))
            .collect::<Result<Vec<_>, _>>()?;
        Lti::new(
            self.a.clone(),
            self.b.clone(),
            self.c.select_rows(&idx),
            self.d.select_rows(&idx),
            self.state_names.clone(),
            self.input_names.clone(),
            idx.iter().map(|&i| self.output_names[i].clone()).collect(),
        )
    }

    /// Closed loop under state feedback `u = F x + v`; inputs keep their labels.
    pub fn with_state_feedback(&self, f: &Mat) -> Result<Lti, LtiError> {
        if f.rows() != self.m() || f.cols() != self.n() {
            return Err(shape_err("gain", (f.rows(), f.cols()), (self.m(), self.n())));
        }
        Lti::new(
            self.a.add(&self.b.matmul(f)),
            self.b.clone(),
            self.c.add(&self.d.matmul(f)),
            self.d.clone(),
            self.state_names.clone(),
            self.input_names.clone(),
            self.output_names.clone(),
        )
    }
}

fn find(kind: &'static str, labels: &[String], label: &str) -> Result<usize, LtiError> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| LtiError::UnknownLabel {
            kind,
            label: label.to_string(),
        })
}

/// Connection from a block output to a block input, scaled by `gain`.
/// Several wires into one input are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct Wire {
    pub from: String,
    pub to: String,
    pub gain: f64,
}

impl Wire {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self::scaled(from, to, 1.0)
    }

    pub fn scaled(from: impl Into<String>, to: impl Into<String>, gain: f64) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            gain,
        }
    }
}

/// Joins blocks into one model.
///
/// With `external_inputs = None` every unwired input is exposed; with a list,
/// exactly those inputs are exposed (in list order) and other unwired inputs
/// are held at zero. `external_outputs = None` keeps every block output.
/// Instantaneous loops through `d` are eliminated with `(I − W D)⁻¹`.
pub fn interconnect(
    blocks: &[Lti],
    wires: &[Wire],
    external_inputs: Option<&[String]>,
    external_outputs: Option<&[String]>,
) -> Result<Lti, LtiError> {
    let parts_a: Vec<&Mat> = blocks.iter().map(|b| &b.a).collect();
    let parts_b: Vec<&Mat> = blocks.iter().map(|b| &b.b).collect();
    let parts_c: Vec<&Mat> = blocks.iter().map(|b| &b.c).collect();
    let parts_d: Vec<&Mat> = blocks.iter().map(|b| &b.d).collect();
    let a = Mat::block_diag(&parts_a);
    let b = Mat::block_diag(&parts_b);
    let c = Mat::block_diag(&parts_c);
    let d = Mat::block_diag(&parts_d);
    let concat = |f: fn(&Lti) -> &Vec<String>| -> Vec<String> {
        blocks.iter().flat_map(|b| f(b).iter().cloned()).collect()
    };
    let states = concat(|b| &b.state_names);
    let inputs = concat(|b| &b.input_names);
    let outputs = concat(|b| &b.output_names);
    check_unique("state", &states)?;
    check_unique("input", &inputs)?;
    check_unique("output", &outputs)?;

    let in_idx: HashMap<&str, usize> = inputs.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let out_idx: HashMap<&str, usize> = outputs.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let (mt, pt) = (inputs.len(), outputs.len());

    let mut w = Mat::zeros(mt, pt);
    let mut wired = vec![false; mt];
    for wire in wires {
        let &j = out_idx.get(wire.from.as_str()).ok_or_else(|| LtiError::UnknownLabel {
            kind: "output",
            label: wire.from.clone(),
        })?;
        let &i = in_idx.get(wire.to.as_str()).ok_or_else(|| LtiError::UnknownLabel {
            kind: "input",
            label: wire.to.clone(),
        })?;
        w[(i, j)] += wire.gain;
        wired[i] = true;
    }

    let ext: Vec<usize> = match external_inputs {
        None => (0..mt).filter(|&i| !wired[i]).collect(),
        Some(list) => list
            .iter()
            .map(|l| {
                in_idx.get(l.as_str()).copied().ok_or_else(|| LtiError::UnknownLabel {
                    kind: "input",
                    label: l.clone(),
                })
            })
            .collect::<Result<_, _>>()?,
    };
    let mut e = Mat::zeros(mt, ext.len());
    for (k, &i) in ext.iter().enumerate() {
        e[(i, k)] = 1.0;
    }

    // u = W y + E v and y = C x + D u give u = L (W C x + E v), L = (I − W D)⁻¹.
    let n = a.rows();
    let rhs = Mat::hstack(&[&w.matmul(&c), &e]);
    let wd = w.matmul(&d);
    let sol = match neumann_solve(&wd, &rhs) {
        Some(sol) => sol,
        None => {
            let loop_m = Mat::identity(mt).sub(&wd);
            solve_linear(&loop_m, &rhs).map_err(|err| match err {
                LinalgError::Singular { .. } => LtiError::SingularAlgebraicLoop,
                other => other.into(),
            })?
        }
    };
    let (wc, le) = (sol.block(0, 0, mt, n), sol.block(0, n, mt, ext.len()));
    let a_cl = a.add(&b.matmul(&wc));
    let b_cl = b.matmul(&le);
    let c_cl = c.add(&d.matmul(&wc));
    let d_cl = d.matmul(&le);

    let sys = Lti::new(
        a_cl,
        b_cl,
        c_cl,
        d_cl,
        states,
        ext.iter().map(|&i| inputs[i].clone()).collect(),
        outputs,
    )?;
    match external_outputs {
        None => Ok(sys),
        Some(list) => {
            let refs: Vec<&str> = list.iter().map(|s| s.as_str()).collect();
            sys.select_outputs(&refs)
        }
    }
}

/// `(I − K)⁻¹ R` as the finite series `Σ Kⁱ R` when `K` is nilpotent, which
/// is the case for feedthrough chains without loops. Exact zeros stay zero.
/// Returns `None` if the series does not terminate within `K`'s order.
fn neumann_solve(k: &Mat, r: &Mat) -> Option<Mat> {
    let mut power = k.clone();
    let mut term = r.clone();
    let mut acc = r.clone();
    for _ in 0..=k.rows() {
        if power.max_abs() == 0.0 {
            return Some(acc);
        }
        term = k.matmul(&term);
        acc = acc.add(&term);
        power = k.matmul(&power);
    }
    None
}

pub fn poles(m: &Lti) -> Result<Vec<CScalar>, LtiError> {
    Ok(eig_qr(&m.a)?)
}

/// Relative size below which a leading numerator coefficient is treated as
/// cancellation noise.
const NUMERATOR_CANCEL_TOL: f64 = 1e-9;

/// Numerator polynomial `c·adj(sI − a)·b + d·det(sI − a)` of one channel.
pub fn numerator(m: &Lti, input: &str, output: &str) -> Result<Poly, LtiError> {
    let j = m.input_index(input)?;
    let i = m.output_index(output)?;
    let n = m.n();
    let (p, adj) = char_poly(&m.a)?;
    let crow = m.c.row(i);
    let bcol = m.b.col(j);
    let dij = m.d[(i, j)];
    let pc = p.coeffs();
    let mut coeffs = vec![0.0; n + 1];
    let mut bounds = vec![0.0; n + 1];
    coeffs[0] = dij * pc[0];
    bounds[0] = (dij * pc[0]).abs();
    for k in 1..=n {
        let mk = &adj[k - 1];
        let mut s = dij * pc[k];
        let mut bound = s.abs();
        for (r, &cr) in crow.iter().enumerate() {
            if cr == 0.0 {
                continue;
            }
            for (q, &bq) in bcol.iter().enumerate() {
                let t = cr * mk[(r, q)] * bq;
                s += t;
                bound += t.abs();
            }
        }
        coeffs[k] = s;
        bounds[k] = bound;
    }
    let lead = (0..=n).find(|&k| coeffs[k].abs() > NUMERATOR_CANCEL_TOL * bounds[k]);
    match lead {
        None => Err(LtiError::ZeroNumerator {
            input: input.to_string(),
            output: output.to_string(),
        }),
        Some(k) => Ok(Poly::new(coeffs[k..].to_vec())),
    }
}

/// Finite zeros of one SISO channel: the raw numerator roots, without
/// cancellation against poles.
pub fn zeros_siso(m: &Lti, input: &str, output: &str) -> Result<Vec<CScalar>, LtiError> {
    let num = numerator(m, input, output)?;
    let mut z = companion_roots(&num)?;
    crate::linalg::sort_desc(&mut z);
    Ok(z)
}

/// `−c a⁻¹ b + d`.
pub fn dc_gain(m: &Lti) -> Result<Mat, LtiError> {
    let x = solve_linear(&m.a, &m.b)?;
    Ok(m.d.sub(&m.c.matmul(&x)))
}

/// Sampled response on a uniform grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

/// Longest trace `step_response` will produce.
pub const MAX_STEP_SAMPLES: usize = 2_000_000;

/// Default sample time: `min(0.1 / max|λ|, t_final / 1000)`.
pub fn default_dt(m: &Lti, t_final: f64) -> Result<f64, LtiError> {
    let rho = poles(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let by_span = t_final / 1000.0;
    Ok(if rho > 0.0 { (0.1 / rho).min(by_span) } else { by_span })
}

/// Response to a unit step on `input`, by exact zero-order-hold
/// discretization: `Φ = e^{a·dt}`, `Γ = ∫₀^{dt} e^{aτ} dτ · b`, both taken
/// from the exponential of the augmented matrix `[[a, b], [0, 0]]·dt`.
pub fn step_response(
    m: &Lti,
    input: &str,
    t_final: f64,
    dt: Option<f64>,
    x0: Option<&[f64]>,
) -> Result<StepTrace, LtiError> {
    let j = m.input_index(input)?;
    let n = m.n();
    let dt = match dt {
        Some(dt) => dt,
        None => default_dt(m, t_final)?,
    };
    if !(dt > 0.0 && dt.is_finite() && t_final.is_finite() && t_final >= dt) {
        return Err(LtiError::InvalidArgument(format!(
            "need 0 < dt <= t_final, got dt = {dt}, t_final = {t_final}"
        )));
    }
    let mut x = match x0 {
        Some(v) if v.len() != n => {
            return Err(LtiError::DimensionMismatch(format!(
                "initial state has {} entries, model has {n} states",
                v.len()
            )))
        }
        Some(v) => v.to_vec(),
        None => vec![0.0; n],
    };
    let steps = (t_final / dt + 1e-9).floor() as usize;
    if steps > MAX_STEP_SAMPLES {
        return Err(LtiError::InvalidArgument(format!(
            "dt = {dt:e} over t_final = {t_final} gives {steps} samples (limit {MAX_STEP_SAMPLES}); pass a larger dt"
        )));
    }

    let mut aug = Mat::zeros(n + 1, n + 1);
    aug.set_block(0, 0, &m.a);
    aug.set_col(n, &{
        let mut col = m.b.col(j);
        col.push(0.0);
        col
    });
    let e = expm_scaled(&aug, dt)?;
    let phi = e.block(0, 0, n, n);
    let gamma = e.block(0, n, n, 1).into_vec();
    let dcol = m.d.col(j);

    let output = |x: &[f64], u: f64| -> Vec<f64> {
        m.c.matvec(x)
            .into_iter()
            .zip(&dcol)
            .map(|(y, d)| y + d * u)
            .collect()
    };

    let mut trace = StepTrace {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        outputs: Vec::with_capacity(steps + 1),
    };
    // The step is applied from t = 0⁺; the t = 0 sample shows the initial condition.
    trace.times.push(0.0);
    trace.outputs.push(output(&x, 0.0));
    trace.states.push(x.clone());
    // With `a` invertible, step the deviation from `x* = −a⁻¹b` instead, so
    // rounding in `Φ` scales with the transient rather than with `x*`.
    let equilibrium = solve_linear(&m.a, &Mat::column(&m.b.col(j)))
        .ok()
        .map(|s| s.into_vec().into_iter().map(|v| -v).collect::<Vec<f64>>())
        .filter(|s| s.iter().all(|v| v.is_finite()));
    let mut dev = equilibrium
        .as_ref()
        .map(|s| x.iter().zip(s).map(|(xi, si)| xi - si).collect::<Vec<f64>>());
    for k in 1..=steps {
        let next = match (&equilibrium, dev.as_mut()) {
            (Some(s), Some(d)) => {
                *d = phi.matvec(d);
                d.iter().zip(s).map(|(di, si)| di + si).collect()
            }
            _ => {
                let mut next = phi.matvec(&x);
                for (xi, g) in next.iter_mut().zip(&gamma) {
                    *xi += g;
                }
                next
            }
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::Overflow.into());
        }
        x = next;
        trace.times.push(k as f64 * dt);
        trace.outputs.push(output(&x, 1.0));
        trace.states.push(x.clone());
    }
    Ok(trace)
}

#[derive(Serialize)]
struct ModelOut<'a> {
    n: usize,
    m: usize,
    p: usize,
    a: ExactSlice<'a>,
    b: ExactSlice<'a>,
    c: ExactSlice<'a>,
    d: ExactSlice<'a>,
    state_names: &'a [String],
    input_names: &'a [String],
    output_names: &'a [String],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelIn {
    n: usize,
    m: usize,
    p: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    state_names: Vec<String>,
    input_names: Vec<String>,
    output_names: Vec<String>,
}

impl Lti {
    /// JSON document with `n, m, p`, row-major `a, b, c, d` and the label
    /// lists; floats carry 17 significant digits so the round trip is exact.
    pub fn to_json(&self) -> String {
        let doc = ModelOut {
            n: self.n(),
            m: self.m(),
            p: self.p(),
            a: ExactSlice(self.a.as_slice()),
            b: ExactSlice(self.b.as_slice()),
            c: ExactSlice(self.c.as_slice()),
            d: ExactSlice(self.d.as_slice()),
            state_names: &self.state_names,
            input_names: &self.input_names,
            output_names: &self.output_names,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Lti, LtiError> {
        let doc: ModelIn = serde_json::from_str(text).map_err(|e| LtiError::Format(e.to_string()))?;
        let mat = |name: &str, r: usize, c: usize, data: Vec<f64>| {
            Mat::new(r, c, data).map_err(|e| LtiError::Format(format!("field `{name}`: {e}")))
        };
        Lti::new(
            mat("a", doc.n, doc.n, doc.a)?,
            mat("b", doc.n, doc.m, doc.b)?,
            mat("c", doc.p, doc.n, doc.c)?,
            mat("d", doc.p, doc.m, doc.d)?,
            doc.state_names,
            doc.input_names,
            doc.output_names,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(prefix: &str, k: usize) -> Vec<String> {
        (0..k).map(|i| format!("{prefix}{i}")).collect()
    }

    fn first_order(a: f64, b: f64, c: f64, d: f64, tag: &str) -> Lti {
        Lti::new(
            Mat::from_rows(&[&[a]]),
            Mat::from_rows(&[&[b]]),
            Mat::from_rows(&[&[c]]),
            Mat::from_rows(&[&[d]]),
            vec![format!("{tag}.x")],
            vec![format!("{tag}.u")],
            vec![format!("{tag}.y")],
        )
        .unwrap()
    }

    #[test]
    fn defaults_fill_c_and_d() {
        let m = make_lti(
            Mat::from_rows(&[&[-1.0]]),
            Mat::from_rows(&[&[1.0]]),
            None,
            None,
            vec!["x".into()],
            vec!["u".into()],
            None,
        )
        .unwrap();
        assert_eq!(m.c(), &Mat::identity(1));
        assert_eq!(m.d(), &Mat::zeros(1, 1));
        assert_eq!(m.output_names(), &["x".to_string()]);
    }

    #[test]
    fn dimension_and_label_errors() {
        let err = make_lti(
            Mat::zeros(2, 2),
            Mat::zeros(3, 1),
            None,
            None,
            labels("x", 2),
            labels("u", 1),
            None,
        );
        assert!(matches!(err, Err(LtiError::DimensionMismatch(_))));
        let err = make_lti(
            Mat::zeros(2, 2),
            Mat::zeros(2, 1),
            None,
            None,
            vec!["x".into(), "x".into()],
            labels("u", 1),
            None,
        );
        assert!(matches!(err, Err(LtiError::DuplicateLabel { kind: "state", .. })));
    }

    #[test]
    fn integrators_in_series() {
        let i1 = first_order(0.0, 1.0, 1.0, 0.0, "i1");
        let i2 = first_order(0.0, 1.0, 1.0, 0.0, "i2");
        let s = interconnect(&[i1, i2], &[Wire::new("i1.y", "i2.u")], None, None).unwrap();
        assert_eq!(s.input_names(), &["i1.u".to_string()]);
        let p = poles(&s).unwrap();
        assert!(p.iter().all(|z| z.norm() < 1e-12));
        // Position output of the double integrator has no finite zeros.
        assert!(zeros_siso(&s, "i1.u", "i2.y").unwrap().is_empty());
    }

    #[test]
    fn unity_negative_feedback() {
        let i1 = first_order(0.0, 1.0, 1.0, 0.0, "g");
        let s = interconnect(&[i1], &[Wire::scaled("g.y", "g.u", -1.0)], Some(&["g.u".into()]), None)
            .unwrap();
        let p = poles(&s).unwrap();
        assert!((p[0] - CScalar::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn algebraic_loop_is_solved() {
        // Static gain 0.5 in a positive loop with itself: y = 0.5 (y + v) → y = v.
        let k = Lti::new(
            Mat::zeros(0, 0),
            Mat::zeros(0, 1),
            Mat::zeros(1, 0),
            Mat::from_rows(&[&[0.5]]),
            vec![],
            vec!["k.u".into()],
            vec!["k.y".into()],
        )
        .unwrap();
        let s = interconnect(&[k.clone()], &[Wire::new("k.y", "k.u")], Some(&["k.u".into()]), None)
            .unwrap();
        assert!((s.d()[(0, 0)] - 1.0).abs() < 1e-15);
        let unity = Lti { d: Mat::from_rows(&[&[1.0]]), ..k };
        assert_eq!(
            interconnect(&[unity], &[Wire::new("k.y", "k.u")], None, None),
            Err(LtiError::SingularAlgebraicLoop)
        );
    }

    #[test]
    fn unknown_wire_label() {
        let g = first_order(-1.0, 1.0, 1.0, 0.0, "g");
        assert!(matches!(
            interconnect(&[g], &[Wire::new("g.nope", "g.u")], None, None),
            Err(LtiError::UnknownLabel { kind: "output", .. })
        ));
    }

    #[test]
    fn zeros_of_lead_lag() {
        let g = first_order(-2.0, 1.0, -1.0, 1.0, "g");
        let z = zeros_siso(&g, "g.u", "g.y").unwrap();
        assert_eq!(z.len(), 1);
        assert!((z[0] - CScalar::new(-1.0, 0.0)).norm() < 1e-14);
        let h = first_order(-1.0, 1.0, 1.0, 0.0, "h");
        assert!(zeros_siso(&h, "h.u", "h.y").unwrap().is_empty());
        let z0 = first_order(-1.0, 0.0, 1.0, 0.0, "z");
        assert!(matches!(zeros_siso(&z0, "z.u", "z.y"), Err(LtiError::ZeroNumerator { .. })));
    }

    #[test]
    fn dc_gain_cases() {
        assert_eq!(dc_gain(&first_order(-1.0, 1.0, 1.0, 0.0, "g")).unwrap()[(0, 0)], 1.0);
        assert_eq!(dc_gain(&first_order(-2.0, 4.0, 1.0, 0.0, "g")).unwrap()[(0, 0)], 2.0);
        assert!(matches!(
            dc_gain(&first_order(0.0, 1.0, 1.0, 0.0, "g")),
            Err(LtiError::Linalg(LinalgError::Singular { .. }))
        ));
    }

    #[test]
    fn first_order_step() {
        let g = first_order(-1.0, 1.0, 1.0, 0.0, "g");
        let tr = step_response(&g, "g.u", 1.0, Some(0.01), None).unwrap();
        assert_eq!(tr.times.len(), 101);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
        let y = tr.outputs.last().unwrap()[0];
        assert!((y - (1.0 - (-1.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn initial_condition_is_first_sample() {
        let g = first_order(-1.0, 1.0, 3.0, 0.0, "g");
        let tr = step_response(&g, "g.u", 0.1, Some(0.05), Some(&[2.0])).unwrap();
        assert_eq!(tr.outputs[0], vec![6.0]);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let g = first_order(-1.0 / 3.0, 0.1, 1e-300, -0.0, "g");
        let back = Lti::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.d()[(0, 0)].to_bits(), (-0.0f64).to_bits());
    }
}

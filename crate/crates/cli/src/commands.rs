use std::path::Path;
use std::time::Instant;

use mgstab::linalg::CScalar;
use mgstab::network::{assemble, Scope};
use mgstab::sstate::{poles, step_response, zeros_siso, Lti};
use mgstab::stability::{
    detect_crossing, droop_sweep, eigen_report, place_poles, propose_targets, CrossingDirection,
    CrossingKind, EigenReport, PLACEMENT_TOLERANCE,
};

use crate::error::{input, CliError};
use crate::files::{
    csv_text, manifest_path, num, read_config, read_model, write_text, GainsIn, GainsOut, Manifest,
    TargetsIn,
};

struct Run<'a> {
    command: &'static str,
    args: &'a [String],
    config: Option<&'a Path>,
    model: Option<&'a Path>,
    started: Instant,
}

impl<'a> Run<'a> {
    fn new(command: &'static str, args: &'a [String]) -> Self {
        Run {
            command,
            args,
            config: None,
            model: None,
            started: Instant::now(),
        }
    }

    /// Writes the manifest next to `main`.
    fn finish(&self, main: &Path, outputs: Vec<String>) -> Result<(), CliError> {
        let m = Manifest {
            command: self.command.to_string(),
            arguments: self.args.to_vec(),
            config: self.config.map(|p| p.display().to_string()),
            model: self.model.map(|p| p.display().to_string()),
            outputs,
            tool_version: env!("CARGO_PKG_VERSION"),
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        write_text(&manifest_path(main), &(text + "\n"))
    }
}

fn summary(r: &EigenReport) -> String {
    format!(
        "spectral abscissa {:.6e}: {} ({} of {} modes with Re >= 0)",
        r.spectral_abscissa,
        if r.stable { "stable" } else { "unstable" },
        r.unstable_count(),
        r.entries.len()
    )
}

fn eig_rows(r: &EigenReport) -> Vec<Vec<String>> {
    r.entries
        .iter()
        .enumerate()
        .map(|(k, e)| {
            vec![
                k.to_string(),
                num(e.lambda.re),
                num(e.lambda.im),
                num(e.damping),
                num(e.freq_hz),
            ]
        })
        .collect()
}

const EIG_HEADER: [&str; 5] = ["index", "re", "im", "damping", "freq_hz"];

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

pub fn model(args: &[String], config: &Path, scope: &Scope, out: &Path) -> Result<(), CliError> {
    let mut run = Run::new("model", args);
    run.config = Some(config);
    let cfg = read_config(config)?;
    let m = assemble(&cfg, scope)?;
    write_text(out, &m.to_json())?;
    let report = eigen_report(&m)?;
    println!("scope {scope}: n = {}, m = {}, p = {}", m.n(), m.m(), m.p());
    println!("{}", summary(&report));
    run.finish(out, vec![out.display().to_string()])
}

pub fn eig(args: &[String], model: &Path, out: &Path) -> Result<(), CliError> {
    let mut run = Run::new("eig", args);
    run.model = Some(model);
    let m = read_model(model)?;
    let report = eigen_report(&m)?;
    write_text(out, &csv_text(&header(&EIG_HEADER), &eig_rows(&report))?)?;
    println!("{}", summary(&report));
    run.finish(out, vec![out.display().to_string()])
}

pub fn pz(args: &[String], model: &Path, input_label: &str, output: &str, out: &Path) -> Result<(), CliError> {
    let mut run = Run::new("pz", args);
    run.model = Some(model);
    let m = read_model(model)?;
    let p = poles(&m)?;
    let z = zeros_siso(&m, input_label, output)?;
    let mut rows = Vec::new();
    for (kind, values) in [("pole", &p), ("zero", &z)] {
        for v in values.iter() {
            rows.push(vec![kind.to_string(), num(v.re), num(v.im)]);
        }
    }
    write_text(out, &csv_text(&header(&["kind", "re", "im"]), &rows)?)?;
    let rhp_zeros = z.iter().filter(|v| v.re >= 0.0).count();
    println!(
        "{input_label} -> {output}: {} poles, {} zeros ({rhp_zeros} with Re >= 0)",
        p.len(),
        z.len()
    );
    run.finish(out, vec![out.display().to_string()])
}

pub fn sweep(
    args: &[String],
    config: &Path,
    scope: &Scope,
    (from, to, step): (f64, f64, f64),
    out: &Path,
    full_dir: Option<&Path>,
) -> Result<(), CliError> {
    let mut run = Run::new("sweep", args);
    run.config = Some(config);
    let cfg = read_config(config)?;
    let result = droop_sweep(&cfg, scope, from, to, step)?;
    let any_failed = result.points.iter().any(|p| p.error.is_some());
    let mut cols = vec!["m_dc", "spectral_abscissa", "unstable_count", "rightmost_re", "rightmost_im"];
    if any_failed {
        cols.push("errors");
    }
    let mut rows = Vec::new();
    let mut outputs = vec![out.display().to_string()];
    for (k, p) in result.points.iter().enumerate() {
        let mut row = vec![num(p.m_dc)];
        match p.rightmost() {
            Some(r) => {
                let unstable = p.eigenvalues.iter().filter(|l| l.re >= 0.0).count();
                row.extend([num(p.spectral_abscissa), unstable.to_string(), num(r.re), num(r.im)]);
            }
            None => row.extend([String::new(), String::new(), String::new(), String::new()]),
        }
        if any_failed {
            row.push(p.error.clone().unwrap_or_default());
        }
        rows.push(row);
        if let (Some(dir), None) = (full_dir, &p.error) {
            let report = mgstab::stability::report_from_eigenvalues(p.eigenvalues.clone());
            let path = dir.join(format!("point_{k:03}.csv"));
            write_text(&path, &csv_text(&header(&EIG_HEADER), &eig_rows(&report))?)?;
            outputs.push(path.display().to_string());
        }
    }
    write_text(out, &csv_text(&header(&cols), &rows)?)?;

    let ok = result.points.iter().filter(|p| p.error.is_none()).count();
    println!("{} points, {} solved", result.points.len(), ok);
    let crossings = detect_crossing(&result);
    if crossings.is_empty() {
        println!("no stability crossing in range");
    }
    for c in &crossings {
        let (a, b) = (&result.points[c.from_index], &result.points[c.to_index]);
        println!(
            "crossing between points {} and {} (m_dc {} .. {}): {} {}, rightmost {} {:+}i",
            c.from_index,
            c.to_index,
            num(a.m_dc),
            num(b.m_dc),
            match c.kind {
                CrossingKind::Hopf => "hopf",
                CrossingKind::Real => "real-crossing",
            },
            match c.direction {
                CrossingDirection::Destabilizing => "destabilizing",
                CrossingDirection::Stabilizing => "stabilizing",
            },
            num(c.rightmost.re),
            c.rightmost.im,
        );
    }
    run.finish(out, outputs)?;
    if ok == 0 {
        return Err(CliError::Numeric("no sweep point could be solved".into()));
    }
    Ok(())
}

pub fn place(args: &[String], model: &Path, targets: &str, zeta: f64, out: &Path) -> Result<(), CliError> {
    let mut run = Run::new("place", args);
    run.model = Some(model);
    let m = read_model(model)?;
    let targets: Vec<CScalar> = if targets == "auto" {
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(input(format!("--zeta must lie in (0, 1), got {zeta}")));
        }
        propose_targets(&eigen_report(&m)?, zeta)
    } else {
        TargetsIn::read(Path::new(targets))?
    };
    let p = place_poles(m.a(), m.b(), &targets)?;
    let pass = p.max_rel_error <= PLACEMENT_TOLERANCE;
    let gains = GainsOut::new(
        &m,
        &p.f,
        &p.targets,
        &p.achieved,
        p.max_rel_error,
        pass,
        p.conditioning,
        p.theorem_residual,
    );
    let text = serde_json::to_string_pretty(&gains).expect("gains serialize");
    write_text(out, &(text + "\n"))?;
    println!("max relative pole error {}", num(p.max_rel_error));
    println!(
        "placement within {:.0}%: {}",
        PLACEMENT_TOLERANCE * 100.0,
        if pass { "pass" } else { "fail" }
    );
    run.finish(out, vec![out.display().to_string()])
}

/// The model restricted to the inputs the gain drives, under `u = F x + v`.
fn closed_loop(m: &Lti, gains: &GainsIn) -> Result<Lti, CliError> {
    let f = gains.matrix()?;
    let open = match &gains.input_labels {
        Some(labels) => {
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            m.select_inputs(&refs)?
        }
        None => m.clone(),
    };
    if f.rows() != open.m() || f.cols() != open.n() {
        return Err(input(format!(
            "gain is {}x{} but the model needs {}x{} (inputs x states)",
            f.rows(),
            f.cols(),
            open.m(),
            open.n()
        )));
    }
    if let Some(states) = &gains.state_labels {
        if states.as_slice() != open.state_names() {
            return Err(input("gain state labels do not match the model"));
        }
    }
    Ok(open.with_state_feedback(&f)?)
}

#[allow(clippy::too_many_arguments)]
pub fn step(
    args: &[String],
    model: &Path,
    gains: Option<&Path>,
    input_label: &str,
    tfinal: f64,
    dt: Option<f64>,
    out: &Path,
) -> Result<(), CliError> {
    let mut run = Run::new("step", args);
    run.model = Some(model);
    let m = read_model(model)?;
    let sys = match gains {
        Some(g) => closed_loop(&m, &GainsIn::read(g)?)?,
        None => m,
    };
    let trace = step_response(&sys, input_label, tfinal, dt, None)?;
    let mut cols = vec!["t".to_string()];
    cols.extend(sys.state_names().iter().cloned());
    let rows: Vec<Vec<String>> = trace
        .times
        .iter()
        .zip(&trace.states)
        .map(|(t, x)| std::iter::once(num(*t)).chain(x.iter().map(|v| num(*v))).collect())
        .collect();
    write_text(out, &csv_text(&cols, &rows)?)?;
    let last = trace.states.last().map_or(0.0, |x| x.iter().fold(0.0, |a: f64, v| a.max(v.abs())));
    println!("{} samples, largest final |x| {}", trace.times.len(), num(last));
    run.finish(out, vec![out.display().to_string()])
}

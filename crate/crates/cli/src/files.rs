//! Reading and writing the config, model, gains, CSV and manifest files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mgstab::linalg::{CScalar, Mat};
use mgstab::network::GridConfig;
use mgstab::serial::{float17, Exact, ExactSlice};
use mgstab::sstate::Lti;

use crate::error::{input, CliError};

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn read_config(path: &Path) -> Result<GridConfig, CliError> {
    let cfg = GridConfig::from_json(&read_text(path)?)
        .map_err(|e| input(format!("{}: {e}", path.display())))?;
    cfg.validate()
        .map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

pub fn read_model(path: &Path) -> Result<Lti, CliError> {
    Lti::from_json(&read_text(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// CSV text with LF line endings; fields are already rendered.
pub fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Numeric(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Numeric(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn num(x: f64) -> String {
    float17(x)
}

/// Per-run record written next to the outputs.
#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub config: Option<String>,
    pub model: Option<String>,
    pub outputs: Vec<String>,
    pub tool_version: &'static str,
    pub wall_time_s: f64,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn pairs(values: &[CScalar]) -> Vec<[Exact; 2]> {
    values.iter().map(|z| [Exact(z.re), Exact(z.im)]).collect()
}

/// Gains file as written by `place`.
#[derive(Serialize)]
pub struct GainsOut<'a> {
    pub state_labels: &'a [String],
    pub input_labels: &'a [String],
    pub f: Vec<ExactSlice<'a>>,
    pub targets: Vec<[Exact; 2]>,
    pub achieved: Vec<[Exact; 2]>,
    pub max_rel_error: Exact,
    pub within_tolerance: bool,
    pub conditioning: Exact,
    pub theorem_residual: Exact,
}

impl<'a> GainsOut<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        model: &'a Lti,
        f: &'a Mat,
        targets: &[CScalar],
        achieved: &[CScalar],
        max_rel_error: f64,
        within_tolerance: bool,
        conditioning: f64,
        theorem_residual: f64,
    ) -> Self {
        GainsOut {
            state_labels: model.state_names(),
            input_labels: model.input_names(),
            f: (0..f.rows()).map(|i| ExactSlice(f.row(i))).collect(),
            targets: pairs(targets),
            achieved: pairs(achieved),
            max_rel_error: Exact(max_rel_error),
            within_tolerance,
            conditioning: Exact(conditioning),
            theorem_residual: Exact(theorem_residual),
        }
    }
}

/// Gains file as read by `step`. Only `f` is required; `input_labels`
/// picks the model inputs the gain drives (all inputs if absent).
#[derive(Deserialize)]
pub struct GainsIn {
    pub f: Vec<Vec<f64>>,
    #[serde(default)]
    pub input_labels: Option<Vec<String>>,
    #[serde(default)]
    pub state_labels: Option<Vec<String>>,
}

impl GainsIn {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        serde_json::from_str(&read_text(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
    }

    pub fn matrix(&self) -> Result<Mat, CliError> {
        let rows = self.f.len();
        let cols = self.f.first().map_or(0, |r| r.len());
        if self.f.iter().any(|r| r.len() != cols) {
            return Err(input("gains: rows of `f` differ in length"));
        }
        Mat::new(rows, cols, self.f.concat()).map_err(|e| input(format!("gains: {e}")))
    }
}

/// Target file: `{"targets": [[re, im], ...]}`.
#[derive(Deserialize)]
pub struct TargetsIn {
    pub targets: Vec<[f64; 2]>,
}

impl TargetsIn {
    pub fn read(path: &Path) -> Result<Vec<CScalar>, CliError> {
        let t: TargetsIn = serde_json::from_str(&read_text(path)?)
            .map_err(|e| input(format!("{}: {e}", path.display())))?;
        Ok(t.targets.iter().map(|p| CScalar::new(p[0], p[1])).collect())
    }
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mgstab::linalg::Mat;
use mgstab::sstate::{make_lti, Lti};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgstab")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn text(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_model(dir: &Path, name: &str, m: &Lti) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, m.to_json()).unwrap();
    path
}

fn labels(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn first_order(dir: &Path) -> PathBuf {
    let m = make_lti(
        Mat::from_rows(&[&[-1.0]]),
        Mat::from_rows(&[&[1.0]]),
        None,
        None,
        labels(&["x"]),
        labels(&["u"]),
        None,
    )
    .unwrap();
    write_model(dir, "first.json", &m)
}

fn double_integrator(dir: &Path) -> PathBuf {
    let m = make_lti(
        Mat::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]),
        Mat::from_rows(&[&[0.0], &[1.0]]),
        None,
        None,
        labels(&["pos", "vel"]),
        labels(&["u"]),
        None,
    )
    .unwrap();
    write_model(dir, "dint.json", &m)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    text(path)
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn model_dc_scope_writes_model_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dc.json");
    let o = run(&["model", "--config", p(&fixture("paper.json")), "--scope", "dc", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = Lti::from_json(&text(&out)).unwrap();
    assert_eq!(m.n(), 20);
    let manifest: serde_json::Value =
        serde_json::from_str(&text(&dir.path().join("dc.json.manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "model");
    assert!(manifest["tool_version"].is_string());
    assert!(manifest["wall_time_s"].is_number());
    assert!(String::from_utf8_lossy(&o.stdout).contains("n = 20"));
}

#[test]
fn converter_scope_gives_six_states() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dc1.json");
    let o = run(&["model", "--config", p(&fixture("paper.json")), "--scope", "converter:dc1", "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    let m = Lti::from_json(&text(&out)).unwrap();
    assert_eq!((m.n(), m.m()), (6, 2));
}

#[test]
fn missing_bus_is_an_input_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(&text(&fixture("paper.json"))).unwrap();
    cfg["dc_converters"][1]["bus"] = "nowhere".into();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, cfg.to_string()).unwrap();
    let o = run(&["model", "--config", p(&bad), "--scope", "dc", "--out", p(&dir.path().join("m.json"))]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("dc_converters[1].bus"), "{err}");
    assert!(err.contains("nowhere"), "{err}");
}

#[test]
fn unreadable_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["eig", "--model", p(&dir.path().join("absent.json")), "--out", p(&dir.path().join("e.csv"))]);
    assert_eq!(code(&o), 2);
    let o = run(&["model", "--config", p(&fixture("paper.json")), "--scope", "bogus", "--out", "x.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn eig_of_first_order_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = first_order(dir.path());
    let out = dir.path().join("eig.csv");
    assert_eq!(code(&run(&["eig", "--model", p(&model), "--out", p(&out)])), 0);
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["index", "re", "im", "damping", "freq_hz"]);
    assert_eq!(rows.len(), 2);
    assert_eq!(num(&rows[1][1]), -1.0);
    assert_eq!(num(&rows[1][3]), 1.0);
    assert_eq!(num(&rows[1][4]), 0.0);
}

#[test]
fn eig_of_hybrid_fixture_has_78_rows() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("hy.json");
    assert_eq!(code(&run(&["model", "--config", p(&fixture("paper.json")), "--out", p(&model)])), 0);
    let out = dir.path().join("eig.csv");
    assert_eq!(code(&run(&["eig", "--model", p(&model), "--out", p(&out)])), 0);
    assert_eq!(csv_rows(&out).len(), 79);
}

#[test]
fn pz_of_lead_lag() {
    let dir = tempfile::tempdir().unwrap();
    let m = make_lti(
        Mat::from_rows(&[&[-2.0]]),
        Mat::from_rows(&[&[1.0]]),
        Some(Mat::from_rows(&[&[-1.0]])),
        Some(Mat::from_rows(&[&[1.0]])),
        labels(&["x"]),
        labels(&["u"]),
        Some(labels(&["y"])),
    )
    .unwrap();
    let model = write_model(dir.path(), "ll.json", &m);
    let out = dir.path().join("pz.csv");
    let o = run(&["pz", "--model", p(&model), "--input", "u", "--output", "y", "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["kind", "re", "im"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][0], "pole");
    assert_eq!((num(&rows[1][1]), num(&rows[1][2])), (-2.0, 0.0));
    assert_eq!(rows[2][0], "zero");
    assert!((num(&rows[2][1]) + 1.0).abs() < 1e-12);
    assert_eq!(num(&rows[2][2]), 0.0);
}

#[test]
fn sweep_over_table_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let full = dir.path().join("full");
    let o = run(&[
        "sweep", "--config", p(&fixture("paper.json")), "--from", "1e-3", "--to", "1.0", "--step", "5e-2",
        "--out", p(&out), "--full-dir", p(&full),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["m_dc", "spectral_abscissa", "unstable_count", "rightmost_re", "rightmost_im"]);
    assert_eq!(rows.len(), 21);
    assert_eq!(std::fs::read_dir(&full).unwrap().count(), 20);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("crossing"), "{stdout}");
}

#[test]
fn empty_sweep_range_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "sweep", "--config", p(&fixture("paper.json")), "--from", "1", "--to", "1", "--step", "5e-2", "--out",
        p(&dir.path().join("s.csv")),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_reports_the_crossing_interval() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&[
        "sweep", "--config", p(&fixture("single_dc.json")), "--from", "7", "--to", "8", "--step", "1", "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&out);
    assert!(num(&rows[1][1]) < 0.0 && num(&rows[2][1]) > 0.0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("crossing between points 0 and 1"), "{stdout}");
    assert!(stdout.contains("hopf"), "{stdout}");
}

#[test]
fn place_double_integrator() {
    let dir = tempfile::tempdir().unwrap();
    let model = double_integrator(dir.path());
    let targets = dir.path().join("t.json");
    std::fs::write(&targets, r#"{"targets": [[-1.0, 0.0], [-2.0, 0.0]]}"#).unwrap();
    let gains = dir.path().join("g.json");
    let o = run(&["place", "--model", p(&model), "--targets", p(&targets), "--out", p(&gains)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("within 10%: pass"));
    let g: serde_json::Value = serde_json::from_str(&text(&gains)).unwrap();
    let f = g["f"][0].as_array().unwrap();
    assert!((f[0].as_f64().unwrap() + 2.0).abs() < 1e-8);
    assert!((f[1].as_f64().unwrap() + 3.0).abs() < 1e-8);
    assert_eq!(g["within_tolerance"], true);
    assert!(g["max_rel_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn place_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let m = make_lti(
        Mat::from_rows(&[&[1.0, 0.0], &[0.0, 2.0]]),
        Mat::from_rows(&[&[1.0], &[0.0]]),
        None,
        None,
        labels(&["a", "b"]),
        labels(&["u"]),
        None,
    )
    .unwrap();
    let model = write_model(dir.path(), "unc.json", &m);
    let targets = dir.path().join("t.json");
    std::fs::write(&targets, r#"{"targets": [[-1.0, 0.0], [-2.0, 0.0]]}"#).unwrap();
    let out = p(&dir.path().join("g.json")).to_string();
    assert_eq!(code(&run(&["place", "--model", p(&model), "--targets", p(&targets), "--out", &out])), 4);
    let dint = double_integrator(dir.path());
    assert_eq!(code(&run(&["place", "--model", p(&dint), "--zeta", "1.5", "--out", &out])), 2);
    std::fs::write(&targets, r#"{"targets": [[-1.0, 0.0]]}"#).unwrap();
    assert_eq!(code(&run(&["place", "--model", p(&dint), "--targets", p(&targets), "--out", &out])), 2);
}

#[test]
fn step_of_first_order_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = first_order(dir.path());
    let out = dir.path().join("step.csv");
    let o = run(&["step", "--model", p(&model), "--input", "u", "--tfinal", "1", "--dt", "0.01", "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["t", "x"]);
    let last = rows.last().unwrap();
    assert!((num(&last[0]) - 1.0).abs() < 1e-12);
    assert!((num(&last[1]) - 0.6321206).abs() < 1e-7);
}

#[test]
fn step_with_gains_closes_the_loop() {
    let dir = tempfile::tempdir().unwrap();
    let model = double_integrator(dir.path());
    let gains = dir.path().join("g.json");
    std::fs::write(&gains, r#"{"f": [[-2.0, -3.0]]}"#).unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&[
        "step", "--model", p(&model), "--gains", p(&gains), "--input", "u", "--tfinal", "20", "--dt", "0.01",
        "--out", p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // Closed loop s² + 3s + 2: position settles at 1/2.
    let last = csv_rows(&out).last().unwrap().clone();
    assert!((num(&last[1]) - 0.5).abs() < 1e-6);

    std::fs::write(&gains, r#"{"f": [[-2.0, -3.0, 1.0]]}"#).unwrap();
    let o = run(&["step", "--model", p(&model), "--gains", p(&gains), "--input", "u", "--tfinal", "1", "--out", p(&out)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bundled_gain_row_is_shape_checked_and_used() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("dc18.json");
    let o = run(&["model", "--config", p(&fixture("paper_dc18.json")), "--scope", "dc", "--out", p(&model)]);
    assert_eq!(code(&o), 0);
    assert_eq!(Lti::from_json(&text(&model)).unwrap().n(), 18);
    let out = dir.path().join("s.csv");
    let o = run(&[
        "step", "--model", p(&model), "--gains", p(&fixture("paper_gains.json")), "--input", "dc1.V_ref",
        "--tfinal", "1e-4", "--dt", "1e-6", "--out", p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&out)[0].len(), 19);
    // The same row against the 20-state model is refused.
    let dc20 = dir.path().join("dc20.json");
    run(&["model", "--config", p(&fixture("paper.json")), "--scope", "dc", "--out", p(&dc20)]);
    let o = run(&[
        "step", "--model", p(&dc20), "--gains", p(&fixture("paper_gains.json")), "--input", "dc1.V_ref",
        "--tfinal", "1e-4", "--dt", "1e-6", "--out", p(&out),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = fixture("paper.json");
    let mut outputs = Vec::new();
    for k in 0..2 {
        let model = d.join(format!("m{k}.json"));
        let eig = d.join(format!("e{k}.csv"));
        let sweep = d.join(format!("s{k}.csv"));
        let gains = d.join(format!("g{k}.json"));
        let step = d.join(format!("t{k}.csv"));
        let pz = d.join(format!("p{k}.csv"));
        assert_eq!(code(&run(&["model", "--config", p(&cfg), "--scope", "dc", "--out", p(&model)])), 0);
        assert_eq!(code(&run(&["eig", "--model", p(&model), "--out", p(&eig)])), 0);
        assert_eq!(
            code(&run(&["pz", "--model", p(&model), "--input", "dc1.V_ref", "--output", "dc1.V_o", "--out", p(&pz)])),
            0
        );
        assert_eq!(
            code(&run(&["sweep", "--config", p(&cfg), "--from", "1e-3", "--to", "0.2", "--step", "5e-2", "--out", p(&sweep)])),
            0
        );
        assert_eq!(code(&run(&["place", "--model", p(&model), "--out", p(&gains)])), 0);
        assert_eq!(
            code(&run(&[
                "step", "--model", p(&model), "--gains", p(&gains), "--input", "dc1.V_ref", "--tfinal", "0.01",
                "--dt", "1e-4", "--out", p(&step),
            ])),
            0
        );
        outputs.push([model, eig, pz, sweep, gains, step].map(|f| std::fs::read(f).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn model_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    run(&["model", "--config", p(&fixture("paper.json")), "--scope", "hybrid", "--out", p(&out)]);
    let raw = text(&out);
    let m = Lti::from_json(&raw).unwrap();
    assert_eq!(m.to_json(), raw);
}

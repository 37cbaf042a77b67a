//! Acceptance run: one verdict line per criterion, non-zero exit if any fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mgstab::linalg::{
    char_poly, companion_roots, eig_qr, hessenberg, max_matched_error, nullspace_basis, CScalar, Mat,
};
use mgstab::network::{assemble, GridConfig, Scope};
use mgstab::sstate::{dc_gain, make_lti, step_response, Lti};
use mgstab::stability::{
    detect_crossing, eigen_report, place_poles, propose_targets, verify_placement, StabilityError, SweepPoint,
    SweepResult, PLACEMENT_TOLERANCE,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn config(name: &str) -> GridConfig {
    GridConfig::from_json(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgstab")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn char_poly_roots(a: &Mat) -> Vec<CScalar> {
    companion_roots(&char_poly(a).unwrap().0).unwrap()
}

fn eigenvalue_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=8);
        let a = random_matrix(&mut rng, n, n);
        let err = max_matched_error(&char_poly_roots(&a), &eig_qr(&a).unwrap());
        worst = worst.max(err);
        failures += usize::from(err >= 1e-7);
    }
    let dc = assemble(&config("single_dc.json"), &Scope::Dc).unwrap();
    let dc_err = max_matched_error(&char_poly_roots(dc.a()), &eig_qr(dc.a()).unwrap());
    let secs = start.elapsed().as_secs_f64();
    verdict(
        failures == 0 && dc.n() == 6 && dc_err < 1e-7 && secs < 5.0,
        format!(
            "200 random matrices, worst relative error {worst:.2e} ({failures} over 1e-7); 6-state converter {dc_err:.2e}; {secs:.2} s"
        ),
    )
}

fn hessenberg_similarity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut structure = true;
    for _ in 0..100 {
        let a = random_matrix(&mut rng, 10, 10);
        let (h, q) = hessenberg(&a);
        for i in 0..10usize {
            for j in 0..i.saturating_sub(1) {
                structure &= h[(i, j)] == 0.0;
            }
        }
        structure &= q.transpose().matmul(&a).matmul(&q).sub(&h).max_abs() < 1e-12;
        worst = worst.max(max_matched_error(&char_poly_roots(&a), &char_poly_roots(&h)));
    }
    verdict(
        structure && worst < 1e-8,
        format!("100 random 10x10, worst spectrum difference {worst:.2e}, Hessenberg structure exact: {structure}"),
    )
}

fn model_structure(dir: &Path) -> Verdict {
    let cfg = fixture("paper.json");
    let build = |scope: &str| -> Lti {
        let out = dir.join(format!("{}.json", scope.replace(':', "_")));
        let o = run(&["model", "--config", p(&cfg), "--scope", scope, "--out", p(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        Lti::from_json(&std::fs::read_to_string(out).unwrap()).unwrap()
    };
    let dc = build("converter:dc1");
    let ac = build("converter:ac1");
    let hy = build("hybrid");
    let dc_labels_ok = dc.state_names() == ["i_v", "i_o", "V_o", "P_dc", "zeta_v", "eta_c"];
    let circuit = mgstab::dcconv::build_dc_power_circuit(&config("paper.json").dc_converters[0].filter()).unwrap();
    let a00 = circuit.a()[(0, 0)];
    let a20 = dc.a()[(2, 0)];
    let ok = dc.n() == 6
        && dc.m() == 2
        && dc_labels_ok
        && ac.n() == 13
        && ac.m() == 3
        && hy.n() == 78
        && (a00 + 1.0 / 3.0).abs() < 1e-9
        && (a20 - 5e4).abs() < 1e-6;
    verdict(
        ok,
        format!(
            "dc1 {}x{} labels ok {dc_labels_ok}; ac1 {}x{}; hybrid {} states; a[0][0] = {a00:.6} (full converter {:.6}), a[2][0] = {a20}",
            dc.n(),
            dc.m(),
            ac.n(),
            ac.m(),
            hy.n(),
            dc.a()[(0, 0)]
        ),
    )
}

fn single_converter_stability() -> Verdict {
    let start = Instant::now();
    let m = assemble(&config("single_dc.json"), &Scope::Dc).unwrap();
    let report = eigen_report(&m).unwrap();
    let oracle = char_poly_roots(m.a()).iter().map(|z| z.re).fold(f64::MIN, f64::max);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        report.spectral_abscissa < 0.0 && oracle < 0.0 && secs < 1.0,
        format!(
            "m_dc = 1e-3, {} states, spectral abscissa {:.6e}, char-poly oracle {oracle:.6e}, {secs:.3} s",
            m.n(),
            report.spectral_abscissa
        ),
    )
}

fn droop_sweep(dir: &Path) -> Verdict {
    let out = dir.join("sweep.csv");
    let o = run(&[
        "sweep", "--config", p(&fixture("paper.json")), "--from", "1e-3", "--to", "1.0", "--step", "5e-2", "--out",
        p(&out),
    ]);
    let text = std::fs::read_to_string(&out).unwrap_or_default();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    let recorded = rows.iter().all(|r| r.split(',').nth(1).is_some_and(|v| v.parse::<f64>().is_ok()));
    let summary = String::from_utf8_lossy(&o.stdout);
    let fixture_line = summary.lines().last().unwrap_or("").to_string();

    let pair = |re: f64| vec![CScalar::new(re, 5.0), CScalar::new(re, -5.0), CScalar::new(-2.0, 0.0)];
    let synthetic = SweepResult {
        points: vec![
            SweepPoint::from_eigenvalues(0.1, pair(-0.1)),
            SweepPoint::from_eigenvalues(0.2, pair(0.1)),
        ],
    };
    let c = detect_crossing(&synthetic);
    let hopf = c.len() == 1 && c[0].kind == mgstab::stability::CrossingKind::Hopf;
    verdict(
        o.status.success() && rows.len() == 20 && recorded && hopf,
        format!("{} points, abscissa recorded {recorded}, synthetic hopf {hopf}; fixture: {fixture_line}", rows.len()),
    )
}

fn controllable(a: &Mat, b: &Mat) -> bool {
    let n = a.rows();
    let mut blocks = vec![b.clone()];
    for k in 1..n {
        blocks.push(a.matmul(&blocks[k - 1]));
    }
    let refs: Vec<&Mat> = blocks.iter().collect();
    let c = Mat::hstack(&refs);
    nullspace_basis(&c.transpose(), 1e-6 * c.max_abs().max(1.0)).cols() == 0
}

fn random_targets(rng: &mut ChaCha8Rng, n: usize) -> Vec<CScalar> {
    let mut t = Vec::with_capacity(n);
    while t.len() < n {
        let re = rng.gen_range(-5.0..-0.5);
        if t.len() + 2 <= n && rng.gen_bool(0.5) {
            let im = rng.gen_range(0.5..5.0);
            t.push(CScalar::new(re, im));
            t.push(CScalar::new(re, -im));
        } else {
            t.push(CScalar::new(re, 0.0));
        }
    }
    t
}

fn pole_placement() -> Verdict {
    let start = Instant::now();
    let a = Mat::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let b = Mat::from_rows(&[&[0.0], &[1.0]]);
    let di = place_poles(&a, &b, &[CScalar::new(-1.0, 0.0), CScalar::new(-2.0, 0.0)]).unwrap();
    let part_a = (di.f[(0, 0)] + 2.0).abs() < 1e-8 && (di.f[(0, 1)] + 3.0).abs() < 1e-8;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut systems, mut worst_err, mut worst_res, mut failures) = (0, 0.0f64, 0.0f64, Vec::new());
    let mut residual_ok = di.theorem_residual <= 1e-8 * a.norm_inf();
    while systems < 100 {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(1..=2);
        let a = random_matrix(&mut rng, n, n);
        let b = random_matrix(&mut rng, n, m);
        if !controllable(&a, &b) {
            continue;
        }
        systems += 1;
        let t = random_targets(&mut rng, n);
        match place_poles(&a, &b, &t) {
            Ok(r) => {
                let v = verify_placement(&a, &b, &r.f, &t).unwrap();
                worst_err = worst_err.max(v.max_rel_error);
                let rel_res = r.theorem_residual / a.norm_inf();
                worst_res = worst_res.max(rel_res);
                residual_ok &= rel_res <= 1e-8;
                if !v.pass_strict {
                    failures.push(format!("n={n} m={m} err {:.1e}", v.max_rel_error));
                }
            }
            Err(e) => failures.push(format!("n={n} m={m}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        part_a && failures.is_empty() && residual_ok && secs < 10.0,
        format!(
            "(a) F = [{:.10}, {:.10}]; (b) 100 systems, worst error {worst_err:.2e}, {} misses {:?}; (c) worst residual/|A| {worst_res:.2e}; {secs:.2} s",
            di.f[(0, 0)],
            di.f[(0, 1)],
            failures.len(),
            failures
        ),
    )
}

fn hybrid_stabilization() -> Verdict {
    let m = assemble(&config("paper.json"), &Scope::Hybrid).unwrap();
    let open = eigen_report(&m).unwrap();
    let targets = propose_targets(&open, 0.7);
    let placed = match place_poles(m.a(), m.b(), &targets) {
        Ok(p) => p,
        Err(StabilityError::IllConditioned { cond }) => return verdict(false, format!("ill-conditioned, cond {cond:.2e}")),
        Err(e) => return verdict(false, e.to_string()),
    };
    let v = verify_placement(m.a(), m.b(), &placed.f, &targets).unwrap();
    let closed = m.with_state_feedback(&placed.f).unwrap();
    let closed_report = eigen_report(&closed).unwrap();
    let slowest = closed_report.eigenvalues().iter().map(|z| -z.re).fold(f64::INFINITY, f64::min);

    // Step every input; settle for 20 slowest time constants.
    let t_final = 20.0 / slowest;
    let dt = 1e-3;
    let gain = dc_gain(&closed).unwrap();
    let (mut worst_final, mut peak) = (0.0f64, 0.0f64);
    for (j, input) in closed.input_names().iter().enumerate() {
        let tr = match step_response(&closed, input, t_final, Some(dt), None) {
            Ok(tr) => tr,
            Err(e) => return verdict(false, format!("step on {input}: {e}")),
        };
        for x in &tr.states {
            for v in x {
                peak = peak.max(v.abs());
            }
        }
        let last = tr.outputs.last().unwrap();
        let scale = (0..closed.p()).map(|i| gain[(i, j)].abs()).fold(1.0, f64::max);
        for i in 0..closed.p() {
            worst_final = worst_final.max((last[i] - gain[(i, j)]).abs() / scale);
        }
    }
    let ok = closed_report.stable && v.pass && peak.is_finite() && worst_final <= 1e-6;
    verdict(
        ok,
        format!(
            "open loop {} unstable modes; closed abscissa {:.4e}; placement error {:.2e} (10% pass {}); steps over {} inputs to t = {t_final:.1} s, peak |x| {peak:.3e}, worst final-value error {worst_final:.2e}",
            open.unstable_count(),
            closed_report.spectral_abscissa,
            v.max_rel_error,
            v.max_rel_error <= PLACEMENT_TOLERANCE,
            closed.m()
        ),
    )
}

fn step_analytics() -> Verdict {
    let lti = |a: f64, b: f64| {
        make_lti(
            Mat::from_rows(&[&[a]]),
            Mat::from_rows(&[&[b]]),
            None,
            None,
            vec!["x".into()],
            vec!["u".into()],
            None,
        )
        .unwrap()
    };
    let first = lti(-1.0, 1.0);
    let tr = step_response(&first, "u", 1.0, Some(1e-3), None).unwrap();
    let y1 = tr.outputs.last().unwrap()[0];
    let analytic_err = (y1 - (1.0 - (-1.0f64).exp())).abs();

    let alpha = -2.5;
    let scaled = step_response(&lti(-1.0, alpha), "u", 1.0, Some(1e-3), None).unwrap();
    let linear_err = tr
        .outputs
        .iter()
        .zip(&scaled.outputs)
        .map(|(u, s)| (alpha * u[0] - s[0]).abs())
        .fold(0.0, f64::max);

    let slow = lti(-0.5, 3.0);
    let tail = step_response(&slow, "u", 40.0, Some(0.01), None).unwrap();
    let final_err = (tail.outputs.last().unwrap()[0] - dc_gain(&slow).unwrap()[(0, 0)]).abs();
    verdict(
        analytic_err <= 1e-9 && linear_err <= 1e-10 && final_err <= 1e-6,
        format!("y(1) = {y1:.10} (error {analytic_err:.1e}); linearity {linear_err:.1e}; final value {final_err:.1e}"),
    )
}

fn determinism(dir: &Path) -> Verdict {
    let cfg = fixture("paper.json");
    let mut runs = Vec::new();
    for k in 0..2 {
        let d = dir.join(format!("run{k}"));
        std::fs::create_dir_all(&d).unwrap();
        let f = |name: &str| d.join(name);
        let steps: Vec<Vec<String>> = vec![
            vec!["model", "--config", p(&cfg), "--scope", "hybrid", "--out", p(&f("hy.json"))],
            vec!["model", "--config", p(&cfg), "--scope", "dc", "--out", p(&f("dc.json"))],
            vec!["eig", "--model", p(&f("hy.json")), "--out", p(&f("eig.csv"))],
            vec!["pz", "--model", p(&f("dc.json")), "--input", "dc1.V_ref", "--output", "dc1.V_o", "--out", p(&f("pz.csv"))],
            vec!["sweep", "--config", p(&cfg), "--from", "1e-3", "--to", "1.0", "--step", "5e-2", "--out", p(&f("sweep.csv"))],
            vec!["place", "--model", p(&f("hy.json")), "--out", p(&f("gains.json"))],
            vec!["step", "--model", p(&f("hy.json")), "--gains", p(&f("gains.json")), "--input", "dc1.V_ref", "--tfinal", "0.05", "--dt", "1e-4", "--out", p(&f("step.csv"))],
        ]
        .into_iter()
        .map(|v| v.into_iter().map(String::from).collect())
        .collect();
        for s in &steps {
            let args: Vec<&str> = s.iter().map(String::as_str).collect();
            let o = run(&args);
            if !o.status.success() {
                return verdict(false, format!("{} failed: {}", s[0], String::from_utf8_lossy(&o.stderr)));
            }
        }
        let files = ["hy.json", "dc.json", "eig.csv", "pz.csv", "sweep.csv", "gains.json", "step.csv"];
        runs.push(files.map(|n| std::fs::read(f(n)).unwrap()));
    }
    let identical = runs[0] == runs[1];
    let raw = String::from_utf8(runs[0][0].clone()).unwrap();
    let model = Lti::from_json(&raw).unwrap();
    let in_memory = assemble(&config("paper.json"), &Scope::Hybrid).unwrap();
    let round_trip = model.to_json() == raw && model == in_memory;
    verdict(
        identical && round_trip,
        format!("7 outputs byte-identical across runs: {identical}; model round trip exact: {round_trip}"),
    )
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("eigensolver oracle equivalence", Box::new(eigenvalue_oracle)),
        ("Hessenberg similarity", Box::new(hessenberg_similarity)),
        ("model structure", Box::new(|| model_structure(dir.path()))),
        ("single-converter stability at m_dc = 1e-3", Box::new(single_converter_stability)),
        ("droop sweep", Box::new(|| droop_sweep(dir.path()))),
        ("pole placement", Box::new(pole_placement)),
        ("stabilization of the hybrid fixture", Box::new(hybrid_stabilization)),
        ("step-response analytics", Box::new(step_analytics)),
        ("determinism and round trip", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        failed += usize::from(!v.pass);
        println!("criterion {} {}: {} ({})", k + 1, if v.pass { "PASS" } else { "FAIL" }, name, v.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

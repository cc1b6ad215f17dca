//! End-to-end tests driving the built binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qnd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qnd"))
}

fn run(args: &[&str]) -> Output {
    qnd().args(args).output().expect("binary runs")
}

fn stdout_of(output: &Output) -> &str {
    std::str::from_utf8(&output.stdout).expect("utf8 stdout")
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn write_config(dir: &tempfile::TempDir, body: &str) -> PathBuf {
    let path = dir.path().join("scenario.conf");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn sweep_produces_the_documented_table() {
    let output = run(&[
        "sweep",
        "--config",
        repo_config("vacuum_sweep.conf").to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let text = stdout_of(&output);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,f,g,sum,sigma_eff2,photon_number");

    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 50);

    // G strictly decreasing along the sweep
    for pair in rows.windows(2) {
        assert!(
            pair[1][2] < pair[0][2],
            "G not decreasing at x = {}",
            pair[1][0]
        );
    }

    // the row nearest x = 1.2 carries the optimum-level disturbance fidelity
    let nearest = rows
        .iter()
        .min_by(|a, b| (a[0] - 1.2).abs().partial_cmp(&(b[0] - 1.2).abs()).unwrap())
        .unwrap();
    assert!(
        (0.85..=0.87).contains(&nearest[1]),
        "F = {} at x = {}",
        nearest[1],
        nearest[0]
    );

    // fields carry at least 12 significant digits
    let first_field = text.lines().nth(1).unwrap().split(',').next().unwrap();
    let digits = first_field
        .split('e')
        .next()
        .unwrap()
        .chars()
        .filter(char::is_ascii_digit);
    assert!(digits.count() >= 12, "{first_field}");
}

#[test]
fn malformed_config_names_the_field_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(&dir, "signal.kind = fock\n");
    let output = run(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = std::str::from_utf8(&output.stderr).unwrap();
    assert!(stderr.contains("signal.n"), "stderr: {stderr}");

    let path = write_config(&dir, "grid.points = twelve\n");
    let output = run(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = std::str::from_utf8(&output.stderr).unwrap();
    assert!(
        stderr.contains("grid.points") && stderr.contains("line 1"),
        "stderr: {stderr}"
    );
}

#[test]
fn optimize_reports_the_reference_operating_points() {
    let output = run(&["optimize"]);
    assert!(output.status.success());
    let doc: serde_json::Value = serde_json::from_str(stdout_of(&output)).unwrap();

    let x_m = doc["x_m"].as_f64().unwrap();
    let x_e = doc["x_e"].as_f64().unwrap();
    assert!((1.15..=1.25).contains(&x_m), "x_m = {x_m}");
    assert!((1.25..=1.38).contains(&x_e), "x_e = {x_e}");
    assert!((doc["f_m"].as_f64().unwrap() - 0.86).abs() < 0.01);
    assert!((doc["g_m"].as_f64().unwrap() - 0.91).abs() < 0.01);

    // at the balanced splitter the probe comes out slightly anti-squeezed,
    // with sigma_p about 1.2 sigma_s
    let fix_phi = &doc["fix_phi"];
    assert_eq!(fix_phi["probe_direction"].as_str().unwrap(), "antisqueezed");
    let ratio = (fix_phi["sigma_p2"].as_f64().unwrap() / doc["sigma_s2"].as_f64().unwrap()).sqrt();
    assert!((1.15..=1.25).contains(&ratio), "sigma_p/sigma_s = {ratio}");

    // both realizations hit the same trade-off variable
    assert!((fix_phi["x"].as_f64().unwrap() - x_m).abs() < 1e-10);
    assert!((doc["fix_probe"]["x"].as_f64().unwrap() - x_m).abs() < 1e-10);
}

#[test]
fn optimize_handles_non_gaussian_signals_numerically() {
    let output = run(&[
        "optimize",
        "--config",
        repo_config("fock1_optimize.conf").to_str().unwrap(),
    ]);
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let doc: serde_json::Value = serde_json::from_str(stdout_of(&output)).unwrap();
    assert_eq!(doc["objective"].as_str().unwrap(), "grid");
    let x_m = doc["x_m"].as_f64().unwrap();
    assert!(x_m.is_finite() && x_m > 0.0, "x_m = {x_m}");
    assert!((doc["sigma_s2"].as_f64().unwrap() - 0.75).abs() < 1e-6);
}

#[test]
fn simulate_is_deterministic_and_calibrated() {
    let config = repo_config("simulate.conf");
    let config = config.to_str().unwrap();
    let a = run(&["simulate", "--config", config, "--format", "csv"]);
    let b = run(&["simulate", "--config", config, "--format", "csv"]);
    assert!(a.status.success());
    assert_eq!(
        a.stdout, b.stdout,
        "same seed must give byte-identical output"
    );

    let text = stdout_of(&a);
    let variance_line = text
        .lines()
        .find(|l| l.starts_with("# variance = "))
        .expect("summary variance");
    let variance: f64 = variance_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((variance - 0.5).abs() / 0.5 < 0.03, "variance = {variance}");

    // alpha* = x tan(phi) sin(phi) on every row
    let gain = std::f64::consts::FRAC_PI_4.tan() * std::f64::consts::FRAC_PI_4.sin();
    let mut rows = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let fields: Vec<f64> = line.split(',').map(|v| v.parse::<f64>().unwrap()).collect();
        assert!((fields[2] - fields[1] * gain).abs() < 1e-9);
        rows += 1;
    }
    assert_eq!(rows, 100_000);

    // a different seed changes the stream
    let c = run(&[
        "simulate", "--config", config, "--format", "csv", "--seed", "7",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn validate_passes_by_default_and_fails_when_under_resolved() {
    let output = run(&["validate"]);
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stdout)
    );
    let text = stdout_of(&output);
    let checks = text.lines().filter(|l| l.starts_with("check ")).count();
    assert!(checks >= 6, "only {checks} checks");
    assert!(text.contains("computed optimum: x_m = "));
    assert!(text.contains("overall: PASS"));

    let degraded = run(&["validate", "--grid-points", "32"]);
    assert_eq!(degraded.status.code(), Some(1));
    assert!(stdout_of(&degraded).contains("overall: FAIL"));
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let output = run(&["optimize", "--out", path.to_str().unwrap()]);
    assert!(output.status.success());
    assert!(output.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(doc["x_m"].is_f64());
}

#[test]
fn cat_config_sweeps_cleanly() {
    let output = run(&[
        "sweep",
        "--config",
        repo_config("cat_frontier.conf").to_str().unwrap(),
    ]);
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let rows = stdout_of(&output).lines().count();
    assert_eq!(rows, 26); // header + 25 points
}

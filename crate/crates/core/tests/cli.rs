use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use strainsafe::config::RunConfig;
use strainsafe::io;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_strainsafe"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, format!("schema_version = 1\n{body}")).unwrap();
    path
}

#[test]
fn simulate_default_config_writes_full_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("default.toml");
    let out = dir.path().join("out");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--plots",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = io::read_trace(&out.join("trace.csv")).unwrap();
    assert_eq!(trace.len(), 10_001);
    assert!(trace.min_h() >= -7.9e-3);
    let text = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(text.starts_with(
        "t,lambda_theta,lambda_z,dlambda_theta,dlambda_z,u_nom_pa,u_safe_pa,h_j_per_m3,psi1,w_j_per_m3,active\n"
    ));
    assert!(!text.contains('\r'));
    for svg in ["stretches.svg", "stretch_rates.svg", "pressure.svg", "barrier.svg"] {
        let body = std::fs::read_to_string(out.join(svg)).unwrap();
        assert!(body.starts_with("<svg"), "{svg}");
    }
    assert!(io::read_pressure_csv(&out.join("pressure.csv")).unwrap().len() > 16 * 10_000);
}

#[test]
fn outputs_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = run(&["simulate", "--out", d.to_str().unwrap(), "--decimate", "10"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let ta = std::fs::read(a.join("trace.csv")).unwrap();
    let tb = std::fs::read(b.join("trace.csv")).unwrap();
    assert_eq!(ta, tb);
    assert_eq!(io::read_trace(&a.join("trace.csv")).unwrap().len(), 1001);
}

#[test]
fn dt_not_below_t_end_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[simulation]\nt_end = 1.0\ndt = 1.0\n");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("simulation.dt"), "{}", stderr(&o));
}

#[test]
fn negative_damping_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[material]\neta = -1.0\n");
    let o = run(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("material.eta"), "{}", stderr(&o));
}

#[test]
fn no_filter_passes_nominal_through() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[simulation]\nt_end = 0.3\n[simulation.nominal]\nkind = \"half_sinusoid\"\namplitude = 2000.0\nfrequency = 1.0\ncutoff = 0.5\n",
    );
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--no-filter",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = io::read_trace(&dir.path().join("trace.csv")).unwrap();
    assert!(trace.rows.iter().all(|r| r.u_safe == r.u_nom && !r.active));
}

#[test]
fn unfiltered_blow_up_is_a_runtime_fault_with_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--out", dir.path().to_str().unwrap(), "--no-filter"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("simulation fault at t ="), "{}", stderr(&o));
    let partial = io::read_trace(&dir.path().join("trace.csv")).unwrap();
    assert!(!partial.is_empty() && partial.len() < 10_001);
    assert!(partial.rows.iter().any(|r| r.h < 0.0));
}

#[test]
fn safeset_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["safeset", "--out", dir.path().to_str().unwrap(), "--plots"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("safeset.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda_theta,lambda_z,h_j_per_m3"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 201 * 201);
    let rest = rows.iter().find(|r| r[0] == 1.0 && r[1] == 1.0).unwrap();
    assert_eq!(rest[2], 7900.0);
    let corner = rows.iter().find(|r| r[0] == 2.5 && r[1] == 2.5).unwrap();
    assert!(corner[2] < 0.0);
    let svg = std::fs::read_to_string(dir.path().join("safeset.svg")).unwrap();
    assert!(svg.contains("<path d=\"M"));
}

#[test]
fn replay_bundled_ramp() {
    let dir = tempfile::tempdir().unwrap();
    let ramp = configs().join("ramp_pressure.csv");
    let o = run(&["replay", ramp.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = io::read_trace(&dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.len(), 10_001);
    assert!(trace.rows.iter().all(|r| !r.active));
}

#[test]
fn replay_missing_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let o = run(&[
        "replay",
        missing.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.csv"), "{}", stderr(&o));
}

#[test]
fn replay_of_exported_pressure_reproduces_closed_loop() {
    let dir = tempfile::tempdir().unwrap();
    let closed = dir.path().join("closed");
    let open = dir.path().join("open");
    let o = run(&["simulate", "--out", closed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let pressure = closed.join("pressure.csv");
    let o = run(&["replay", pressure.to_str().unwrap(), "--out", open.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = io::read_trace(&closed.join("trace.csv")).unwrap();
    let b = io::read_trace(&open.join("trace.csv")).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!(((x.lambda_theta - y.lambda_theta) / x.lambda_theta).abs() < 1e-6);
        assert!(((x.lambda_z - y.lambda_z) / x.lambda_z).abs() < 1e-6);
    }
}

#[test]
fn check_passes_on_defaults() {
    let o = run(&["check", "--config", configs().join("default.toml").to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    if cfg!(feature = "fault-injection") {
        assert_eq!(o.status.code(), Some(1));
        assert!(stdout.contains("FAIL gradient_fd"), "{stdout}");
    } else {
        assert_eq!(o.status.code(), Some(0), "{stdout}{}", stderr(&o));
        assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 6, "{stdout}");
    }
}

#[test]
fn tensile_calibration_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(configs().join("tensile_example.csv"), dir.path().join("tensile.csv")).unwrap();
    let cfg = write_config(dir.path(), "[material]\ntensile_csv = \"tensile.csv\"\neta = 3200.0\n");
    let run = RunConfig::load(&cfg).unwrap().resolve(dir.path()).unwrap();
    let fit = run.tensile_fit.unwrap();
    assert!((fit.mu - 7900.0).abs() < 100.0, "{}", fit.mu);
}

#[test]
fn bundled_config_equals_defaults_and_round_trips() {
    let cfg = RunConfig::load(&configs().join("default.toml")).unwrap();
    assert_eq!(cfg, RunConfig::default());
    let text = cfg.to_toml_string();
    let back = RunConfig::from_toml_str(&text, Path::new("round-trip")).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["launch"]).status.code(), Some(2));
}

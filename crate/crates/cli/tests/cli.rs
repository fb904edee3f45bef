use std::path::{Path, PathBuf};
use std::process::Command;
use udw_cli::config::{Format, Mode, RunConfig};
use udw_cli::output::read_config_echo;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn udw(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_udw")).args(args).env_remove("UDW_EPS_SCALE").output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn run_to(config: &str, dir: &Path, file: &str, extra: &[&str]) -> (i32, PathBuf) {
    let out = dir.join(file);
    let cfg = config_path(config);
    let mut args = vec!["--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, _, err) = udw(&args);
    assert!(code == 0 || !err.is_empty());
    (code, out)
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

fn col(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn planck(e: f64, a: f64) -> f64 {
    e / (2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * e / a).exp_m1())
}

#[test]
fn spectrum_matches_planck() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to("planck_spectrum.json", dir.path(), "p.csv", &[]);
    assert_eq!(code, 0);
    let r = rows(&out);
    assert_eq!(r.len(), 64);
    for (e, p) in col(&r, 0).into_iter().zip(col(&r, 1)) {
        assert!((p / planck(e, 1.0) - 1.0).abs() < 1e-2, "E={e}");
    }
}

#[test]
fn static_spectrum_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to("static_spectrum.json", dir.path(), "s.csv", &[]);
    assert_eq!(code, 0);
    assert!(col(&rows(&out), 1).iter().all(|p| *p == 0.0));
}

#[test]
fn thermal_comparison_within_a_thousandth() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to("compare_thermal.json", dir.path(), "c.csv", &[]);
    assert_eq!(code, 0);
    let r = rows(&out);
    assert!(col(&r, 3).iter().all(|d| d.abs() < 1e-3));
    let (_, spectrum) = run_to("planck_spectrum.json", dir.path(), "p.csv", &[]);
    let grid_a: Vec<String> = r.iter().map(|x| x[0].clone()).collect();
    let cfg = RunConfig::load(&config_path("compare_thermal.json")).unwrap();
    let scan = cfg.scan.unwrap();
    let expected: Vec<String> = scan.grid().iter().map(|e| format!("{e:.16e}")).collect();
    assert_eq!(grid_a, expected);
    assert!(spectrum.exists());
}

#[test]
fn two_level_g2_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to("g2_two_level.json", dir.path(), "g.csv", &[]);
    assert_eq!(code, 0);
    let r = rows(&out);
    let g = col(&r, 1);
    let min = g.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((min - 0.974_934).abs() < 5e-7);
    let t = col(&r, 0);
    let at0 = t.iter().position(|x| *x == 0.0).unwrap();
    assert_eq!(g[at0], min);
    assert!(r.iter().all(|row| row[2] == "near" && row[3] == "accelerated"));
}

#[test]
fn far_g2_dips_at_light_delay() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to("g2_far.json", dir.path(), "g.csv", &[]);
    assert_eq!(code, 0);
    let r = rows(&out);
    let (t, g, marker) = (col(&r, 0), col(&r, 1), col(&r, 4));
    let marked: Vec<f64> = t.iter().zip(&marker).filter(|(_, m)| **m == 1.0).map(|(t, _)| *t).collect();
    assert_eq!(marked, vec![-5.0, 5.0]);
    let min_at = t[g.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0];
    assert_eq!(min_at.abs(), 5.0);
    // beyond 10σ + r
    for (ti, gi) in t.iter().zip(&g) {
        if ti.abs() >= 10.0 {
            assert!((gi - 1.0).abs() < 1e-6);
        }
    }
    // symmetric in Δτ
    for (k, gi) in g.iter().enumerate() {
        assert!((gi - g[g.len() - 1 - k]).abs() < 1e-12);
    }
}

#[test]
fn output_is_deterministic_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    for config in ["planck_spectrum.json", "switch_scan.json"] {
        let mut outputs = Vec::new();
        for jobs in ["1", "4", "4"] {
            let (code, out) = run_to(config, dir.path(), "o.csv", &["--jobs", jobs]);
            assert_eq!(code, 0);
            outputs.push(std::fs::read(out).unwrap());
        }
        assert_eq!(outputs[0], outputs[1]);
        assert_eq!(outputs[0], outputs[2]);
    }
}

#[test]
fn config_echo_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for (config, format) in [("residue_spectrum.json", "csv"), ("g2_two_level.json", "json")] {
        let (code, out) = run_to(config, dir.path(), "o", &["--format", format]);
        assert_eq!(code, 0);
        let echoed = read_config_echo(&out).unwrap();
        let mut original = RunConfig::load(&config_path(config)).unwrap();
        original.output.path = Some(out.clone());
        original.output.format = if format == "csv" { Format::Csv } else { Format::Json };
        assert_eq!(echoed, original);
    }
}

#[test]
fn json_output_carries_version_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = run_to("residue_spectrum.json", dir.path(), "o.json", &["--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["rows"].as_array().unwrap().len(), 11);
    assert_eq!(v["columns"][0], "energy");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let bad_field = write("bad.json", r#"{"mode": "spectrum", "detector": {"sigma": 1, "colour": 2}}"#);
    let (code, _, err) = udw(&["--config", bad_field.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("colour"));

    let decreasing = write(
        "dec.json",
        r#"{"mode": "spectrum", "trajectory": {"kind": "uniform", "a": 1}, "detector": {"sigma": 50},
            "scan": {"min": 3, "max": 1, "points": 8}}"#,
    );
    let (code, _, err) = udw(&["--config", decreasing.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("scan"));

    let regime = write(
        "regime.json",
        r#"{"mode": "g2", "source": {"kind": "accelerated", "a": 1, "r": 2}, "regime": "far",
            "detector": {"sigma": 1}, "scan": {"min": -5, "max": 5, "points": 11}}"#,
    );
    let (code, _, err) = udw(&["--config", regime.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("8σ"), "{err}");

    let two_level = write(
        "tl.json",
        r#"{"mode": "g2", "source": {"kind": "accelerated", "a": 1, "r": 0},
            "detector": {"sigma": 100, "coupling": {"kind": "two_level", "e0": 1, "delta_e": 0.02}},
            "scan": {"min": -5, "max": 5, "points": 11}}"#,
    );
    assert_eq!(udw(&["--config", two_level.to_str().unwrap()]).0, 2);

    let no_config = udw(&["--mode", "spectrum"]);
    assert_eq!(no_config.0, 2);

    let corrupted = write("v.json", r#"{"mode": "validate", "validate": {"only": [5], "tolerance_scale": {"5": 0.0}}}"#);
    let (code, stdout, _) = udw(&["--config", corrupted.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stdout.contains("[FAIL]  5"));

    let fine = write("ok.json", r#"{"mode": "validate", "validate": {"only": [1, 4, 5]}}"#);
    let (code, stdout, _) = udw(&["--config", fine.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 3);
    assert!(stdout.contains(" s]"));

    let stalled = write(
        "stall.json",
        r#"{"mode": "spectrum", "trajectory": {"kind": "uniform", "a": 1}, "detector": {"sigma": 50},
            "scan": {"min": 0.5, "max": 1, "points": 3}, "quadrature": {"panels": 2, "max_doublings": 1}}"#,
    );
    let out = dir.path().join("stall.csv");
    let (code, _, _) = udw(&["--config", stalled.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(code, 3);
    let r = rows(&out);
    assert_eq!(r.len(), 3);
    assert!(r.iter().all(|row| row[5].contains("converge")));
}

#[test]
fn eps_scale_environment_override() {
    std::env::set_var("UDW_EPS_SCALE", "2e-4");
    let mut cfg = RunConfig::for_mode(Mode::Validate);
    cfg.apply_env().unwrap();
    assert_eq!(cfg.quadrature.eps_scale, 2e-4);
    std::env::set_var("UDW_EPS_SCALE", "lots");
    assert_eq!(cfg.apply_env().unwrap_err().exit_code(), 2);
    std::env::remove_var("UDW_EPS_SCALE");
}

#[test]
fn default_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = RunConfig::load(&path).unwrap();
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

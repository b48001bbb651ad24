use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bjj(config: &Path, out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bjj"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(format!("{name}.json"))
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn bare_dynamics(t_end: f64) -> Value {
    json!({
        "params": {"J": 1.0, "U": 0.012, "N": 1000},
        "command": "dynamics",
        "options": {"z0": 0.7, "theta0": 0.0, "t_end": t_end}
    })
}

#[test]
fn zero_duration_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.json", &bare_dynamics(0.0));
    let o = bjj(&cfg, &dir.path().join("out"), &["dynamics"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn flag_override_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.json", &bare_dynamics(10.0));
    let o = bjj(&cfg, &dir.path().join("out"), &["dynamics", "--t_end", "-1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn subcommand_must_match_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.json", &bare_dynamics(10.0));
    let o = bjj(&cfg, &dir.path().join("out"), &["sweep"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_parameter_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = bare_dynamics(10.0);
    v["params"]["Q"] = json!(1.0);
    let cfg = write_config(dir.path(), "d.json", &v);
    assert_eq!(code(&bjj(&cfg, &dir.path().join("out"), &["dynamics"])), 2);
}

#[test]
fn single_point_sweep_is_an_analysis_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        &json!({
            "params": {"J": 1.0, "U": 0.0, "N": 100},
            "command": "sweep",
            "options": {
                "U": [-0.01],
                "configurations": [{"label": "bare", "photon_number": 0.0}]
            }
        }),
    );
    let out = dir.path().join("out");
    let o = bjj(&cfg, &out, &["sweep"]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("sweep_bare.csv").exists());
}

#[test]
fn empty_frequency_window_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "f.json",
        &json!({
            "params": {"J": 1.0, "U": 0.000012, "N": 1000, "W12": 0.00003},
            "command": "frequency",
            "options": {"xi_sq": [33340.0, 33400.0, 33500.0]}
        }),
    );
    assert_eq!(code(&bjj(&cfg, &dir.path().join("out"), &["frequency"])), 2);
}

#[test]
fn dynamics_example_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("left");
    let o = bjj(&example("fig3_left"), &out, &["dynamics"]);
    assert!(o.status.success());
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out.join("regime_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["reduced"]["classification"], "josephson");
    let csv = fs::read_to_string(out.join("trajectory_reduced.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5002);
}

#[test]
fn both_models_write_difference() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("right");
    let o = bjj(&example("fig3_right"), &out, &["dynamics", "--t_end", "15"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trajectory_reduced.csv", "trajectory_full.csv", "z_difference.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let diff = fs::read_to_string(out.join("z_difference.csv")).unwrap();
    assert_eq!(diff.lines().next(), Some("t,abs_dz"));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert!(bjj(&example("fig_indicators_a"), out, &["sweep"]).status.success());
        assert!(bjj(&example("fig_groundstates_a"), out, &["ground-state"]).status.success());
    }
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() > 10);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
}

#[test]
fn single_thread_matches_default() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(bjj(&example("fig_indicators_b"), &a, &["sweep"]).status.success());
    assert!(bjj(&example("fig_indicators_b"), &b, &["--threads", "1", "sweep"])
        .status
        .success());
    assert_eq!(
        fs::read(a.join("crossover.json")).unwrap(),
        fs::read(b.join("crossover.json")).unwrap()
    );
}

#[test]
fn frequency_at_zero_photons() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inset");
    assert!(bjj(&example("fig3_inset"), &out, &["frequency"]).status.success());
    let csv = fs::read_to_string(out.join("frequency.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("xi_sq,omega,in_window"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let omega: f64 = row[1].parse().unwrap();
    assert!((omega - 4.024f64.sqrt()).abs() < 1e-12);
    assert_eq!(row[2], "true");
}

#[test]
fn binomial_ground_state_without_interaction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "g.json",
        &json!({
            "params": {"J": 1.0, "U": 0.0, "N": 4},
            "command": "ground-state",
            "options": {"U": [0.0], "photon_numbers": [0.0]}
        }),
    );
    let out = dir.path().join("out");
    assert!(bjj(&cfg, &out, &["ground-state"]).status.success());
    let csv = fs::read_to_string(out.join("ground_state_0_0.csv")).unwrap();
    let probs: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    let expected = [1.0, 4.0, 6.0, 4.0, 1.0].map(|c| c / 16.0);
    for (p, e) in probs.iter().zip(expected) {
        assert!((p - e).abs() < 1e-14);
    }
    let meta: Value =
        serde_json::from_str(&fs::read_to_string(out.join("ground_state_0_0.json")).unwrap())
            .unwrap();
    assert_eq!(meta["N"], 4);
}

#[test]
fn phase_diagram_zero_interaction_is_untrapped() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pd");
    assert!(bjj(&example("fig2_row1"), &out, &["phase-diagram"]).status.success());
    let csv = fs::read_to_string(out.join("phase_diagram.csv")).unwrap();
    let mut zero_column = 0;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols[1].parse::<f64>().unwrap() == 0.0 {
            zero_column += 1;
            assert_eq!(cols[3], "false", "{line}");
        }
    }
    assert_eq!(zero_column, 200);
}

#[test]
fn phase_override_changes_photon_number() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pd");
    let o = bjj(
        &example("fig2_row1"),
        &out,
        &["phase-diagram", "--photon_number", "25"],
    );
    assert!(o.status.success());
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["jtilde"], 0.25);
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ivreach(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ivreach")).args(args).output().expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn reach_writes_one_csv_per_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("expression.toml");
    let out = ivreach(&["reach", "--config", s(&cfg), "--out", s(tmp.path()), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for cell in 0..4 {
        let csv = std::fs::read_to_string(tmp.path().join(format!("cell_{cell:04}.csv"))).unwrap();
        assert!(csv.starts_with("t,xl_1,xl_2,xu_1,xu_2\n"));
        assert_eq!(csv.lines().count(), 62);
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cells"], 4);
}

#[test]
fn reach_json_mirrors_the_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("expression.toml");
    let out = ivreach(&["reach", "--config", s(&cfg), "--out", s(tmp.path()), "--format", "json", "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("reach.json")).unwrap()).unwrap();
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 4);
    assert_eq!(cells[0]["lower"].as_array().unwrap().len(), cells[0]["times"].as_array().unwrap().len());
    assert_eq!(v["summary"]["workers"], 2);
}

// An Euler tube of a thin initial state is not a bound for the exact flow.
#[test]
fn mc_check_reports_containment_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "thin.toml",
        r#"
integrator = "euler"
dt = 0.05
horizon = 1.0

[system]
kind = "pendulum"

[initial]
lower = [0.5, 0.0]
upper = [0.5, 0.0]

[monte_carlo]
samples = 5
"#,
    );
    let out = ivreach(&["mc-check", "--config", &cfg, "--out", s(&tmp.path().join("out"))]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(tmp.path().join("out/summary.json").exists());
}

#[test]
fn missing_config_is_an_error() {
    let out = ivreach(&["reach", "--config", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert_eq!(ivreach(&["reach"]).status.code(), Some(1));
}

#[test]
fn small_synthesis_is_certified() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "synth.toml",
        r#"
steps = 10
n_e = 5
certificate_samples = 20

[terminal]
lower = [-1.0, -2.0]
upper = [2.0, 2.0]

[optimizer]
outer_iterations = 1
max_iterations = 20
"#,
    );
    let out = ivreach(&["synth", "--config", &cfg, "--out", s(&tmp.path().join("out")), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/synthesis.json")).unwrap()).unwrap();
    assert_eq!(v["report"]["feedforward"].as_array().unwrap().len(), 10);
    assert_eq!(v["report"]["certificate"]["samples"], 20);
    assert_eq!(v["upper"].as_array().unwrap().len(), 11);
}

#[test]
fn bench_smoke_writes_a_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bench.toml",
        r#"
integrator = "euler"
dt = 0.1
horizon = 1.0

[system]
kind = "double_integrator"

[initial]
lower = [0.0, 0.0]
upper = [1.0, 1.0]

[controller]
kind = "interval"
lower = [-0.1]
upper = [0.1]

[benchmark]
divisions = [1, 2]
integrators = ["euler", "tsit5"]
"#,
    );
    let out = ivreach(&["bench", "--config", &cfg, "--out", s(tmp.path()), "--smoke"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("benchmark.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "divisions,cells,integrator,workers,mean_seconds,min_seconds,ratio");
    assert_eq!(rows.len(), 5);
}

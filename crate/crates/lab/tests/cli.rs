use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).env("LAB_THREADS", "1").output().unwrap()
}

fn config(name: &str, target: f64, tolerance: f64) -> String {
    format!(
        r#"{{
  "name": "{name}",
  "measure": {{ "variant": "LebesgueOnShape", "support": {{ "variant": "Ball", "radius": 0.5, "dim": 2 }}, "alpha": 2.0 }},
  "family": {{ "kind": "affine", "shape": {{ "variant": "Ball", "radius": 0.25, "dim": 2 }}, "a": 0.25, "b": 1.0 }},
  "generator": {{ "kind": "iid" }},
  "n_list": [64, 128, 256, 512, 1024],
  "poses": 1000,
  "seed": 2,
  "rule": {{ "target": {target}, "tolerance": {tolerance} }}
}}"#
    )
}

fn write(dir: &Path, file: &str, text: &str) {
    std::fs::write(dir.join(file), text).unwrap();
}

#[test]
fn run_writes_outputs_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", &config("half", 0.5, 0.2));
    let out = dir.path().join("o");
    let c = dir.path().join("c.json");
    let o = lab(&["run", c.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "7", "--poses", "1200"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("half: slope") && stdout.contains("PASS"), "{stdout}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["rows"][0]["n_poses"], 1200);
    assert!(out.join("plot.svg").is_file() && out.join("rows.csv").is_file());
}

#[test]
fn suite_exit_status_follows_the_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "empty.json", r#"{"configs": []}"#);
    let out = dir.path().join("out");
    let o = lab(&["suite", dir.path().join("empty.json").to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(out.join("summary.csv")).unwrap().lines().count(), 1);

    write(dir.path(), "ok.json", &config("ok", 0.5, 0.2));
    write(dir.path(), "bad.json", &config("bad", 3.0, 0.01));
    write(dir.path(), "m.json", r#"{"configs": ["ok.json", "bad.json"]}"#);
    let m = dir.path().join("m.json");
    let o = lab(&["suite", m.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let verdicts: Vec<&str> = summary.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(verdicts, ["PASS", "FAIL"]);

    let rows = std::fs::read(out.join("ok/rows.csv")).unwrap();
    lab(&["suite", m.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(std::fs::read(out.join("ok/rows.csv")).unwrap(), rows);
    assert_eq!(std::fs::read_to_string(out.join("summary.csv")).unwrap(), summary);
}

#[test]
fn errors_name_what_failed() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", r#"{"configs": ["gone.json"]}"#);
    let o = lab(&["suite", dir.path().join("m.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gone.json"));

    let o = lab(&["fit-beta", "hexagon"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hexagon"));
}

#[test]
fn probes_print_machine_readable_output() {
    let o = lab(&["fit-beta", "snowflake", "--quiet"]);
    assert!(o.status.success());
    let fit: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let beta = fit["beta_hat"].as_f64().unwrap();
    assert!((0.70..=0.78).contains(&beta), "{beta}");

    let o = lab(&["spectrum", "square", "--size", "128", "--quiet"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("lo,hi,energy\n"));
    // Shell energies add up to the area of the unit square.
    let total: f64 = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9, "{total}");

    let o = lab(&["cassels", "square", "-n", "4", "-m", "4", "--quiet"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["value"].as_f64().unwrap() > 0.0);
}

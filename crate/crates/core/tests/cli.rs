use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn kstab(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_kstab"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const INTERVAL: &str = r#"{"polytope": {"interval": ["-1", "1"]}}"#;

#[test]
fn slope_of_the_interval() {
    let v = json(&kstab(&["slope", "--config", "-"], INTERVAL));
    assert_eq!(v["command"], "slope");
    assert!((v["results"]["value"].as_f64().unwrap() - 2.0).abs() < 1e-14);
    let v = json(&kstab(&["slope", "--config", "-", "--pipeline", "exact"], INTERVAL));
    assert_eq!(v["results"]["value"], "2");
}

#[test]
fn both_pipelines_report_divergence() {
    let v = json(&kstab(&["futaki", "--config", "-", "--pipeline", "both"], r#"{
        "polytope": {"box": {"lo": ["0", "0"], "hi": ["1", "1"]}},
        "v": {"expr": "1 + p1"},
        "f": [{"grad": ["1", "0"], "offset": "-1/2"}, {"grad": ["0", "0"], "offset": "0"}]
    }"#));
    let r = &v["results"];
    assert_eq!(r["pipeline"], "both");
    assert!(r["float"].is_object() && r["exact"].is_object());
    for (_, d) in r["divergence"].as_object().unwrap() {
        assert!(d.as_f64().unwrap() <= 1e-11);
    }
}

#[test]
fn trivial_bundle_report() {
    let v = json(&kstab(&["pbundle", "report", "--config", "-", "--pipeline", "exact"], r#"{"factors": []}"#));
    let r = &v["results"];
    assert_eq!(r["verdict"], "exists");
    assert_eq!(r["theta"], "1 - z^2");
    assert_eq!(r["a1"], "0");
    assert_eq!(r["positivity"]["method"], "sturm");
}

#[test]
fn pbundle_futaki_at_chosen_points() {
    let v = json(&kstab(&["pbundle", "futaki", "--config", "-", "--z0", "-1/2,0,1/2"], r#"{"factors": []}"#));
    let r = &v["results"];
    assert_eq!(r["z0"].as_array().unwrap().len(), 3);
    let f = r["futaki"].as_array().unwrap();
    assert!((f[0].as_f64().unwrap() - f[2].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn malformed_weight_is_a_validation_error() {
    let out = kstab(&["slope", "--config", "-"], r#"{"polytope": {"interval": ["-1", "1"]}, "v": {"expr": "1 + * p1"}}"#);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("position 4"), "{err}");
}

#[test]
fn unknown_key_is_a_validation_error() {
    let out = kstab(&["slope", "--config", "-"], r#"{"polytop": {"interval": ["-1", "1"]}}"#);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("polytop"));
}

#[test]
fn nonpositive_weight_is_a_computation_error() {
    let out = kstab(&["slope", "--config", "-"], r#"{"polytope": {"interval": ["-1", "1"]}, "v": {"expr": "p1"}}"#);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn output_is_deterministic() {
    let args = ["pbundle", "report", "--config", "-", "--pipeline", "both"];
    let cfg = r#"{"factors": [{"d": 1, "scal": "2", "xi": "1/2", "c": "1"}]}"#;
    let a = kstab(&args, cfg);
    let b = kstab(&args, cfg);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_and_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("curve.csv");
    let o = kstab(
        &["pbundle", "report", "--config", "-", "--out", out.to_str().unwrap(), "--csv", csv.to_str().unwrap()],
        r#"{"factors": []}"#,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["command"], "pbundle-report");
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert!(lines.next().unwrap().contains("z0"));
    assert_eq!(lines.count(), 99);
}

#[test]
fn config_file_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.json");
    std::fs::write(&path, INTERVAL).unwrap();
    let v = json(&kstab(&["wext", "--config", path.to_str().unwrap(), "--pipeline", "exact"], ""));
    assert_eq!(v["command"], "wext");
    let missing = kstab(&["slope", "--config", dir.path().join("nope.json").to_str().unwrap()], "");
    assert_eq!(missing.status.code(), Some(2));
}

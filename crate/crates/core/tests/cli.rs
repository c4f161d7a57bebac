use std::process::Command;

fn sqmlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sqmlab")).args(args).output().expect("binary runs")
}

#[test]
fn unknown_experiment_exits_nonzero() {
    let out = sqmlab(&["no-such-experiment"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment"));
}

#[test]
fn trace_theorem_report_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("trace.cfg");
    std::fs::write(&cfg, "# small run\ncases = 12\nseed = 5\n").unwrap();
    let d = dir.path().to_str().unwrap();
    let out = sqmlab(&["trace-theorem", "--config", cfg.to_str().unwrap(), "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("trace-theorem.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["params"]["seed"], 5);
    assert_eq!(v["cases"].as_array().unwrap().len(), 12);
    assert_eq!(v["summary"]["all_pass"], true);
    assert!(v["summary"]["max_err"].as_f64().unwrap() < 1e-10);
}

#[test]
fn impossible_tolerance_fails_the_run() {
    let out = sqmlab(&["paw-conditioning", "--tol", "0", "--csv"]);
    assert!(!out.status.success());
    let csv = String::from_utf8_lossy(&out.stdout);
    assert!(csv.starts_with("key,value_re"));
    assert!(csv.contains(",false"));
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "cases 3\n").unwrap();
    let out = sqmlab(&["trace-theorem", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakram-verify")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

#[test]
fn q3_all_pass() {
    let o = run(&["--p", "3", "--format", "json", "--golden"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(&o);
    assert_eq!(v["version"], 1);
    let reports = v["reports"].as_array().unwrap();
    assert!(!reports.is_empty());
    assert!(reports.iter().all(|r| r["status"] == "pass"));
    let ids: Vec<&str> = reports.iter().map(|r| r["check"].as_str().unwrap()).collect();
    for id in ["dwork.zeta", "selfdual.gram", "resolvent.closed_form", "norm.x", "cft.vchi", "gauss.closed_form", "product.identity"] {
        assert!(ids.contains(&id), "missing {id}");
    }
}

#[test]
fn ambiguous_class_exits_two() {
    // eps class 4 of (3, 2) has Tr(eps) = 0 mod 3
    let o = run(&["--p", "3", "--d", "2", "--eps", "4", "--format", "json"]);
    assert_eq!(code(&o), 2);
    let v = json(&o);
    let reports = v["reports"].as_array().unwrap();
    assert!(reports.iter().all(|r| r["status"] == "pass" || r["status"] == "ambiguous"));
    let pin = reports.iter().find(|r| r["check"] == "product.pinning").expect("pinning report");
    assert_eq!(pin["status"], "ambiguous");
    assert!(pin["witness"]["passing"].as_u64().unwrap() >= 1);
}

#[test]
fn unambiguous_class_of_degree_two_passes() {
    let o = run(&["--p", "3", "--d", "2", "--eps", "1", "--checks", "cft,gauss,product,resolvent,norm"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn ceiling_exits_three() {
    assert_eq!(code(&run(&["--p", "5", "--ceiling", "4"])), 3);
    let o = run(&["--p", "7", "--d", "3", "--format", "json"]);
    assert_eq!(code(&o), 3);
    let v = json(&o);
    assert_eq!(v["reports"][0]["check"], "resource");
    assert_eq!(v["reports"][0]["status"], "skipped");
}

#[test]
fn usage_errors_exit_four() {
    assert_eq!(code(&run(&[])), 4);
    assert_eq!(code(&run(&["--p", "4"])), 4);
    assert_eq!(code(&run(&["--p", "3", "--eps", "x"])), 4);
    assert_eq!(code(&run(&["--p", "3", "--eps", "2"])), 4);
    assert_eq!(code(&run(&["--p", "3", "--checks", "nonsense"])), 4);
    assert_eq!(code(&run(&["--p", "3", "--format", "yaml"])), 4);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn golden_output_is_byte_identical() {
    let args = ["--p", "5", "--format", "json", "--golden", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v["reports"].as_array().unwrap().iter().all(|r| r["ms"].is_null()));
}

#[test]
fn out_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = run(&["--p", "3", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["config"]["p"], 3);
}

#[test]
fn stretch_is_reported_as_skipped() {
    let o = run(&["--p", "3", "--stretch", "--format", "json", "--checks", "resolvent"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let s = v["reports"].as_array().unwrap().iter().find(|r| r["check"] == "resolvent.stretch").expect("stretch entry");
    assert_eq!(s["status"], "skipped");
}

#[test]
fn checks_filter_limits_groups() {
    let o = run(&["--p", "3", "--checks", "dwork,norm", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    for r in v["reports"].as_array().unwrap() {
        let id = r["check"].as_str().unwrap();
        assert!(id.starts_with("dwork.") || id.starts_with("norm."), "unexpected {id}");
    }
}

#[test]
fn text_format_has_summary() {
    let o = run(&["--p", "3", "--checks", "norm"]);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("norm.x"));
    assert!(s.lines().last().unwrap().contains("pass"));
}

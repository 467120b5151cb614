use std::path::Path;
use std::process::{Command, Output};

const P1: &str = r#"{"field":2,"vertices":2,"arrows":[[0,1]],"dims":[1,1],"maps":{"0":[[1]]}}"#;

fn stabkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabkit")).current_dir(dir).args(args).output().unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let w = |n: &str, s: &str| std::fs::write(dir.path().join(n), s).unwrap();
    w("p1.json", P1);
    w("zss.json", "[[-1,0],[1,1]]");
    w("zun.json", r#"[[-1,-1],[1,"1/2"]]"#);
    w("zbad.json", "[[1,-1],[0,1]]");
    w("mukai.json", r#"{"gram":[[0,1],[1,0]]}"#);
    w("zk.json", "[[1,1],[0,0]]");
    dir
}

fn report(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn semistable_hn_exits_zero() {
    let dir = setup();
    let out = stabkit(dir.path(), &["hn", "--input", "p1.json", "--charge", "zss.json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["result"]["semistable"], true);
    let vertices = serde_json::json!([{ "re": "0", "im": "0" }, { "re": "-1", "im": "2" }]);
    assert_eq!(r["result"]["polygon"]["vertices"], vertices);
}

#[test]
fn heart_violation_exits_one_with_witness() {
    let dir = setup();
    let out = stabkit(dir.path(), &["hn", "--input", "p1.json", "--charge", "zbad.json"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let heart = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "heart").unwrap();
    assert_eq!(heart["pass"], false);
    assert_eq!(heart["witness"]["class"], serde_json::json!([1, 0]));
}

#[test]
fn kernel_root_exits_one() {
    let dir = setup();
    let out = stabkit(dir.path(), &["cy2", "--lattice", "mukai.json", "--z", "zk.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn input_and_budget_errors_exit_two() {
    let dir = setup();
    let out = stabkit(dir.path(), &["hn", "--input", "missing.json", "--charge", "zss.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = stabkit(dir.path(), &["--budget", "1", "hn", "--input", "p1.json", "--charge", "zss.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = stabkit(dir.path(), &["hn", "--charge"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn svg_and_csv_outputs() {
    let dir = setup();
    let out = stabkit(
        dir.path(),
        &["--json", "r.json", "hn", "--input", "p1.json", "--charge", "zun.json", "--svg", "o.svg", "--truncated"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let svg = std::fs::read_to_string(dir.path().join("o.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("viewBox=\"0 0 600 600\""));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["result"]["semistable"], false);

    let path = r#"{"Z0":[[-1,-1],[1,"1/2"]],"W":[[0,0],[0,1]]}"#;
    std::fs::write(dir.path().join("path.json"), path).unwrap();
    let out = stabkit(dir.path(), &["--csv", "w.csv", "walls", "--object", "p1.json", "--path", "path.json"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("w.csv")).unwrap();
    assert!(csv.lines().count() >= 2 && csv.contains("1/2"));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mulkern(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mulkern")).args(args).env("MULKERN_CACHE_DIR", cache).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn status_of<'a>(rep: &'a Value, check: &str) -> &'a str {
    rep["checks"].as_array().unwrap().iter().find(|c| c["check"] == check).unwrap()["status"].as_str().unwrap()
}

#[test]
fn first_order_kernel_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = mulkern(&["kernel", "--family", "first_order_g", "--g", "1", "--N", "6"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["status"], "pass");
    assert_eq!(status_of(&rep, "kernel.oracle"), "pass");
    let checks: Vec<&str> = rep["checks"].as_array().unwrap().iter().map(|c| c["check"].as_str().unwrap()).collect();
    let mut sorted = checks.clone();
    sorted.sort();
    assert_eq!(checks, sorted);
    assert!(rep["checks"].as_array().unwrap().iter().all(|c| c["elapsed_ms"].is_null()));
    // 1/(y - x1 - x2): coefficient of x1 x2 y^-3 is 2
    let entries = rep["outputs"]["kernel"]["entries"].as_array().unwrap();
    let e = entries.iter().find(|e| e[0] == serde_json::json!([1, 1]) && e[1] == serde_json::json!([-3])).unwrap();
    assert_eq!(e[2], "2/1");
}

#[test]
fn verlinde_and_assoc_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = mulkern(&["verlinde", "--assoc", "--max-n", "20"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["checks"][0]["witness"]["levels"], 20);
    let out = mulkern(&["assoc", "--family", "heun4", "--params", "t=2,s1=1/3,s2=1/5,s3=1/7,r1=1/2", "--N", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(status_of(&report(&out), "assoc.associativity"), "pass");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["birat", "exp_laurent", "--seed", "7", "--samples", "10"];
    let a = mulkern(&args, dir.path());
    let b = mulkern(&args, dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = mulkern(&["sctable", "--family", "heun4", "--N", "4"], dir.path());
    let d = mulkern(&["sctable", "--family", "heun4", "--N", "4"], dir.path());
    assert_eq!(c.stdout, d.stdout);
    assert!(fs::read_dir(dir.path()).unwrap().count() >= 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(mulkern(&["nonsense"], dir.path()).status.code(), Some(2));
    assert_eq!(mulkern(&["kernel"], dir.path()).status.code(), Some(2));
    assert_eq!(mulkern(&["kernel", "--family", "heun4", "--params", "t=0.5"], dir.path()).status.code(), Some(2));
    assert_eq!(mulkern(&["oracle", "nope"], dir.path()).status.code(), Some(2));
    assert_eq!(mulkern(&["assoc", "--family", "heun_n"], dir.path()).status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"command":"kernel","family":"heun4","colour":"red"}"#).unwrap();
    assert_eq!(mulkern(&["--config", bad.to_str().unwrap()], dir.path()).status.code(), Some(2));

    let wrong = dir.path().join("wrong.json");
    fs::write(
        &wrong,
        r#"{"name":"wrong","kind":"exponential","slots":["a","b","y"],"phi":"a*b*y + y","psi":"1/y","root":null,
           "free":["x1","x2","x3","y","z"],"derived":[],"map":[["yt","y"]],
           "lhs":[["x1","x2","y"],["y","x3","z"]],"rhs":[["x1","x3","yt"],["yt","x2","z"]],"measure":["y","yt"]}"#,
    )
    .unwrap();
    let out = mulkern(&["birat", wrong.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["status"], "fail");
}

#[test]
fn config_file_and_report_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let rep = dir.path().join("report.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"command":"oracle","target":"heun_hypergeometric","params":{{"t":"3"}},"N":4,"M":6,"report":{:?}}}"#,
            rep.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = mulkern(&["--config", cfg.to_str().unwrap(), "--timings"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(v["config"]["params"]["t"], "3/1");
    assert!(v["checks"][0]["elapsed_ms"].is_u64());
}

#[test]
fn corrupted_cache_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sctable", "--family", "heun4", "--N", "3"];
    let first = mulkern(&args, dir.path());
    let file = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).find(|p| p.extension().is_some_and(|e| e == "json")).unwrap();
    let text = fs::read_to_string(&file).unwrap();
    let at = text.rfind("\"1/").unwrap();
    let mut edited = text.clone();
    edited.replace_range(at + 1..at + 2, "3");
    fs::write(&file, edited).unwrap();
    let second = mulkern(&args, dir.path());
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(fs::read_to_string(&file).unwrap(), text);
}

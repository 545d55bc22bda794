use std::path::Path;
use std::process::Command;

fn lowrank(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lowrank"))
        .args(args)
        .output()
        .unwrap()
}

const DIAG: &str = r#"{
  "name": "diag",
  "problem": {"source": "inline", "kind": "approx", "target": [[3,0,0],[0,2,0],[0,0,1]]},
  "solver": {"method": "crfdr", "rank": 2, "cone": "one_entry"}
}"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn run_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "diag.json", DIAG);
    let out = dir.path().join("out");
    let o = lowrank(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stdout).contains("checks: pass"));
    let trace = out.join("trace.csv");
    let o = lowrank(&["check", trace.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn bad_beta_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        &DIAG.replace("\"rank\": 2,", "\"rank\": 2, \"params\": {\"beta\": 1.5},"),
    );
    let o = lowrank(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta"));
}

#[test]
fn missing_files_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = lowrank(&["run", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let o = lowrank(&["check", dir.path().join("nope.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn solver_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // A starting rank above the bound is rejected by the solver.
    let cfg = write(
        dir.path(),
        "r.json",
        &DIAG.replace(
            "\"cone\": \"one_entry\"",
            "\"cone\": \"one_entry\", \"init\": {\"kind\": \"random\", \"rank\": 2, \"scale\": 1.0, \"seed\": 1}, \"method\": \"rank_increasing\", \"staging\": {\"r0\": 1, \"tau\": 0.5, \"eps\": 0.01, \"policy\": \"constant\"}",
        )
        .replace("\"method\": \"crfdr\", ", ""),
    );
    let o = lowrank(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn gen_is_deterministic_and_compare_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = lowrank(&[
            "gen",
            "--kind",
            "completion",
            "--m",
            "7",
            "--n",
            "6",
            "--data-rank",
            "2",
            "--mask-density",
            "0.5",
            "--seed",
            "4",
            "--quiet",
            "--out",
            d.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["target.txt", "mask.txt", "problem.json"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap()
        );
    }
    let problem = std::fs::read_to_string(a.join("problem.json")).unwrap();
    let cheap = write(
        &a,
        "cheap.json",
        &format!(
            r#"{{"name": "cheap", "problem": {problem}, "solver": {{"method": "crfdr", "rank": 3}}}}"#
        ),
    );
    let dense = write(
        &a,
        "dense.json",
        &format!(
            r#"{{"name": "dense", "problem": {problem}, "solver": {{"method": "rfdr", "rank": 3}}}}"#
        ),
    );
    let out = dir.path().join("cmp");
    let o = lowrank(&["compare", &cheap, &dense, "--out", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("comparison.csv").exists());
    let o = lowrank(&["compare", &cheap]);
    assert_eq!(o.status.code(), Some(2));
}

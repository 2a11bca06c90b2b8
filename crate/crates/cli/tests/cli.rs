use std::path::Path;
use std::process::{Command, Output};

use elastica::io::RunArtifact;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elastica"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn record(dir: &Path) -> RunArtifact {
    RunArtifact::read(&dir.join("record.json")).unwrap()
}

#[test]
fn solve_state_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("state");
    let o = run(&[
        "solve-state",
        "--level-fine",
        "7",
        "--K0",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "record.json",
        "config.txt",
        "data.csv",
        "curve.svg",
        "phase.svg",
        "design.svg",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let art = record(&out);
    assert!(art.success);
    assert_eq!(art.config.clamp_angle, 0.5);
    assert_eq!(art.table.unwrap().len(), 129);
}

#[test]
fn verify_succeeds_on_the_default_setup() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let art = record(dir.path());
    assert!(art.violations.is_empty());
    assert_eq!(art.flags.get("t_star_before_t2"), Some(&true));
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.cfg");
    std::fs::write(&file, "delta = 5\nK0 = 0.25\nlevel_fine = 6\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "solve-state",
        "--config",
        file.to_str().unwrap(),
        "--delta",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let art = record(&out);
    assert_eq!(art.config.delta, 7.0);
    assert_eq!(art.config.clamp_angle, 0.25);
    assert_eq!(art.config.level_fine, 6);
}

#[test]
fn invalid_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = run(&[
        "optimize-design",
        "--a",
        "1",
        "--b",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("a"));
    assert!(!out.exists());

    let o = run(&["solve-state", "--set", "no_such_key=1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_such_key"));
}

#[test]
fn unconverged_run_exits_with_one_and_lists_violations() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "optimize-design",
        "--level-fine",
        "7",
        "--set",
        "max_iter=2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let art = record(dir.path());
    assert!(!art.success);
    assert!(!art.violations.is_empty());
}

#[test]
fn sweep_writes_one_directory_per_start() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "sweep",
        "--level-fine",
        "7",
        "--workers",
        "2",
        "--set",
        "sweep=zero, random:1, random:2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let art = record(dir.path());
    assert_eq!(art.children.len(), 3);
    for child in &art.children {
        assert!(dir.path().join(&child.label).join("record.json").is_file());
    }
}

use std::path::Path;

use elastica::io::{run_experiment, write_outputs, Command, ExperimentConfig, NodalTable, RunArtifact};

fn config(command: Command, extra: &[(&str, &str)]) -> ExperimentConfig {
    let mut pairs: Vec<(String, String)> = vec![("level_fine".into(), "7".into()), ("out".into(), "unused".into())];
    pairs.extend(extra.iter().map(|(k, v)| (k.to_string(), v.to_string())));
    ExperimentConfig::resolve(command, None, &pairs).unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let name = path.strip_prefix(dir).unwrap().display().to_string();
                out.push((name, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn repeated_runs_write_identical_bytes() {
    for cfg in [
        config(Command::SolveState, &[("K0", "0.3")]),
        config(Command::OptimizeDesign, &[("init", "random:3")]),
        config(Command::Sweep, &[("sweep", "zero, random:1"), ("workers", "2")]),
    ] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        write_outputs(&run_experiment(&cfg), a.path()).unwrap();
        write_outputs(&run_experiment(&cfg), b.path()).unwrap();
        let (fa, fb) = (files(a.path()), files(b.path()));
        assert!(fa.iter().any(|(n, _)| n.ends_with(".svg")));
        assert_eq!(fa, fb, "{}", cfg.command);
    }
}

#[test]
fn record_write_read_write_is_stable() {
    let cfg = config(Command::Verify, &[]);
    let art = run_experiment(&cfg);
    assert!(art.success, "{:?} {:?}", art.error, art.violations);
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&art, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("record.json")).unwrap();
    let back = RunArtifact::read(&dir.path().join("record.json")).unwrap();
    assert_eq!(back, art);
    assert_eq!(back.to_json().unwrap(), text);

    let table = NodalTable::read_csv(&dir.path().join("data.csv")).unwrap();
    assert_eq!(Some(&table), art.table.as_ref());
    let again = dir.path().join("again.csv");
    table.write_csv(&again).unwrap();
    assert_eq!(
        std::fs::read(&again).unwrap(),
        std::fs::read(dir.path().join("data.csv")).unwrap()
    );

    let echoed = ExperimentConfig::from_text(&std::fs::read_to_string(dir.path().join("config.txt")).unwrap()).unwrap();
    assert_eq!(echoed, cfg);
}

#[test]
fn failures_are_recorded() {
    let art = run_experiment(&config(Command::OptimizeDesign, &[("max_iter", "2")]));
    assert!(!art.success);
    assert!(!art.violations.is_empty());

    let art = run_experiment(&config(Command::SolveState, &[("delta", "1e300")]));
    assert!(!art.success);
    assert!(art.error.is_some() || !art.violations.is_empty());
}

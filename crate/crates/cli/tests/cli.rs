//! End-to-end runs of the `coinlab` binary on the desk preset.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coincidence_cli::Document;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("coinlab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn coinlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coinlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("COINLAB_THREADS", "1")
        .output()
        .expect("spawn coinlab")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(str::to_string).collect()
}

#[test]
fn invalid_config_exits_2_and_names_the_field() {
    let dir = scratch("invalid");
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "preset = \"desk\"\nseed = 1\n[model]\nn_modes = 24\n").unwrap();
    let o = coinlab(&["--config", cfg.to_str().unwrap(), "verify", "lemma42"], &dir);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("n_modes"), "{}", stderr(&o));

    let o = coinlab(&["--preset", "desk", "--deltas", "4,2", "scan", "pinorm"], &dir);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("deltas"), "{}", stderr(&o));
}

#[test]
fn unknown_key_reports_its_line() {
    let dir = scratch("unknown");
    let cfg = dir.join("typo.toml");
    std::fs::write(&cfg, "[scan]\nsampels = 10\n").unwrap();
    let o = coinlab(&["--config", cfg.to_str().unwrap(), "suite"], &dir);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn exhausted_budget_exits_3_with_partial_results() {
    let dir = scratch("budget");
    let o = coinlab(&["--preset", "desk", "--seed", "5", "--budget", "1e-9", "scan", "pinorm"], &dir);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let doc = Document::read(&dir.join("scan-pinorm.json")).unwrap();
    assert!(doc.partial);
}

#[test]
fn scan_writes_json_csv_and_report() {
    let dir = scratch("scan");
    let o = coinlab(&["--preset", "desk", "--seed", "11", "scan", "sharp"], &dir);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = Document::read(&dir.join("scan-sharp.json")).unwrap();
    assert_eq!(doc.seed, Some(11));
    assert!(!doc.partial);
    assert_eq!(header(&dir.join("scan-sharp-sharp.csv")), ["parameter", "estimate", "bound", "samples", "eta"]);

    let o = coinlab(&["--preset", "desk", "verify", "energybounds", "--seed", "11"], &dir);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        header(&dir.join("verify-energybounds-energybounds.csv")),
        ["check", "residual", "tolerance", "kind", "samples", "eta", "passed"]
    );

    let o = coinlab(&["report"], &dir);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let md = std::fs::read_to_string(dir.join("report.md")).unwrap();
    assert!(md.contains("## scan sharp"));
    assert!(md.contains("## verify energybounds"));
}

#[test]
fn sampled_runs_without_seed_fail() {
    let dir = scratch("noseed");
    let o = coinlab(&["--preset", "desk", "scan", "clustering"], &dir);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use faultfuse::corpus::load_dataset;

const QUICK: &[&str] = &[
    "--population",
    "10",
    "--generations",
    "3",
    "--epochs",
    "20",
    "--hidden",
    "8",
    "--folds",
    "3",
    "--synth-tests",
    "60",
];

fn faultfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_faultfuse"))
        .args(args)
        .env_remove("FAULTFUSE_SEED")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = faultfuse(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn quick_run(sub: &str, extra: &[&str], out: &Path) -> Output {
    let mut args = vec![sub, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    args.extend_from_slice(QUICK);
    faultfuse(&args)
}

#[test]
fn repeated_runs_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let flags = ["--dataset", "median3", "--optimizer", "mopso", "--model", "rnn", "--seed", "7"];
    assert!(quick_run("run", &flags, &a).status.success());
    assert!(quick_run("run", &flags, &b).status.success());
    assert_eq!(fs::read(a.join("report.json")).unwrap(), fs::read(b.join("report.json")).unwrap());
    let tsv = fs::read_to_string(a.join("report.tsv")).unwrap();
    for model in ["rnn", "tarantula", "dstar"] {
        assert!(tsv.lines().any(|l| l.starts_with(&format!("{model}\tmedian3-s7\t"))), "{model} row missing");
    }
}

#[test]
fn unknown_optimizer_is_rejected_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let r = quick_run("run", &["--dataset", "median3", "--optimizer", "bogus"], &out);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("bogus"));
    assert!(!out.exists());
}

#[test]
fn synth_writes_loadable_deterministic_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        ok(&["synth", "--template", "median3", "--tests", "100", "--seed", "7", "--out", d.to_str().unwrap()]);
    }
    load_dataset(&a).unwrap();
    for f in fs::read_dir(&a).unwrap() {
        let name = f.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
}

#[test]
fn synth_fault_flag_sets_statement() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("s7");
    ok(&["synth", "--template", "median3", "--fault", "S7", "--out", d.to_str().unwrap()]);
    assert_eq!(fs::read_to_string(d.join("faults.txt")).unwrap().trim(), "7");
    let data = load_dataset(&d).unwrap();
    assert!(data.faults.contains(&7));
}

#[test]
fn empty_fault_file_names_the_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("nofault");
    ok(&["synth", "--template", "triangle", "--out", d.to_str().unwrap()]);
    fs::write(d.join("faults.txt"), "").unwrap();
    let out = dir.path().join("o");
    let r = quick_run("run", &["--dataset", d.to_str().unwrap()], &out);
    assert_eq!(r.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&r.stderr);
    assert!(msg.contains("nofault"), "{msg}");
    let marker = fs::read_to_string(out.join("ERROR")).unwrap();
    assert!(marker.contains("nofault"));
    assert_eq!(fs::read_dir(&out).unwrap().count(), 1);
}

#[test]
fn stages_match_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full");
    let staged = dir.path().join("staged");
    let flags = ["--dataset", "triangle:3,maxarray:2", "--model", "mlp"];
    assert!(quick_run("run", &flags, &full).status.success());
    for sub in ["extract", "select", "fuse", "train", "rank", "evaluate"] {
        let r = quick_run(sub, &flags, &staged);
        assert!(r.status.success(), "{sub}: {}", String::from_utf8_lossy(&r.stderr));
    }
    for f in ["features.csv", "pareto.json", "fused.json", "model.json", "scores.csv", "report.json"] {
        assert_eq!(fs::read(full.join(f)).unwrap(), fs::read(staged.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_and_seed_env() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    assert!(quick_run("run", &["--dataset", "median3:2"], &first).status.success());
    let cfg = first.join("resolved-config.json");
    let second = dir.path().join("second");
    ok(&["run", "--config", cfg.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(
        fs::read(first.join("report.json")).unwrap(),
        fs::read(second.join("report.json")).unwrap()
    );

    let third = dir.path().join("third");
    let out = Command::new(env!("CARGO_BIN_EXE_faultfuse"))
        .args(["run", "--config", cfg.to_str().unwrap(), "--out", third.to_str().unwrap()])
        .env("FAULTFUSE_SEED", "11")
        .output()
        .unwrap();
    assert!(out.status.success());
    let resolved = fs::read_to_string(third.join("resolved-config.json")).unwrap();
    assert!(resolved.contains("\"seed\": 11"));
}

#[test]
fn cross_dataset_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let r = quick_run("run", &["--train-on", "median3:1", "--test-on", "triangle:2,maxarray:3"], &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let tsv = fs::read_to_string(out.join("report.tsv")).unwrap();
    assert!(!tsv.contains("median3-s1"));
    assert!(tsv.contains("triangle-s2") && tsv.contains("maxarray-s3"));
    let bad = quick_run("run", &["--train-on", "median3:1"], &dir.path().join("y"));
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn matrix_sweep_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let r = faultfuse(&[
        "matrix",
        "--dataset",
        "median3:4",
        "--out",
        out.to_str().unwrap(),
        "--epochs",
        "5",
        "--folds",
        "3",
        "--synth-tests",
        "40",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let tsv = fs::read_to_string(out.join("matrix.tsv")).unwrap();
    let rows: Vec<Vec<&str>> = tsv.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 6);
    let count = |opt: &str| -> u64 { rows.iter().find(|r| r[0] == opt).unwrap()[9].parse().unwrap() };
    assert!(count("mopso") < count("mode"));
    assert!(count("mode") < count("nsga2"));
}

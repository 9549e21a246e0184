use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn tlpo(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tlpo"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn tlpo")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = tlpo(args, cwd);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn synth(dir: &Path, name: &str, extra: &[&str]) {
    let mut args = vec!["synth", "--m", "30", "--pos-fraction", "0.5", "--d", "10", "--signal", "1", "-o", name];
    args.extend_from_slice(extra);
    if !extra.contains(&"--seed") {
        args.extend_from_slice(&["--seed", "7"]);
    }
    ok(&args, dir);
}

fn eval_json(dir: &Path, args: &[&str]) -> Value {
    let mut full = vec!["eval", "--input", "train.csv"];
    full.extend_from_slice(args);
    serde_json::from_str(&ok(&full, dir)).expect("strict JSON")
}

fn roc_points(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let mut f = l.split(',');
            (f.next().unwrap().parse().unwrap(), f.next().unwrap().parse().unwrap())
        })
        .collect()
}

#[test]
fn synth_writes_requested_rows_deterministically() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "a.csv", &[]);
    synth(dir.path(), "b.csv", &[]);
    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(a.lines().count(), 31);
    assert!(a.starts_with("x0,x1,"));
    assert_eq!(a, fs::read_to_string(dir.path().join("b.csv")).unwrap());
    synth(dir.path(), "c.csv", &["--seed", "8"]);
    assert_ne!(a, fs::read_to_string(dir.path().join("c.csv")).unwrap());
}

#[test]
fn synth_rejects_degenerate_fraction() {
    let dir = TempDir::new().unwrap();
    let out = tlpo(&["synth", "--m", "30", "--pos-fraction", "1.0", "--d", "10"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fraction"));
}

#[test]
fn unknown_flags_and_missing_subcommand_are_rejected() {
    let dir = TempDir::new().unwrap();
    assert!(!tlpo(&[], dir.path()).status.success());
    assert!(!tlpo(&["synth", "--m", "30", "--pos-fraction", "0.5", "--d", "2", "--bogus"], dir.path()).status.success());
    assert!(!tlpo(&["frobnicate"], dir.path()).status.success());
}

#[test]
fn eval_reports_requested_estimates() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "train.csv", &[]);
    let doc = eval_json(dir.path(), &["--learner", "ridge", "--estimators", "loo,lpo,tlpo", "--seed", "1"]);
    let est = doc["estimates"].as_object().unwrap();
    assert_eq!(est.len(), 3);
    for v in est.values() {
        assert!((0.0..=1.0).contains(&v.as_f64().unwrap()));
    }
    let t = &doc["tlpo"];
    assert!((0.0..=1.0).contains(&t["xi"].as_f64().unwrap()));
    assert_eq!(t["scores"].as_array().unwrap().len(), 30);
    assert_eq!(t["max_circular_triads"], 1120);
    assert!(t["ties_broken"].is_u64());
    assert_eq!(doc, eval_json(dir.path(), &["--learner", "ridge", "--estimators", "loo,lpo,tlpo", "--seed", "1"]));
}

#[test]
fn eval_constant_and_class_frequency() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "train.csv", &[]);
    let doc = eval_json(dir.path(), &["--learner", "constant", "--estimators", "loo,lpo,tlpo,kfold-pooled"]);
    for v in doc["estimates"].as_object().unwrap().values() {
        assert_eq!(v.as_f64().unwrap(), 0.5);
    }
    let doc = eval_json(dir.path(), &["--learner", "classfreq", "--estimators", "loo,lpo"]);
    assert_eq!(doc["estimates"]["loo"].as_f64().unwrap(), 1.0);
    assert_eq!(doc["estimates"]["lpo"].as_f64().unwrap(), 0.5);
}

#[test]
fn eval_writes_tournament_files() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "train.csv", &[]);
    eval_json(dir.path(), &["--learner", "knn", "--estimators", "tlpo", "--tournament-csv", "g.csv", "--scores-csv", "s.csv"]);
    let g = fs::read_to_string(dir.path().join("g.csv")).unwrap();
    assert_eq!(g.lines().next(), Some("i,j,outcome"));
    assert_eq!(g.lines().count(), 1 + 435);
    let s = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(s.lines().next(), Some("unit,score,label"));
    assert_eq!(s.lines().count(), 31);
}

#[test]
fn eval_fails_on_single_class_input() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("train.csv"), "x0,label\n1,1\n2,1\n3,1\n").unwrap();
    let out = tlpo(&["eval", "--input", "train.csv", "--estimators", "loo"], dir.path());
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn eval_rejects_mismatched_learner_options() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "train.csv", &[]);
    assert!(!tlpo(&["eval", "--input", "train.csv", "--learner", "knn", "--lambda", "2"], dir.path()).status.success());
    eval_json(dir.path(), &["--learner", "knn", "--k", "5", "--estimators", "loo"]);
    let doc = eval_json(dir.path(), &["--learner", "ridge-centered", "--lambda", "2", "--estimators", "loo"]);
    assert_eq!(doc["learner"]["intercept"], "centered");
    assert_eq!(doc["learner"]["lambda"], 2.0);
}

#[test]
fn roc_tlpo_curve_is_well_formed() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "train.csv", &[]);
    let text = ok(&["roc", "--input", "train.csv", "--mode", "tlpo"], dir.path());
    assert!(text.starts_with("fpr,tpr,threshold\n"));
    let pts = roc_points(&text);
    assert_eq!(pts[0], (0.0, 0.0));
    assert_eq!(*pts.last().unwrap(), (1.0, 1.0));
    for w in pts.windows(2) {
        assert!(w[0].0 <= w[1].0 && w[0].1 <= w[1].1);
    }
}

#[test]
fn roc_constant_learner_is_diagonal() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "train.csv", &[]);
    let out = tlpo(&["roc", "--input", "train.csv", "--learner", "constant"], dir.path());
    assert!(out.status.success());
    let pts = roc_points(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(pts, vec![(0.0, 0.0), (1.0, 1.0)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("auc 0.5"));
}

#[test]
fn roc_test_mode_agrees_with_tlpo_on_strong_signal() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "train.csv", &["--mu", "1.5", "--test-rows", "20000", "--test-output", "test.csv"]);
    let auc = |args: &[&str]| -> f64 {
        let out = tlpo(args, dir.path());
        assert!(out.status.success());
        let err = String::from_utf8(out.stderr).unwrap();
        err.trim().strip_prefix("auc ").unwrap().parse().unwrap()
    };
    let t = auc(&["roc", "--input", "train.csv", "--mode", "tlpo", "-o", "a.csv"]);
    let h = auc(&["roc", "--input", "train.csv", "--mode", "test", "--test", "test.csv", "-o", "b.csv"]);
    assert!((t - h).abs() <= 0.1, "tlpo {t} vs test {h}");
    assert!(!tlpo(&["roc", "--input", "train.csv", "--mode", "test"], dir.path()).status.success());
}

#[test]
fn experiment_preset_writes_full_grid() {
    let dir = TempDir::new().unwrap();
    ok(&["experiment", "--preset", "paper-synthetic", "--reps", "2", "--n-test", "500", "--seed", "42", "-o", "out"], dir.path());
    let report = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(report.lines().count(), 121);
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["rows"], 120);
    assert_eq!(manifest["report_sha256"].as_str().unwrap().len(), 64);

    ok(&["experiment", "--preset", "paper-synthetic", "--reps", "2", "--n-test", "500", "--seed", "42", "-o", "again"], dir.path());
    assert_eq!(report, fs::read_to_string(dir.path().join("again/report.csv")).unwrap());
}

#[test]
fn experiment_explicit_grid() {
    let dir = TempDir::new().unwrap();
    ok(
        &[
            "experiment", "--m", "12", "--fractions", "0.25,0.5", "--design", "3:1", "--learners", "random",
            "--estimators", "tlpo,kfold-averaged", "--folds", "3", "--reps", "4", "--n-test", "200", "-o", "out",
        ],
        dir.path(),
    );
    let report = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(report.lines().count(), 1 + 2 * 2);
    assert!(report.contains(",random,tlpo,"));
    assert!(tlpo(&["experiment", "--preset", "paper-synthetic", "--m", "12", "-o", "x"], dir.path()).status.code() == Some(2));
}

#[test]
fn experiment_subsample_mode() {
    let dir = TempDir::new().unwrap();
    ok(&["synth", "--m", "200", "--pos-fraction", "0.4", "--d", "4", "--signal", "2", "-o", "pool.csv"], dir.path());
    ok(
        &["experiment", "--subsample", "pool.csv", "--take", "20", "--reps", "3", "--fractions", "0.2,0.5", "--estimators", "loo,tlpo", "-o", "out"],
        dir.path(),
    );
    let report = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(report.lines().count(), 1 + 2 * 2 * 2);
    assert!(report.lines().skip(1).all(|l| l.starts_with("subsample,20,")));
}

#[test]
fn experiment_fails_only_when_every_cell_fails() {
    let dir = TempDir::new().unwrap();
    ok(&["synth", "--m", "40", "--pos-fraction", "0.5", "--d", "2", "-o", "pool.csv"], dir.path());
    // 0.99 of 15 units rounds to 15 positives and leaves no negatives.
    let partial = tlpo(&["experiment", "--subsample", "pool.csv", "--take", "15", "--reps", "2", "--fractions", "0.3,0.99", "-o", "p"], dir.path());
    assert!(partial.status.success());
    assert!(String::from_utf8_lossy(&partial.stderr).contains("failed"));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("p/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["failures"].as_array().unwrap().len(), 1);

    let all = tlpo(&["experiment", "--subsample", "pool.csv", "--take", "15", "--reps", "2", "--fractions", "0.99", "-o", "q"], dir.path());
    assert!(!all.status.success());
}

#[test]
fn experiment_requires_output_directory() {
    let dir = TempDir::new().unwrap();
    assert!(!tlpo(&["experiment", "--reps", "1"], dir.path()).status.success());
}

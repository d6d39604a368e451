//! End-to-end tests driving the compiled binary: file schemas, determinism,
//! the standalone-vs-sweep identity, and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fairmtl"))
}

fn run_ok(args: &[&str], dir: &Path) -> Output {
    let output = bin().args(args).current_dir(dir).output().expect("spawn");
    assert!(
        output.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn write_spec(dir: &Path) -> PathBuf {
    let path = dir.join("halfplane.spec");
    fs::write(
        &path,
        "attribute = \"halfplane\"\nsensitive_labels = [\"green\"]\nunder_represented = [\"upper\"]\ntau = 0.5\n",
    )
    .unwrap();
    path
}

#[test]
fn gen_gmm2d_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        &["gen", "gmm2d", "--seed", "7", "--n", "300", "--out", "a"],
        dir.path(),
    );
    let first = fs::read(dir.path().join("a/gmm2d.csv")).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "f0,f1,label,halfplane");
    assert_eq!(text.lines().count(), 301); // header + rows

    // Every row's halfplane cell follows the x2 > 2 rule.
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let x2: f64 = cells[1].parse().unwrap();
        let expect = if x2 > 2.0 { "upper" } else { "lower" };
        assert_eq!(cells[3], expect, "row {line}");
    }

    run_ok(
        &["gen", "gmm2d", "--seed", "7", "--n", "300", "--out", "b"],
        dir.path(),
    );
    let second = fs::read(dir.path().join("b/gmm2d.csv")).unwrap();
    assert_eq!(first, second, "same seed must give byte-identical files");

    run_ok(
        &["gen", "gmm2d", "--seed", "8", "--n", "300", "--out", "c"],
        dir.path(),
    );
    let third = fs::read(dir.path().join("c/gmm2d.csv")).unwrap();
    assert_ne!(first, third);
}

#[test]
fn gen_planted_respects_cell_counts() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cells.toml"),
        r#"
d = 3
labels = ["fear", "anger"]

[[attributes]]
name = "gender"
categories = ["male", "female"]

[[cells]]
label = "fear"
identity = { gender = "female" }
count = 40
mean = [1.0, 0.0, 0.0]

[[cells]]
label = "anger"
identity = { gender = "male" }
count = 25
mean = [-1.0, 0.0, 0.0]
"#,
    )
    .unwrap();
    let out = run_ok(
        &["gen", "planted", "--cells", "cells.toml", "--seed", "3", "--out", "."],
        dir.path(),
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("instances: 65"));
    let text = fs::read_to_string(dir.path().join("planted.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "f0,f1,f2,label,gender");
    let fear_female = text
        .lines()
        .filter(|l| l.ends_with("fear,female"))
        .count();
    assert_eq!(fear_female, 40);
}

#[test]
fn audit_reports_active_pairs_and_tau_gate() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        &["gen", "gmm2d", "--seed", "5", "--n", "400", "--out", "."],
        dir.path(),
    );
    let out = run_ok(&["audit", "--data", "gmm2d.csv"], dir.path());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let green_upper = stdout
        .lines()
        .find(|l| l.contains("label=green") && l.contains("category=upper"))
        .expect("green/upper row");
    assert!(green_upper.contains("active=true"), "{green_upper}");

    // A high threshold deactivates every pair.
    let out = run_ok(&["audit", "--data", "gmm2d.csv", "--tau", "0.99"], dir.path());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(!stdout.contains("active=true"));
}

#[test]
fn train_is_deterministic_and_records_heads() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        &["gen", "gmm2d", "--seed", "9", "--n", "300", "--out", "."],
        dir.path(),
    );
    write_spec(dir.path());
    let train_args = [
        "train",
        "--data",
        "gmm2d.csv",
        "--method",
        "bias-aware",
        "--spec",
        "halfplane.spec",
        "--p",
        "4",
        "--epochs",
        "10",
        "--seed",
        "9",
    ];
    let mut first = train_args.to_vec();
    first.extend(["--out", "r1"]);
    run_ok(&first, dir.path());
    let mut second = train_args.to_vec();
    second.extend(["--out", "r2"]);
    run_ok(&second, dir.path());

    let a = fs::read(dir.path().join("r1/model_bias-aware.json")).unwrap();
    let b = fs::read(dir.path().join("r2/model_bias-aware.json")).unwrap();
    assert_eq!(a, b, "same seed must give identical model files");

    let model: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(model["bias_heads"].as_array().unwrap().len(), 1);

    let trace = fs::read_to_string(dir.path().join("r1/loss_bias-aware.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "epoch,loss");
    let mut epochs = 0;
    for line in lines {
        let loss: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(loss.is_finite());
        epochs += 1;
    }
    assert_eq!(epochs, 10);
}

#[test]
fn eval_report_round_trips_and_matches_printed_values() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        &["gen", "gmm2d", "--seed", "4", "--n", "300", "--out", "."],
        dir.path(),
    );
    run_ok(
        &[
            "train", "--data", "gmm2d.csv", "--method", "agnostic", "--p", "4", "--epochs", "15",
            "--seed", "4",
        ],
        dir.path(),
    );
    let out = run_ok(
        &[
            "eval",
            "--model",
            "model_agnostic.json",
            "--data",
            "gmm2d.csv",
            "--query",
            "green,halfplane,upper",
            "--seed",
            "4",
        ],
        dir.path(),
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report_text = fs::read_to_string(dir.path().join("report_agnostic.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&report_text).unwrap();
    let accuracy = report["accuracy"].as_f64().unwrap();
    // Printed 4-dp value equals the report value presented at 4dp.
    let shown = format!("{:.4}", (accuracy * 10_000.0).trunc() / 10_000.0);
    assert!(
        stdout.contains(&format!("accuracy = {shown}")),
        "stdout: {stdout} report accuracy: {accuracy}"
    );
    assert_eq!(report["associations"].as_array().unwrap().len(), 1);
}

#[test]
fn compare_rows_match_standalone_train_eval() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        &["gen", "gmm2d", "--seed", "11", "--n", "300", "--out", "."],
        dir.path(),
    );
    write_spec(dir.path());
    let common = [
        "--data",
        "gmm2d.csv",
        "--spec",
        "halfplane.spec",
        "--query",
        "green,halfplane,upper",
        "--p",
        "4",
        "--epochs",
        "10",
        "--seed",
        "11",
    ];

    let mut compare_args = vec!["compare", "--method", "agnostic", "--method", "bias-aware"];
    compare_args.extend(common);
    run_ok(&compare_args, dir.path());
    let table = fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,accuracy,green_halfplane_upper_alpha,green_halfplane_upper_fairness,green_halfplane_upper_gamma"
    );
    let agnostic_row = lines.next().unwrap().to_string();
    assert!(agnostic_row.starts_with("agnostic,"));
    assert_eq!(lines.next().unwrap().split(',').count(), 5);

    // Rerun: byte-identical table.
    let mut rerun = vec!["compare", "--method", "agnostic", "--method", "bias-aware"];
    rerun.extend(common);
    run_ok(&rerun, dir.path());
    let table2 = fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    assert_eq!(table, table2);

    // Standalone train+eval of the agnostic method reproduces its sweep row
    // bit for bit.
    let mut train_args = vec!["train", "--method", "agnostic"];
    train_args.extend(common);
    run_ok(&train_args, dir.path());
    let mut eval_args = vec!["eval", "--model", "model_agnostic.json", "--method", "agnostic"];
    eval_args.extend(common);
    run_ok(&eval_args, dir.path());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report_agnostic.json")).unwrap())
            .unwrap();
    let assoc = &report["associations"][0];
    let expected_row = format!(
        "agnostic,{},{},{},{}",
        report["accuracy"].as_f64().unwrap(),
        assoc["alpha"].as_f64().unwrap(),
        assoc["fairness"].as_f64().unwrap(),
        assoc["gamma"].as_f64().unwrap()
    );
    assert_eq!(agnostic_row, expected_row);
}

#[test]
fn compare_via_config_file_with_p_grid() {
    let dir = tempfile::tempdir().unwrap();
    write_spec(dir.path());
    fs::write(
        dir.path().join("exp.toml"),
        r#"
seed = 13
out = "results"
specs = ["halfplane.spec"]
methods = ["agnostic", "bias-aware"]
queries = ["green,halfplane,upper"]

[dataset]
source = "gmm2d"
n = 240
split = 0.8

[train]
p = 4
epochs = 8
"#,
    )
    .unwrap();
    run_ok(
        &["compare", "--config", "exp.toml", "--p-grid", "2:4:2"],
        dir.path(),
    );
    assert!(dir.path().join("results/compare.csv").exists());
    let pgrid = fs::read_to_string(dir.path().join("results/pgrid.csv")).unwrap();
    let mut lines = pgrid.lines();
    assert!(lines.next().unwrap().starts_with("method,p,accuracy"));
    // 2 methods x 2 grid points
    assert_eq!(pgrid.lines().count(), 5);
    assert!(pgrid.lines().any(|l| l.starts_with("agnostic,2,")));
    assert!(pgrid.lines().any(|l| l.starts_with("bias-aware,4,")));
}

#[test]
fn boundary_grid_shape_and_degenerate_separation() {
    let dir = tempfile::tempdir().unwrap();
    // Near-zero spread: every red point sits at (2,1), every green at (2,4).
    run_ok(
        &[
            "gen", "gmm2d", "--seed", "2", "--n", "200", "--stddev", "1e-9", "--out", ".",
        ],
        dir.path(),
    );
    run_ok(
        &[
            "train", "--data", "gmm2d.csv", "--method", "agnostic", "--p", "4", "--epochs", "40",
            "--seed", "2",
        ],
        dir.path(),
    );
    run_ok(
        &[
            "boundary",
            "--model",
            "model_agnostic.json",
            "--resolution",
            "41",
        ],
        dir.path(),
    );
    let text = fs::read_to_string(dir.path().join("boundary.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 41 * 41);
    assert!(lines[0].starts_with("x1,x2,label,p_"));
    let mut labels_seen = std::collections::BTreeSet::new();
    let at = |x1: f64, x2: f64| -> usize {
        // nearest grid row
        let mut best = (f64::INFINITY, 0usize);
        for line in &lines[1..] {
            let cells: Vec<&str> = line.split(',').collect();
            let gx1: f64 = cells[0].parse().unwrap();
            let gx2: f64 = cells[1].parse().unwrap();
            let d = (gx1 - x1).powi(2) + (gx2 - x2).powi(2);
            if d < best.0 {
                best = (d, cells[2].parse().unwrap());
            }
        }
        best.1
    };
    for line in &lines[1..] {
        let label: usize = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(label <= 1);
        labels_seen.insert(label);
    }
    assert_eq!(labels_seen.len(), 2, "both classes appear on the grid");
    // The boundary crosses between the two component means.
    assert_ne!(at(2.0, 1.0), at(2.0, 4.0));
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    // Missing file -> I/O error (4).
    let out = bin()
        .args(["audit", "--data", "missing.csv"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));

    // Validation error (2): unknown method.
    run_ok(
        &["gen", "gmm2d", "--seed", "1", "--n", "50", "--out", "."],
        dir.path(),
    );
    let out = bin()
        .args(["train", "--data", "gmm2d.csv", "--method", "mystery", "--epochs", "1"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Validation error (2): boundary on a non-2D model.
    fs::write(
        dir.path().join("cells.toml"),
        r#"
d = 3
labels = ["a", "b"]
[[attributes]]
name = "g"
categories = ["x", "y"]
[[cells]]
label = "a"
identity = { g = "x" }
count = 30
[[cells]]
label = "b"
identity = { g = "y" }
count = 30
"#,
    )
    .unwrap();
    run_ok(
        &["gen", "planted", "--cells", "cells.toml", "--seed", "1", "--out", "."],
        dir.path(),
    );
    run_ok(
        &[
            "train", "--data", "planted.csv", "--method", "agnostic", "--p", "2", "--epochs", "2",
            "--seed", "1",
        ],
        dir.path(),
    );
    let out = bin()
        .args(["boundary", "--model", "model_agnostic.json"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn subsample_plan_flows_through_gen() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cells.toml"),
        r#"
d = 2
labels = ["fear", "anger"]
[[attributes]]
name = "gender"
categories = ["male", "female"]
[[cells]]
label = "fear"
identity = { gender = "male" }
count = 30
[[cells]]
label = "fear"
identity = { gender = "female" }
count = 30
[[cells]]
label = "anger"
identity = { gender = "male" }
count = 30
"#,
    )
    .unwrap();
    fs::write(dir.path().join("plan.txt"), "fear,gender,male,10\n").unwrap();
    let out = run_ok(
        &[
            "gen", "planted", "--cells", "cells.toml", "--plan", "plan.txt", "--seed", "6",
            "--out", ".",
        ],
        dir.path(),
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("instances: 70"), "{stdout}");
    let text = fs::read_to_string(dir.path().join("planted.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with("fear,male")).count(), 10);
    assert_eq!(text.lines().filter(|l| l.ends_with("fear,female")).count(), 30);
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const EXAMPLE: &str = "1 2 2\n1 3 1\n2 3 2\n3 4 5\n4 5 3\n4 6 2\n5 6 2\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minplus")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn spd_writes_distances_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", EXAMPLE);
    let out_dir = dir.path().join("out");
    let r = report(&run(&["spd", "--input", g.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]));
    assert_eq!(r["subcommand"], "spd");
    assert_eq!(r["nodes"], Value::Null);
    assert_eq!(r["details"]["nodes"][0]["index"], 1);
    let csv = std::fs::read_to_string(out_dir.join("distances.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "0,2,1,6,9,8");
    assert!(out_dir.join("spd.report.json").exists());
}

#[test]
fn spd_handles_empty_and_disconnected_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let empty = write(dir.path(), "empty.txt", "# nothing\n");
    report(&run(&["spd", "--input", empty.to_str().unwrap(), "--out-dir", d, "--out", "e.csv"]));
    assert_eq!(std::fs::read_to_string(dir.path().join("e.csv")).unwrap().trim(), "");
    let split = write(dir.path(), "split.txt", "a b 1\nc d 1\n");
    report(&run(&["spd", "--input", split.to_str().unwrap(), "--out-dir", d, "--out", "s.csv"]));
    assert!(std::fs::read_to_string(dir.path().join("s.csv")).unwrap().contains("inf"));
}

#[test]
fn spd_reads_gml() {
    let dir = tempfile::tempdir().unwrap();
    let gml = write(
        dir.path(),
        "g.gml",
        "graph [ node [ id 0 ] node [ id 1 ] node [ id 2 ] edge [ source 0 target 1 value 3 ] edge [ source 1 target 2 ] ]",
    );
    let d = dir.path().to_str().unwrap();
    report(&run(&["spd", "--format", "gml", "--input", gml.to_str().unwrap(), "--out-dir", d]));
    let csv = std::fs::read_to_string(dir.path().join("distances.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "0,3,4");
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let g = write(dir.path(), "g.txt", EXAMPLE);
    let g = g.to_str().unwrap();
    assert_eq!(run(&["factor", "--input", g, "--rank", "0", "--out-dir", d]).status.code(), Some(2));
    assert_eq!(run(&["factor", "--input", g, "--out-dir", d]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.txt", "1 2 x\n");
    assert_eq!(run(&["spd", "--input", bad.to_str().unwrap(), "--out-dir", d]).status.code(), Some(3));
    let missing = dir.path().join("missing.txt");
    assert_eq!(run(&["spd", "--input", missing.to_str().unwrap(), "--out-dir", d]).status.code(), Some(3));
    let neg = write(dir.path(), "neg.csv", "0,-1\n-2,0\n");
    let args = ["spd", "--format", "matrix-csv", "--input", neg.to_str().unwrap(), "--out-dir", d];
    assert_eq!(run(&args).status.code(), Some(4));
    let split = write(dir.path(), "split.txt", "a b 1\nc d 1\n");
    let args = ["factor", "--input", split.to_str().unwrap(), "--rank", "1", "--out-dir", d];
    assert_eq!(run(&args).status.code(), Some(4));
    assert_eq!(run(&["assign", "--factors", missing.to_str().unwrap(), "--out-dir", d]).status.code(), Some(3));
}

#[test]
fn factor_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", EXAMPLE);
    let outputs: Vec<Vec<u8>> = ["a", "b"]
        .iter()
        .map(|sub| {
            let out_dir = dir.path().join(sub);
            let args = ["factor", "--input", g.to_str().unwrap(), "--rank", "2", "--restarts", "20", "--seed", "7"];
            let mut args = args.to_vec();
            args.extend(["--out-dir", out_dir.to_str().unwrap()]);
            report(&run(&args));
            let mut bytes = std::fs::read(out_dir.join("factors.json")).unwrap();
            bytes.extend(std::fs::read(out_dir.join("factors_left.csv")).unwrap());
            bytes
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn factor_modes_report_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", EXAMPLE);
    let d = dir.path().to_str().unwrap();
    let actual = report(&run(&["factor", "--input", g.to_str().unwrap(), "--rank", "2", "--mode", "actual", "--out-dir", d]));
    assert!((actual["residuals"]["residual"].as_f64().unwrap() - 56f64.sqrt()).abs() < 1e-9);
    assert_eq!(actual["details"]["waypoints"], serde_json::json!([3, 6]));
    let general = report(&run(&["factor", "--input", g.to_str().unwrap(), "--rank", "2", "--mode", "general", "--out-dir", d]));
    assert!(general["residuals"]["residual"].as_f64().unwrap() <= 92f64.sqrt());
}

#[test]
fn assign_uses_argmin_and_flags_nonpositive_entries() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let f = write(
        dir.path(),
        "f.csv",
        "0.4722,7.7778\n0.9722,8.9778\n0.2222,6.7778\n5.4444,0.8889\n9.0278,1.0222\n8.0278,0.4222\n",
    );
    let r = report(&run(&["assign", "--factors", f.to_str().unwrap(), "--out-dir", d]));
    assert_eq!(r["details"]["assignments"], serde_json::json!([1, 1, 1, 2, 2, 2]));

    let tie = write(dir.path(), "tie.csv", "1,1\n0,2\n3,-1\n");
    let r = report(&run(&["assign", "--factors", tie.to_str().unwrap(), "--out-dir", d]));
    assert_eq!(r["details"]["assignments"], serde_json::json!([1, 1, 2]));
    assert_eq!(r["details"]["sentinel_nodes"], serde_json::json!([2, 3]));
    let csv = std::fs::read_to_string(dir.path().join("assignments.csv")).unwrap();
    assert_eq!(csv.lines().nth(2).unwrap(), "2,2,1,inf,0.5,1");

    let single = write(dir.path(), "one.csv", "3\n1\n2\n");
    let r = report(&run(&["assign", "--factors", single.to_str().unwrap(), "--out-dir", d]));
    assert_eq!(r["details"]["assignments"], serde_json::json!([1, 1, 1]));
}

#[test]
fn assign_reads_factor_json_with_labels() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "x y 1\ny z 1\n");
    let d = dir.path().to_str().unwrap();
    report(&run(&["factor", "--input", g.to_str().unwrap(), "--rank", "1", "--out-dir", d]));
    let fjson = dir.path().join("factors.json");
    report(&run(&["assign", "--factors", fjson.to_str().unwrap(), "--out-dir", d]));
    let csv = std::fs::read_to_string(dir.path().join("assignments.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("1,x,1,"));
}

#[test]
fn regress_solves_both_norms() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let a = write(dir.path(), "a.csv", "0,0\n1,0\n0,1\n");
    let y = write(dir.path(), "y.csv", "0\n1\n1\n");
    let (a, y) = (a.to_str().unwrap(), y.to_str().unwrap());
    let r = report(&run(&["regress", "--matrix", a, "--rhs", y, "--out-dir", d]));
    assert_eq!(r["details"]["outcome"]["solution"], serde_json::json!([0.5, 0.5]));
    assert_eq!(r["residuals"]["residual_norm"], 0.5);
    let r = report(&run(&["regress", "--matrix", a, "--rhs", y, "--norm", "2", "--out-dir", d]));
    assert!((r["residuals"]["residual_norm"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
    let code = run(&["regress", "--matrix", a, "--rhs", y, "--x0", a, "--out-dir", d]).status.code();
    assert_eq!(code, Some(2));
}

#[test]
fn baselines_and_curves_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let g = write(dir.path(), "g.txt", EXAMPLE);
    let g = g.to_str().unwrap();
    let r = report(&run(&["baseline", "--input", g, "--method", "nnmf", "--rank", "2", "--out-dir", d]));
    assert_eq!(r["parameters"]["target"], "adjacency");
    assert!(dir.path().join("baseline_w.csv").exists());

    // rank-3 classical matrix: the SVD curve vanishes at rank 3
    let mut rows = Vec::new();
    for i in 0..5 {
        let row: Vec<String> = (0..5).map(|j| ((i + 1) * (j + 2) + (i * i + 1) * j + (i % 2) * (j * j)).to_string()).collect();
        rows.push(row.join(","));
    }
    let m = write(dir.path(), "m.csv", &(rows.join("\n") + "\n"));
    let args = ["residual-curve", "--format", "matrix-csv", "--input", m.to_str().unwrap(), "--method", "svd", "--out-dir", d];
    let r = report(&run(&args));
    let curve: Vec<f64> = r["details"]["curve"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(curve[1] > 1e-6 && curve[2] < 1e-9, "{curve:?}");
    let csv = std::fs::read_to_string(dir.path().join("residual_curve.csv")).unwrap();
    assert!(csv.starts_with("rank,relative_residual\n1,"));
}

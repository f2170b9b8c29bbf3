use std::path::Path;
use std::process::{Command, Output};

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_central-hash"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = cli(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn stepwise_workflow() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--classes", "4", "--per-class", "40", "--query-per-class", "8", "--dim", "16", "--spread", "0.1", "--seed", "1", "--out-prefix", "blobs"]);
    for split in ["train", "query", "db"] {
        assert!(d.join(format!("blobs_{split}.csqf")).exists());
        assert!(d.join(format!("blobs_{split}.csql")).exists());
    }
    ok(d, &["gen-centers", "--k", "16", "--m", "4", "--method", "hadamard", "--out", "centers.csqh"]);
    ok(d, &["assign", "--centers", "centers.csqh", "--labels", "blobs_train.csql", "--out", "map.csqc"]);
    ok(d, &["train", "--features", "blobs_train.csqf", "--labels", "blobs_train.csql", "--centers-map", "map.csqc", "--epochs", "40", "--out-model", "model.csqm"]);
    ok(d, &["encode", "--model", "model.csqm", "--features", "blobs_query.csqf", "--out-codes", "q.csqc"]);
    ok(d, &["encode", "--model", "model.csqm", "--features", "blobs_db.csqf", "--out-codes", "db.csqc"]);
    ok(d, &["encode", "--model", "model.csqm", "--features", "blobs_train.csqf", "--out-codes", "train.csqc"]);
    ok(d, &["eval", "--db-codes", "db.csqc", "--db-labels", "blobs_db.csql", "--query-codes", "q.csqc", "--query-labels", "blobs_query.csql", "--map-n", "50", "--out-report", "report.csv"]);
    ok(d, &["distmat", "--codes", "train.csqc", "--assignments", "map.csqc", "--centers", "centers.csqh", "--out", "dist.csv"]);

    let report = std::fs::read_to_string(d.join("report.csv")).unwrap();
    let map: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("map_at_n,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(map > 0.9, "mAP {map}");
    let dist = std::fs::read_to_string(d.join("dist.csv")).unwrap();
    assert_eq!(dist.lines().count(), 1 + 16, "{dist}");
}

#[test]
fn missing_input_reports_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cli(tmp.path(), &["encode", "--model", "nope.csqm", "--features", "x.csqf", "--out-codes", "c.csqc"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error [encode]"), "{err}");
}

#[test]
fn bad_center_count_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cli(tmp.path(), &["gen-centers", "--k", "0", "--m", "4", "--out", "c.csqh"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error [gen-centers]"));
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn foldcons(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foldcons"))
        .args(args)
        .env_remove("FOLDCONS_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = foldcons(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Four users tagging overlapping items; `carol` only has one post.
fn raw_dump(dir: &Path) -> PathBuf {
    let mut text = String::from("userID\titemID\ttagID\n");
    let rows = [
        ("ann", "d1", "Rust"),
        ("ann", "d1", "lang"),
        ("ann", "d1", "rust"),
        ("ann", "d2", "rust"),
        ("ann", "d3", "web"),
        ("bob", "d1", "rust"),
        ("bob", "d2", "lang"),
        ("bob", "d3", "web"),
        ("bob", "d3", "http"),
        ("dan", "d2", "rust"),
        ("dan", "d3", "http"),
        ("dan", "d1", "lang"),
        ("carol", "d9", "misc"),
    ];
    for (u, i, t) in rows {
        text.push_str(&format!("{u}\t{i}\t{t}\n"));
    }
    let path = dir.join("dump.dat");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn ingest_prints_stats_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let raw = raw_dump(dir.path());
    let a = dir.path().join("a.snap");
    let b = dir.path().join("b.snap");
    let out = ok(&[
        "ingest",
        "--input",
        s(&raw),
        "--output",
        s(&a),
        "--format",
        "hetrec",
    ]);
    assert!(out.contains("| raw "), "{out}");
    // "Rust" and "rust" on the same post collapse into one assignment.
    assert!(out.contains("1 duplicates collapsed"), "{out}");
    ok(&[
        "ingest",
        "--input",
        s(&raw),
        "--output",
        s(&b),
        "--format",
        "hetrec",
    ]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.snap.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["subcommand"], "ingest");
    assert_eq!(manifest["config"]["format.preset"], "hetrec");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn ingest_core_drops_sparse_entities() {
    let dir = tempfile::tempdir().unwrap();
    let raw = raw_dump(dir.path());
    let core = dir.path().join("core.snap");
    let out = ok(&[
        "ingest",
        "--input",
        s(&raw),
        "--output",
        s(&core),
        "--format",
        "hetrec",
        "-p",
        "2",
    ]);
    let row = out
        .lines()
        .find(|l| l.contains("2-core"))
        .expect("core row");
    let cells: Vec<&str> = row
        .split('|')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .collect();
    // carol and d9 vanish; misc goes with them.
    assert_eq!(cells[1], "3", "{out}");
    assert_eq!(cells[2], "3", "{out}");
}

#[test]
fn data_dir_resolves_relative_inputs() {
    let dir = tempfile::tempdir().unwrap();
    raw_dump(dir.path());
    let out = dir.path().join("x.snap");
    let status = Command::new(env!("CARGO_BIN_EXE_foldcons"))
        .args([
            "ingest",
            "--input",
            "dump.dat",
            "--output",
            s(&out),
            "--format",
            "hetrec",
        ])
        .env("FOLDCONS_DATA_DIR", dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert!(out.exists());
}

fn synth(dir: &Path) -> PathBuf {
    let path = dir.join("synth.snap");
    ok(&[
        "synth",
        "--output",
        s(&path),
        "--seed",
        "3",
        "--users",
        "30",
        "--posts-per-user",
        "20",
    ]);
    path
}

#[test]
fn recommend_known_and_unknown_posts() {
    let dir = tempfile::tempdir().unwrap();
    let raw = raw_dump(dir.path());
    let snap = dir.path().join("a.snap");
    ok(&[
        "ingest",
        "--input",
        s(&raw),
        "--output",
        s(&snap),
        "--format",
        "hetrec",
    ]);
    let manifest = dir.path().join("rec.json");
    let out = ok(&[
        "recommend",
        "--corpus",
        s(&snap),
        "--user",
        "dan",
        "--item",
        "d1",
        "--k",
        "3",
        "--rerank",
        "foldcons",
        "--manifest",
        s(&manifest),
    ]);
    let tags: Vec<&str> = out.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert!(!tags.is_empty() && tags.len() <= 3, "{out}");
    assert!(tags.contains(&"rust"), "{out}");
    let m: Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["config"]["recommend.user"], "dan");

    let unknown = foldcons(&[
        "recommend",
        "--corpus",
        s(&snap),
        "--user",
        "zed",
        "--item",
        "d1",
    ]);
    assert!(unknown.status.success());
    assert!(unknown.stdout.is_empty());
    let err = String::from_utf8_lossy(&unknown.stderr);
    assert!(err.contains("unknown user 'zed'"), "{err}");
    // Without --manifest the manifest goes to stderr.
    assert!(err.contains("\"subcommand\""), "{err}");
}

#[test]
fn evaluate_writes_reports_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let snap = synth(dir.path());
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        ok(&[
            "evaluate",
            "--corpus",
            s(&snap),
            "--rerank",
            "adapted",
            "--k",
            "2..4",
            "--seed",
            "9",
            "--posts",
            "--workers",
            workers,
            "--out-dir",
            s(&out),
        ]);
        out
    };
    let a = run("a", "1");
    let b = run("b", "3");
    for f in ["report.csv", "report.md", "posts.jsonl"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let csv = fs::read_to_string(a.join("report.csv")).unwrap();
    assert!(csv.contains("# eval.seed = 9"), "{csv}");
    assert!(csv.contains("# split = leave-post-out"), "{csv}");
    assert!(!csv.contains("eval.workers"));
    assert!(csv.contains("run,top-2,top-3,top-4"), "{csv}");
    assert!(
        csv.contains("# report.negative_contributions = 0,0,0"),
        "{csv}"
    );
    let lines = fs::read_to_string(a.join("posts.jsonl")).unwrap();
    // Two runs over 30 test posts.
    assert_eq!(lines.lines().count(), 60);
    let m: Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 9);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn evaluate_fixed_split() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.tsv");
    let test = dir.path().join("test.tsv");
    fs::write(
        &train,
        "a\tx\tt1\na\ty\tt2\nb\tx\tt1\nb\tz\tt3\nc\ty\tt2\nc\tx\tt3\n",
    )
    .unwrap();
    fs::write(&test, "a\tz\tt3\nb\ty\tt2\n").unwrap();
    let out = dir.path().join("out");
    ok(&[
        "evaluate",
        "--train",
        s(&train),
        "--test",
        s(&test),
        "--recommender",
        "baseline",
        "--rerank",
        "foldcons",
        "--pool",
        "10",
        "--k",
        "1..3",
        "--out-dir",
        s(&out),
    ]);
    let md = fs::read_to_string(out.join("report.md")).unwrap();
    assert!(md.contains("split = fixed"), "{md}");
    assert!(md.contains("foldcons gain (%)"), "{md}");
}

#[test]
fn study_train_graph() {
    let dir = tempfile::tempdir().unwrap();
    let snap = synth(dir.path());
    let out = dir.path().join("study");
    let table = ok(&[
        "study",
        "--corpus",
        s(&snap),
        "--kind",
        "reference",
        "--recommender",
        "baseline",
        "--out-dir",
        s(&out),
    ]);
    assert!(table.contains("ref 4"), "{table}");
    assert!(out.join("reference.csv").exists() && out.join("manifest.json").exists());

    let model = dir.path().join("model.bin");
    ok(&[
        "train",
        "--corpus",
        s(&snap),
        "--output",
        s(&model),
        "--dim",
        "4",
        "--iterations",
        "2",
    ]);
    let rec = ok(&[
        "recommend",
        "--corpus",
        s(&snap),
        "--model",
        s(&model),
        "--recommender",
        "pitf",
        "--user",
        "u0",
        "--item",
        "topic0/item0",
    ]);
    assert!(rec.lines().count() <= 5);

    let edges = dir.path().join("graph.tsv");
    let summary = ok(&["graph", "--corpus", s(&snap), "--output", s(&edges)]);
    assert!(summary.contains("30 users"), "{summary}");
    assert!(fs::metadata(&edges).unwrap().len() > 0);
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let missing = foldcons(&[
        "graph",
        "--corpus",
        s(&dir.path().join("nope")),
        "--output",
        "x",
    ]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error: reading"));

    let snap = synth(dir.path());
    let bad = foldcons(&[
        "evaluate",
        "--corpus",
        s(&snap),
        "--k",
        "4..2",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(bad.status.code(), Some(1));
    let model = dir.path().join("m.bin");
    ok(&[
        "train",
        "--corpus",
        s(&snap),
        "--output",
        s(&model),
        "--dim",
        "2",
        "--iterations",
        "1",
    ]);
    let wrong = foldcons(&[
        "recommend",
        "--corpus",
        s(&snap),
        "--model",
        s(&model),
        "--user",
        "u0",
        "--item",
        "topic0/item0",
    ]);
    assert_eq!(
        wrong.status.code(),
        Some(1),
        "strec with --model is rejected"
    );

    let out = dir.path().join("never");
    let small_pool = foldcons(&[
        "evaluate",
        "--corpus",
        s(&snap),
        "--pool",
        "3",
        "--k",
        "5..10",
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(small_pool.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn recommend_agrees_with_library_and_explains() {
    use foldcons::ids::TagId;

    let dir = tempfile::tempdir().unwrap();
    let raw = raw_dump(dir.path());
    let snap = dir.path().join("a.snap");
    ok(&[
        "ingest",
        "--input",
        s(&raw),
        "--output",
        s(&snap),
        "--format",
        "hetrec",
    ]);
    let explain = dir.path().join("explain.tsv");
    let out = ok(&[
        "recommend",
        "--corpus",
        s(&snap),
        "--user",
        "dan",
        "--item",
        "d3",
        "--alpha",
        "1.0",
        "--rerank",
        "none",
        "--k",
        "10",
        "--explain",
        s(&explain),
        "--manifest",
        s(&dir.path().join("m.json")),
    ]);
    let got: Vec<String> = out
        .lines()
        .map(|l| l.split('\t').next().unwrap().to_owned())
        .collect();

    let corpus = foldcons::snapshot::read_snapshot(fs::read(&snap).unwrap().as_slice()).unwrap();
    let f = corpus.folksonomy();
    let d3 = corpus.dictionary.item("d3").unwrap();
    let mut by_tf: Vec<(u32, TagId)> = (0..f.dimensions().tags as u32)
        .map(TagId)
        .map(|t| (f.tf(t, d3), t))
        .filter(|&(n, _)| n > 0)
        .collect();
    by_tf.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let expect: Vec<String> = by_tf
        .iter()
        .map(|&(_, t)| corpus.dictionary.tag_name(t).to_owned())
        .collect();
    assert_eq!(got, expect);

    let rows = fs::read_to_string(&explain).unwrap();
    let mut lines = rows.lines();
    assert_eq!(lines.next(), Some("tag\tscore\tpcm\tboosted"));
    for line in lines {
        let v: Vec<f64> = line
            .split('\t')
            .skip(1)
            .map(|x| x.parse().unwrap())
            .collect();
        assert!((v[2] - (1.0 + v[1]) * v[0]).abs() < 1e-12, "{line}");
        assert!((0.0..=1.0).contains(&v[1]));
    }
    assert_eq!(rows.lines().count(), expect.len() + 1);
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sift_carve::fragmenter::write_dump;
use sift_carve::synthetic;
use sift_core::fragment::fragment_count;
use sift_core::{ClassLabel, FragmentSet, FragmentSize, LabelSet};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sift-carve"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn corpus(files_per_class: usize) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("corpus");
    synthetic::write_corpus(&root, files_per_class, 3).unwrap();
    (dir, root)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn scan_emits_sorted_manifest() {
    let (dir, root) = corpus(2);
    let out_path = dir.path().join("m.json");
    let out = run(&["scan", "--dataset", s(&root), "--fragment-size", "512", "--output", s(&out_path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 10);
    let paths: Vec<&str> = entries.iter().map(|e| e["path"].as_str().unwrap()).collect();
    let mut sorted = paths.clone();
    sorted.sort();
    assert_eq!(paths, sorted);
    assert_eq!(entries[0]["label"], "csv");
    assert!(entries[0]["size_bytes"].as_u64().unwrap() >= 1024);
}

#[test]
fn extract_summary_follows_count_law() {
    let (dir, root) = corpus(3);
    let dump = dir.path().join("frags.bin");
    let out = run(&["extract", "--dataset", s(&root), "--fragment-size", "512", "--seed", "9", "--output", s(&dump)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("frags.json")).unwrap()).unwrap();
    let size = FragmentSize::new(512).unwrap();
    for class in summary["classes"].as_array().unwrap() {
        let label = class["label"].as_str().unwrap();
        let expected: usize = std::fs::read_dir(root.join(label))
            .unwrap()
            .map(|e| fragment_count(e.unwrap().metadata().unwrap().len() as usize, size))
            .sum();
        assert_eq!(class["fragments"].as_u64().unwrap() as usize, expected, "{label}");
        assert_eq!(class["files"], 3);
    }
    assert_eq!(summary["classes"].as_array().unwrap().len(), 5);

    let again = dir.path().join("again.bin");
    run(&["extract", "--dataset", s(&root), "--fragment-size", "512", "--seed", "9", "--output", s(&again)]);
    assert_eq!(std::fs::read(&dump).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn extract_writes_feature_csv() {
    let (dir, root) = corpus(1);
    let dump = dir.path().join("f.bin");
    let csv = dir.path().join("features.csv");
    let out = run(&[
        "extract", "--dataset", s(&root), "--seed", "1", "--output", s(&dump), "--features-csv", s(&csv),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("b00,b01,"));
    assert!(header.ends_with("bfe,bff,label"));
    let rows = text.lines().skip(1).count();
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("f.json")).unwrap()).unwrap();
    assert_eq!(rows as u64, summary["fragments"].as_u64().unwrap());
}

#[test]
fn empty_dataset_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["extract", "--dataset", s(dir.path()), "--seed", "1", "--output", s(&dir.path().join("x.bin"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no usable files"));
}

#[test]
fn usage_errors() {
    let out = run(&["extract", "--dataset", ".", "--fragment-size", "500", "--seed", "1", "--output", "x"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["evaluate", "--dataset", ".", "--k", "1", "--seed", "1", "--report", "r.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_is_mandatory() {
    let (dir, root) = corpus(1);
    let out = run(&["train", "--dataset", s(&root), "--model", s(&dir.path().join("m.bin"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn config_file_supplies_settings() {
    let (dir, root) = corpus(4);
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "dataset = {:?}\nfragment_size = 1024\nseed = 5\nk = 4\ntrees = 5\nlabel_rule = \"parent-dir\"\n",
            s(&root)
        ),
    )
    .unwrap();
    let report = dir.path().join("r.json");
    let out = run(&["evaluate", "--config", s(&cfg), "--trees", "3", "--report", s(&report)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(v["config"]["fragment_size"], 1024);
    assert_eq!(v["config"]["k"], 4);
    assert_eq!(v["config"]["hyper"]["n_trees"], 3);
    assert!(dir.path().join("r.metrics.csv").exists());
    assert!(dir.path().join("r.confusion.csv").exists());
}

#[test]
fn zero_support_class_gives_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let labels: Vec<ClassLabel> = ["aaa", "bbb", "ccc"].iter().map(|l| ClassLabel::new(*l).unwrap()).collect();
    let mut set = FragmentSet::new(FragmentSize::new(32).unwrap(), LabelSet::new(labels).unwrap());
    for i in 0..6u8 {
        let data: Vec<u8> = if i % 2 == 0 { vec![b','; 32 * 6] } else { (0..192).map(|j| j as u8).collect() };
        set.push_file(&data, u16::from(i % 2), 1).unwrap();
    }
    let dump = dir.path().join("d.bin");
    write_dump(&dump, &set).unwrap();
    let report = dir.path().join("r.json");
    let out = run(&["evaluate", "--dump", s(&dump), "--k", "3", "--seed", "1", "--trees", "3", "--report", s(&report)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(report.exists());
}

#[test]
fn train_classify_inspect() {
    let (dir, root) = corpus(6);
    let model = dir.path().join("m.bin");
    let out = run(&["train", "--dataset", s(&root), "--seed", "2", "--trees", "20", "--model", s(&model)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // top-ranked byte for the comma-heavy class
    let out = run(&["inspect-weights", "--model", s(&model), "--class", "csv", "--top", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("0x2C"), "{text}");

    let out = run(&["inspect-weights", "--model", s(&model), "--class", "csv", "--top", "0"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);

    let out = run(&["inspect-weights", "--model", s(&model), "--class", "nope"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("csv, dbase3"));

    let empty = dir.path().join("empty");
    std::fs::write(&empty, b"").unwrap();
    let out = run(&["classify", "--model", s(&model), "--input", s(&empty)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());

    let odd = dir.path().join("odd");
    std::fs::write(&odd, vec![0u8; 700]).unwrap();
    let out = run(&["classify", "--model", s(&model), "--input", s(&odd)]);
    assert!(!out.status.success());
    let out = run(&["classify", "--model", s(&model), "--input", s(&odd), "--skip-tail"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);

    let bytes = std::fs::read(&model).unwrap();
    let truncated = dir.path().join("t.bin");
    std::fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
    let out = run(&["classify", "--model", s(&truncated), "--input", s(&empty)]);
    assert!(!out.status.success());
}

#[test]
fn classify_reads_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let (dir, root) = corpus(4);
    let model = dir.path().join("m.bin");
    run(&["train", "--dataset", s(&root), "--seed", "2", "--trees", "10", "--model", s(&model)]);
    let mut child = bin()
        .args(["classify", "--model", s(&model), "--input", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&[b' '; 1024]).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let offsets: Vec<&str> = text.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(offsets, ["0", "512"]);
}

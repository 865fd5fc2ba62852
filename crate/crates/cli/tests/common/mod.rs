//! Helpers shared by the CLI integration tests and the acceptance target.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_vcr");

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/corpus")
}

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

pub fn vcr(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

pub fn ok(args: &[&str]) -> Output {
    let out = vcr(args);
    assert!(
        out.status.success(),
        "vcr {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes predictions for a subject that is right exactly when
/// `delta_v < cutoff`, plus clean predictions and ground truth.
pub fn write_subject(manifest: &Path, cutoff: f64, path: &Path) {
    let text = std::fs::read_to_string(manifest).unwrap();
    let mut preds = String::from("sample_id,label\n");
    let mut images = std::collections::BTreeSet::new();
    for line in text.lines().skip(1) {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        let v = rec["delta_v"].as_f64().unwrap();
        let label = if v < cutoff { "dog" } else { "cat" };
        writeln!(preds, "{},{label}", rec["sample_id"].as_str().unwrap()).unwrap();
        images.insert(rec["image_id"].as_str().unwrap().to_string());
    }
    preds.push_str("image_id,label\n");
    for id in &images {
        writeln!(preds, "{id},dog").unwrap();
    }
    std::fs::write(path, preds).unwrap();
    let truth: String = std::iter::once("image_id,label\n".to_string())
        .chain(images.iter().map(|id| format!("{id},dog\n")))
        .collect();
    std::fs::write(path.with_file_name("truth.csv"), truth).unwrap();
}

/// Runs every subcommand into `dir` and returns the files it produced.
pub fn pipeline(dir: &Path) -> Vec<PathBuf> {
    let gen = dir.join("gen");
    ok(&[
        "generate",
        "--corpus",
        s(&corpus()),
        "--corruption",
        "gaussian_noise",
        "--n",
        "120",
        "--seed",
        "7",
        "--workers",
        "3",
        "--out",
        s(&gen),
    ]);
    let manifest = gen.join("manifest.jsonl");
    ok(&["coverage", s(&manifest), "--out", s(&dir.join("coverage.json"))]);

    let first = gen.join("images/gaussian_noise-000000.png");
    let dv = ok(&["delta-v", s(&corpus().join("scene_00.png")), s(&first)]);
    std::fs::write(dir.join("delta_v.txt"), dv.stdout).unwrap();

    let curve = ["--bins", "10", "--min-per-bin", "3"];
    let truth = dir.join("truth.csv");
    for (name, cutoff) in [("human", 0.6), ("model", 0.35)] {
        let preds = dir.join(format!("{name}.csv"));
        write_subject(&manifest, cutoff, &preds);
        let mut args = vec![
            "estimate",
            "--manifest",
            s(&manifest),
            "--predictions",
            s(&preds),
            "--truth",
            s(&truth),
            "--anchor-right",
            "chance",
        ];
        args.extend(curve);
        let out = dir.join(format!("{name}.json"));
        let curve_out = dir.join(format!("{name}.curve.csv"));
        args.extend(["--out", s(&out), "--curve-out", s(&curve_out)]);
        ok(&args);
    }
    ok(&[
        "compare",
        s(&dir.join("human.json")),
        s(&dir.join("model.json")),
        "--out",
        s(&dir.join("compare.json")),
    ]);

    let trials = dir.join("trials.csv");
    std::fs::write(
        &trials,
        "corruption_a,corruption_b,n,k\ngaussian_noise,shot_noise,40,20\ngaussian_noise,gaussian_blur,40,38\n",
    )
    .unwrap();
    ok(&["similar", "--trials", s(&trials), "--out", s(&dir.join("similar.json"))]);
    ok(&[
        "similar",
        "--curves",
        s(&dir.join("human.curve.csv")),
        s(&dir.join("model.curve.csv")),
        "--v-min",
        "0.2",
        "--out",
        s(&dir.join("overlap.json")),
    ]);
    ok(&[
        "plot-data",
        s(&dir.join("human.json")),
        s(&dir.join("model.json")),
        "--out",
        s(&dir.join("plot.csv")),
    ]);

    let mut files: Vec<PathBuf> = walk(dir);
    files.sort();
    files
}

pub fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}


/// Byte-compares two output trees; returns the number of files compared.
pub fn compare_trees(a: &Path, b: &Path) -> Result<usize, String> {
    let mut fa = walk(a);
    let mut fb = walk(b);
    fa.sort();
    fb.sort();
    let rel = |root: &Path, files: &[PathBuf]| -> Vec<PathBuf> {
        files.iter().map(|f| f.strip_prefix(root).unwrap().to_path_buf()).collect()
    };
    if rel(a, &fa) != rel(b, &fb) {
        return Err("runs produced different file sets".into());
    }
    for (x, y) in fa.iter().zip(&fb) {
        if std::fs::read(x).unwrap() != std::fs::read(y).unwrap() {
            return Err(format!("{} differs", x.strip_prefix(a).unwrap().display()));
        }
    }
    Ok(fa.len())
}

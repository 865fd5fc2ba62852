mod common;

use std::path::Path;

use common::*;

fn assert_valid(schema: &str, json: &serde_json::Value) {
    let text = std::fs::read_to_string(schema_dir().join(format!("{schema}.schema.json"))).unwrap();
    let schema: serde_json::Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(json).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}");
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn delta_v_of_identical_images() {
    let img = corpus().join("scene_00.png");
    let out = ok(&["delta-v", s(&img), s(&img)]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0.000000\n");
}

#[test]
fn usage_errors_exit_one() {
    let out = vcr(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(vcr(&[]).status.code(), Some(1));
    assert_eq!(vcr(&["--help"]).status.code(), Some(0));
    assert_eq!(vcr(&["estimate", "--help"]).status.code(), Some(0));

    let step = data_dir().join("step");
    let manifest = step.join("manifest.jsonl");
    let preds = step.join("predictions.csv");
    let base = ["estimate", "--manifest", s(&manifest), "--predictions", s(&preds)];
    // Accuracy without ground truth.
    assert_eq!(vcr(&base).status.code(), Some(1));
    let truth = step.join("truth.csv");
    for bad in [["--bins", "1"], ["--level", "1.0"], ["--anchor-right", "2"], ["--min-per-bin", "0"]] {
        let mut args = base.to_vec();
        args.extend(["--truth", s(&truth)]);
        args.extend(bad);
        assert_eq!(vcr(&args).status.code(), Some(1), "{bad:?}");
    }
    assert_eq!(vcr(&["generate", "--corpus", s(&corpus()), "--n", "3", "--out", "x"]).status.code(), Some(1));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.jsonl");
    let out = vcr(&["coverage", s(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.jsonl"));

    let preds = dir.path().join("dup.csv");
    std::fs::write(&preds, "sample_id,label\nstep-00001,dog\nstep-00001,cat\n").unwrap();
    let step = data_dir().join("step");
    let out = vcr(&[
        "estimate",
        "--manifest",
        s(&step.join("manifest.jsonl")),
        "--predictions",
        s(&preds),
        "--truth",
        s(&step.join("truth.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step-00001"));

    let img = corpus().join("scene_00.png");
    let out = vcr(&["delta-v", s(&img), s(&missing)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn step_classifier_fixture() {
    let step = data_dir().join("step");
    let out = ok(&[
        "estimate",
        "--manifest",
        s(&step.join("manifest.jsonl")),
        "--predictions",
        s(&step.join("predictions.csv")),
        "--truth",
        s(&step.join("truth.csv")),
        "--subject",
        "step",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid("vcr-report", &report);
    let r_hat = report["r_hat"].as_f64().unwrap();
    assert!((r_hat - 0.5).abs() <= 0.03, "r_hat {r_hat}");
    assert_eq!(report["observations"], 5000);
    assert_eq!(report["options"]["anchor_left"], 1.0);
}

#[test]
fn every_subcommand_is_reproducible_and_schema_valid() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(a.path());
    pipeline(b.path());
    compare_trees(a.path(), b.path()).unwrap();

    let dir = a.path();
    let manifest = std::fs::read_to_string(dir.join("gen/manifest.jsonl")).unwrap();
    let mut lines = manifest.lines();
    assert_valid("manifest-header", &serde_json::from_str(lines.next().unwrap()).unwrap());
    for line in lines {
        assert_valid("sample-record", &serde_json::from_str(line).unwrap());
    }
    assert_valid("coverage", &read_json(&dir.join("coverage.json")));
    assert_valid("vcr-report", &read_json(&dir.join("human.json")));
    assert_valid("vcr-report", &read_json(&dir.join("model.json")));
    assert_valid("comparison-report", &read_json(&dir.join("compare.json")));
    assert_valid("similarity-report", &read_json(&dir.join("similar.json")));
    assert_valid("overlap-report", &read_json(&dir.join("overlap.json")));

    // The human cutoff is higher, so humans lead.
    let cmp = read_json(&dir.join("compare.json"));
    assert_eq!(cmp["scenario"], "human-dominates");
    assert!(cmp["hmri"].as_f64().unwrap() < 1.0);
    let chance = read_json(&dir.join("human.json"))["options"]["anchor_right"].as_f64().unwrap();
    assert_eq!(chance, 1.0 / 16.0);
    let plot = std::fs::read_to_string(dir.join("plot.csv")).unwrap();
    assert!(plot.starts_with("subject,corruption,property,v,value,band_lo,band_hi\n"));
    assert_eq!(plot.lines().count(), 1 + 2 * 11);
}

//! Regenerates the step-classifier fixture: 5,000 records with uniform visual
//! change, a subject that is correct exactly when `delta_v < 0.5`, and the
//! matching ground truth.
//!
//! ```text
//! cargo run -p vcr-cli --example make_step_fixture -- crates/cli/tests/data/step
//! ```

use std::fmt::Write as _;

use rand::Rng;
use vcr_core::rng::rng_from_seed;
use vcr_core::testset::SampleRecord;
use vcr_core::{Manifest, ParamVector, VifConfig};

const N: usize = 5000;
const IMAGES: usize = 10;

fn main() -> vcr_core::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "step".into());
    let dir = std::path::Path::new(&dir);
    std::fs::create_dir_all(dir).map_err(|e| vcr_core::Error::InvalidArgument(e.to_string()))?;

    let mut rng = rng_from_seed(5);
    let mut manifest = Manifest::empty("gaussian_noise", 5, VifConfig::default());
    let mut preds = String::from("sample_id,label\n");
    for i in 0..N {
        let v: f64 = rng.random();
        let sample_id = format!("step-{i:05}");
        let image_id = format!("img{:02}", i % IMAGES);
        let label = if v < 0.5 { "dog" } else { "cat" };
        writeln!(preds, "{sample_id},{label}").unwrap();
        manifest.records.push(SampleRecord {
            sample_id: sample_id.clone(),
            image_id: image_id.clone(),
            corruption: "gaussian_noise".into(),
            params: ParamVector(vec![v / 2.0]),
            delta_v: v,
            original_path: format!("{image_id}.png"),
            corrupted_path: format!("images/{sample_id}.png"),
            seed: i as u64,
        });
    }
    preds.push_str("image_id,label\n");
    let mut truth = String::from("image_id,label\n");
    for j in 0..IMAGES {
        writeln!(preds, "img{j:02},dog").unwrap();
        writeln!(truth, "img{j:02},dog").unwrap();
    }
    manifest.save(dir.join("manifest.jsonl"))?;
    let write = |name: &str, text: &str| std::fs::write(dir.join(name), text).expect("writable fixture dir");
    write("predictions.csv", &preds);
    write("truth.csv", &truth);
    Ok(())
}

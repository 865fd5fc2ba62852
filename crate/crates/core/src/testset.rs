//! Test-set generation and the JSON Lines manifest.
//!
//! Record `i` draws its source image, parameters and corruption noise from
//! seeds derived from `(master_seed, i)` only, so the manifest is identical
//! whatever the number of worker threads.
//!
//! Manifest layout: a header line `{"corruption", "master_seed", "vif_config"}`
//! followed by one [`SampleRecord`] per line, in record order. Corrupted image
//! paths are relative to the manifest's directory.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corruptions::{apply_corruption, sample_params, CorruptionSpec, ParamVector};
use crate::error::{Error, Result};
use crate::image::{load_image, save_image, Image};
use crate::iqa::{delta_v_rgb, VifConfig};
use crate::rng::{derive_seed, rng_from_seed};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const IMAGE_DIR: &str = "images";

pub const DEFAULT_COVERAGE_BINS: usize = 40;
pub const DEFAULT_COVERAGE_MIN: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: String,
    pub image_id: String,
    pub corruption: String,
    pub params: ParamVector,
    pub delta_v: f64,
    pub original_path: String,
    pub corrupted_path: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub corruption: String,
    pub master_seed: u64,
    pub vif_config: VifConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub corruption: String,
    pub master_seed: u64,
    pub vif_config: VifConfig,
    pub records: Vec<SampleRecord>,
}

impl Manifest {
    pub fn empty(corruption: &str, master_seed: u64, vif_config: VifConfig) -> Self {
        Manifest {
            corruption: corruption.to_string(),
            master_seed,
            vif_config,
            records: Vec::new(),
        }
    }

    pub fn header(&self) -> ManifestHeader {
        ManifestHeader {
            corruption: self.corruption.clone(),
            master_seed: self.master_seed,
            vif_config: self.vif_config,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for r in &self.records {
            if r.corruption != self.corruption {
                return Err(Error::Mismatch(format!(
                    "record {} has corruption `{}`, manifest `{}`",
                    r.sample_id, r.corruption, self.corruption
                )));
            }
            if !(0.0..=1.0).contains(&r.delta_v) {
                return Err(Error::InvalidArgument(format!(
                    "record {}: delta_v {} outside [0, 1]",
                    r.sample_id, r.delta_v
                )));
            }
            if !seen.insert(r.sample_id.as_str()) {
                return Err(Error::DuplicateId {
                    path: "manifest".into(),
                    id: r.sample_id.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let line = |v: &dyn erased::Ser| v.to_line();
        writeln!(out, "{}", line(&self.header())).map_err(|e| Error::io("<manifest>", e))?;
        for r in &self.records {
            writeln!(out, "{}", line(r)).map_err(|e| Error::io("<manifest>", e))?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_jsonl_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_jsonl(BufReader::new(file), &path.display().to_string())
    }

    pub fn read_jsonl<R: BufRead>(reader: R, origin: &str) -> Result<Self> {
        let mut lines = reader.lines().enumerate().filter(|(_, l)| {
            l.as_ref().map_or(true, |s| !s.trim().is_empty())
        });
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::MissingHeader {
                path: origin.to_string(),
                expected: "manifest header line".into(),
            })?;
        let first = first.map_err(|e| Error::io(origin, e))?;
        let header: ManifestHeader = serde_json::from_str(&first).map_err(|e| Error::MissingHeader {
            path: origin.to_string(),
            expected: format!("manifest header line ({e})"),
        })?;
        let mut records = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let rec: SampleRecord = serde_json::from_str(&line)
                .map_err(|e| Error::parse(origin, format!("line {}: {e}", i + 1)))?;
            records.push(rec);
        }
        let m = Manifest {
            corruption: header.corruption,
            master_seed: header.master_seed,
            vif_config: header.vif_config,
            records,
        };
        m.validate()?;
        Ok(m)
    }
}

mod erased {
    pub trait Ser {
        fn to_line(&self) -> String;
    }

    impl<T: serde::Serialize> Ser for T {
        fn to_line(&self) -> String {
            serde_json::to_string(self).expect("manifest types always serialize")
        }
    }
}

/// A source image for generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceImage {
    pub image_id: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub vif_config: VifConfig,
    /// Worker threads; `0` uses the global rayon pool.
    pub workers: usize,
    /// Whether corrupted images are written under `out_dir/images`.
    pub write_images: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            vif_config: VifConfig::default(),
            workers: 0,
            write_images: true,
        }
    }
}

/// Lists `.png`, `.ppm` and `.pgm` files of a directory, sorted by file name,
/// with the file stem as image id.
pub fn scan_corpus(dir: impl AsRef<Path>) -> Result<Vec<SourceImage>> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("png" | "ppm" | "pgm")) {
            let image_id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            out.push(SourceImage { image_id, path });
        }
    }
    out.sort_by(|a, b| a.path.cmp(&b.path));
    if out.is_empty() {
        return Err(Error::NoData(format!("{}: no PNG/PPM/PGM images", dir.display())));
    }
    Ok(out)
}

fn to_rgb(img: Image) -> Result<Image> {
    if img.channels() == 3 {
        return Ok(img);
    }
    let data = img.data().iter().flat_map(|&v| [v, v, v]).collect();
    Image::new(img.width(), img.height(), 3, data)
}

/// Generates `n` corrupted samples and writes `manifest.jsonl` (and, unless
/// disabled, the corrupted images) under `out_dir`.
pub fn generate_testset(
    images: &[SourceImage],
    spec: &CorruptionSpec,
    n: usize,
    master_seed: u64,
    out_dir: impl AsRef<Path>,
    opts: &GenerateOptions,
) -> Result<Manifest> {
    let out_dir = out_dir.as_ref();
    if images.is_empty() {
        return Err(Error::InvalidArgument("no source images".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    spec.kind()?;
    opts.vif_config.validate()?;
    let sources: Vec<Image> = images
        .iter()
        .map(|s| load_image(&s.path).and_then(to_rgb))
        .collect::<Result<_>>()?;
    if opts.write_images {
        let dir = out_dir.join(IMAGE_DIR);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    } else {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    }

    let make = |i: usize| -> Result<SampleRecord> {
        let seed = derive_seed(master_seed, i as u64);
        let mut pick = rng_from_seed(derive_seed(seed, 0));
        let src = pick.random_range(0..images.len());
        let params = sample_params(spec, derive_seed(seed, 1));
        let corrupted = apply_corruption(spec, &params, &sources[src], derive_seed(seed, 2))?;
        let delta_v = delta_v_rgb(&sources[src], &corrupted, &opts.vif_config)?;
        let sample_id = format!("{}-{i:06}", spec.name);
        let rel = format!("{IMAGE_DIR}/{sample_id}.png");
        if opts.write_images {
            save_image(&corrupted, out_dir.join(&rel))?;
        }
        Ok(SampleRecord {
            sample_id,
            image_id: images[src].image_id.clone(),
            corruption: spec.name.clone(),
            params,
            delta_v,
            original_path: images[src].path.display().to_string(),
            corrupted_path: rel,
            seed,
        })
    };

    let records: Vec<SampleRecord> = if opts.workers == 0 {
        (0..n).into_par_iter().map(make).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| (0..n).into_par_iter().map(make).collect::<Result<_>>())?
    };

    let manifest = Manifest {
        corruption: spec.name.clone(),
        master_seed,
        vif_config: opts.vif_config,
        records,
    };
    manifest.save(out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Recomputes a record's visual change from the stored image pair.
pub fn recompute_delta_v(record: &SampleRecord, manifest_dir: &Path, cfg: &VifConfig) -> Result<f64> {
    let original = load_image(&record.original_path).and_then(to_rgb)?;
    let corrupted = load_image(manifest_dir.join(&record.corrupted_path)).and_then(to_rgb)?;
    delta_v_rgb(&original, &corrupted, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub coverage: f64,
    pub num_bins: usize,
    pub min_per_bin: usize,
    pub counts: Vec<usize>,
}

/// Share of equal-width visual change bins holding at least `min_per_bin`
/// records. Bins are `[j/B, (j+1)/B)` with the last one closed.
pub fn coverage(manifest: &Manifest, num_bins: usize, min_per_bin: usize) -> Result<CoverageReport> {
    coverage_of(manifest.records.iter().map(|r| r.delta_v), num_bins, min_per_bin)
}

pub fn coverage_of(
    values: impl IntoIterator<Item = f64>,
    num_bins: usize,
    min_per_bin: usize,
) -> Result<CoverageReport> {
    if num_bins == 0 {
        return Err(Error::InvalidArgument("num_bins must be positive".into()));
    }
    let mut counts = vec![0usize; num_bins];
    for v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("delta_v {v} outside [0, 1]")));
        }
        let j = ((v * num_bins as f64).floor() as usize).min(num_bins - 1);
        counts[j] += 1;
    }
    let covered = counts.iter().filter(|&&c| c >= min_per_bin).count();
    Ok(CoverageReport {
        coverage: covered as f64 / num_bins as f64,
        num_bins,
        min_per_bin,
        counts,
    })
}

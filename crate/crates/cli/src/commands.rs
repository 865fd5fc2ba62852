use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;
use vcr_core::corruptions::{load_spec_override, lookup};
use vcr_core::ingest::{
    join_accuracy, join_consistency, load_image_labels, parse_label_map, parse_predictions, LabelMap,
};
use vcr_core::iqa::delta_v_rgb;
use vcr_core::metrics::{estimate_vcr, EstimateOptions, Property};
use vcr_core::similarity::{analyze_trials, curves_overlap, load_trials};
use vcr_core::testset::{generate_testset, scan_corpus, CoverageReport, GenerateOptions};
use vcr_core::{load_image, Manifest, PerformanceCurve, VcrReport, VifConfig};

use crate::{
    CompareArgs, CoverageArgs, CurveArgs, DeltaVArgs, EstimateArgs, Failure, GenerateArgs, PlotDataArgs,
    SimilarArgs, VifArgs,
};

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn data(msg: impl Into<String>) -> Failure {
    Failure::Data(msg.into())
}

impl VifArgs {
    fn config(&self) -> Result<VifConfig, Failure> {
        let cfg = VifConfig {
            num_scales: self.vif_scales,
            sigma_noise_sq: self.vif_sigma_nsq,
            ..VifConfig::default()
        };
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        Ok(cfg)
    }
}

/// Writes `text` to `out`, or standard output when absent.
fn emit(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| data(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(path, text).map_err(|e| data(format!("{}: {e}", path.display())))?;
            info!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| data(e.to_string()))?;
    text.push('\n');
    emit(&text, out)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| data(format!("{}: {e}", path.display())))
}

pub fn generate(a: GenerateArgs) -> Outcome {
    let spec = match (&a.corruption, &a.spec) {
        (_, Some(path)) => {
            let spec = load_spec_override(path)?;
            if let Some(name) = a.corruption.as_deref().filter(|n| *n != spec.name) {
                return Err(usage(format!(
                    "--corruption {name} disagrees with `{}` in {}",
                    spec.name,
                    path.display()
                )));
            }
            spec
        }
        (Some(name), None) => lookup(name).map_err(|e| usage(e.to_string()))?,
        (None, None) => return Err(usage("one of --corruption or --spec is required")),
    };
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let images = scan_corpus(&a.corpus)?;
    info!(
        "generating {} `{}` samples from {} images (seed {})",
        a.n,
        spec.name,
        images.len(),
        a.seed
    );
    let opts = GenerateOptions {
        vif_config: a.vif.config()?,
        workers: a.workers,
        write_images: true,
    };
    let manifest = generate_testset(&images, &spec, a.n, a.seed, &a.out, &opts)?;
    info!("wrote {} records to {}", manifest.records.len(), a.out.display());
    Ok(())
}

pub fn delta_v(a: DeltaVArgs) -> Outcome {
    let cfg = a.vif.config()?;
    let original = load_image(&a.original)?;
    let corrupted = load_image(&a.corrupted)?;
    let dv = delta_v_rgb(&original, &corrupted, &cfg)?;
    println!("{dv:.6}");
    Ok(())
}

#[derive(Serialize)]
struct CoverageOutput {
    corruption: String,
    records: usize,
    #[serde(flatten)]
    report: CoverageReport,
}

pub fn coverage(a: CoverageArgs) -> Outcome {
    if a.bins == 0 {
        return Err(usage("--bins must be positive"));
    }
    let manifest = Manifest::load(&a.manifest)?;
    let report = vcr_core::coverage(&manifest, a.bins, a.min_per_bin)?;
    emit_json(
        &CoverageOutput {
            corruption: manifest.corruption.clone(),
            records: manifest.records.len(),
            report,
        },
        a.out.as_deref(),
    )
}

fn parse_unit(flag: &str, s: &str) -> Result<f64, Failure> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        _ => Err(usage(format!("{flag} expects a number in [0, 1], got `{s}`"))),
    }
}

impl CurveArgs {
    fn validate(&self) -> Outcome {
        if self.bins < 2 {
            return Err(usage("--bins must be at least 2"));
        }
        if self.min_per_bin < 1 {
            return Err(usage("--min-per-bin must be at least 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(usage("--level must lie strictly between 0 and 1"));
        }
        Ok(())
    }
}

enum RightAnchor {
    Chance,
    Value(f64),
}

pub fn estimate(a: EstimateArgs) -> Outcome {
    a.curve.validate()?;
    if a.property == Property::Accuracy && a.truth.is_none() {
        return Err(usage("--property accuracy needs --truth"));
    }
    let anchor_right = match a.curve.anchor_right.as_deref() {
        None => None,
        Some("chance") => Some(RightAnchor::Chance),
        Some(s) => Some(RightAnchor::Value(parse_unit("--anchor-right", s)?)),
    };
    let explicit_left = match a.curve.anchor_left.as_str() {
        "auto" => None,
        "none" => Some(None),
        s => Some(Some(parse_unit("--anchor-left", s)?)),
    };

    let manifest = Manifest::load(&a.manifest)?;
    let mut preds = parse_predictions(&a.predictions)?;
    if let Some(subject) = &a.subject {
        preds.subject = subject.clone();
    }
    if let Some(clean) = &a.clean {
        preds = preds.with_clean(load_image_labels(clean)?, &clean.display().to_string())?;
    }
    let lmap = match &a.label_map {
        Some(path) => parse_label_map(path)?,
        None => LabelMap::Identity,
    };
    // Chance level is one over the number of entry-level classes.
    let anchor_right = anchor_right.map(|a| match a {
        RightAnchor::Chance => 1.0 / lmap.num_classes() as f64,
        RightAnchor::Value(v) => v,
    });

    let (observations, auto_left) = match a.property {
        Property::Accuracy => {
            let truth = load_image_labels(a.truth.as_ref().expect("checked above"))?;
            let joined = join_accuracy(&manifest, &preds, &truth, &lmap)?;
            (joined.observations, joined.clean_accuracy)
        }
        Property::Consistency => (join_consistency(&manifest, &preds, &lmap)?, Some(1.0)),
    };
    let opts = EstimateOptions {
        num_bins: a.curve.bins,
        min_per_bin: a.curve.min_per_bin,
        anchor_left: explicit_left.unwrap_or(auto_left),
        anchor_right,
        level: Some(a.curve.level),
    };
    info!(
        "{} {} observations for {} on {}",
        observations.len(),
        a.property,
        preds.subject,
        manifest.corruption
    );
    let report = estimate_vcr(&preds.subject, &manifest.corruption, a.property, &observations, &opts)?;
    info!("r_hat = {:.6}", report.r_hat);

    let curve_out = a
        .curve_out
        .clone()
        .or_else(|| a.out.as_ref().map(|p| p.with_extension("csv")));
    if let Some(path) = &curve_out {
        let mut buf = Vec::new();
        report.curve.write_csv(&mut buf).map_err(|e| data(e.to_string()))?;
        emit(&String::from_utf8(buf).expect("CSV is UTF-8"), Some(path))?;
    }
    emit_json(&report, a.out.as_deref())
}

pub fn compare(a: CompareArgs) -> Outcome {
    let human: VcrReport = read_json(&a.human)?;
    let model: VcrReport = read_json(&a.model)?;
    let report = vcr_core::compare(&human, &model)?;
    info!(
        "{} vs {}: HMRI {:.4}, MRSI {:.4} ({:?})",
        report.subject, report.reference, report.hmri, report.mrsi, report.scenario
    );
    emit_json(&report, a.out.as_deref())
}

pub fn similar(a: SimilarArgs) -> Outcome {
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(usage("--threshold must lie in [0, 1]"));
    }
    if let Some(path) = &a.trials {
        let trials = load_trials(path)?;
        let report = analyze_trials(&trials, a.threshold)?;
        info!("{} pairs, {} classes", report.pairs.len(), report.classes.len());
        return emit_json(&report, a.out.as_deref());
    }
    let paths: Vec<PathBuf> = a.curves.unwrap_or_default();
    let [pa, pb] = paths.as_slice() else {
        return Err(usage("--curves takes exactly two CSV files"));
    };
    if !(0.0..=1.0).contains(&a.v_min) {
        return Err(usage("--v-min must lie in [0, 1]"));
    }
    let ca = PerformanceCurve::load_csv(pa)?;
    let cb = PerformanceCurve::load_csv(pb)?;
    let report = curves_overlap(&ca, &cb, a.v_min)?;
    emit_json(&report, a.out.as_deref())
}

pub fn plot_data(a: PlotDataArgs) -> Outcome {
    let mut out = String::from("subject,corruption,property,v,value,band_lo,band_hi\n");
    for path in &a.reports {
        let report: VcrReport = read_json(path)?;
        let band = report.curve.band();
        for (i, (v, y)) in report.curve.knots().iter().enumerate() {
            let (lo, hi) = match band.and_then(|b| b[i]) {
                Some((lo, hi)) => (lo.to_string(), hi.to_string()),
                None => (String::new(), String::new()),
            };
            writeln!(
                out,
                "{},{},{},{v},{y},{lo},{hi}",
                csv_field(&report.subject),
                csv_field(&report.corruption),
                report.property
            )
            .expect("writing to a String");
        }
    }
    emit(&out, a.out.as_deref())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

//! Prediction, ground-truth and label-map files, and their join against a
//! manifest into `(Δv, correct)` observations.
//!
//! A prediction file is CSV with a `sample_id,label` header. An optional
//! second section starts at an `image_id,label` row and lists predictions on
//! the clean originals; the same section may also live in its own file.
//! Human judgments may repeat a sample as `<sample_id>#<k>`; each repetition
//! is one observation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::testset::Manifest;

/// Entry-level classes used when no label map is given.
pub const DEFAULT_NUM_CLASSES: usize = 16;

const REPEAT_SEP: char = '#';

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub subject: String,
    pub entries: BTreeMap<String, String>,
    pub clean_entries: BTreeMap<String, String>,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Rows of a headerless CSV with every cell trimmed; blank lines dropped.
fn csv_rows(text: &str, origin: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::parse(origin, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let cells: Vec<String> = rec.iter().map(str::to_string).collect();
        if cells.iter().all(String::is_empty) {
            continue;
        }
        rows.push((line, cells));
    }
    Ok(rows)
}

fn is_header(cells: &[String], a: &str, b: &str) -> bool {
    cells.len() == 2 && cells[0].eq_ignore_ascii_case(a) && cells[1].eq_ignore_ascii_case(b)
}

fn two_cells(cells: Vec<String>, line: usize, origin: &str) -> Result<(String, String)> {
    match <[String; 2]>::try_from(cells) {
        Ok([id, label]) if !id.is_empty() && !label.is_empty() => Ok((id, label)),
        _ => Err(Error::parse(origin, format!("line {line}: expected two non-empty fields"))),
    }
}

fn insert_unique(map: &mut BTreeMap<String, String>, id: String, label: String, origin: &str) -> Result<()> {
    if map.contains_key(&id) {
        return Err(Error::DuplicateId { path: origin.to_string(), id });
    }
    map.insert(id, label);
    Ok(())
}

impl PredictionSet {
    pub fn parse(text: &str, subject: &str, origin: &str) -> Result<Self> {
        let rows = csv_rows(text, origin)?;
        let mut rows = rows.into_iter();
        let Some((_, first)) = rows.next() else {
            return Err(Error::NoData(format!("{origin}: empty prediction file")));
        };
        let mut clean_section = if is_header(&first, "sample_id", "label") {
            false
        } else if is_header(&first, "image_id", "label") {
            true
        } else {
            return Err(Error::MissingHeader {
                path: origin.to_string(),
                expected: "sample_id,label".into(),
            });
        };
        let mut set = PredictionSet {
            subject: subject.to_string(),
            ..Default::default()
        };
        for (line, cells) in rows {
            if !clean_section && is_header(&cells, "image_id", "label") {
                clean_section = true;
                continue;
            }
            let (id, label) = two_cells(cells, line, origin)?;
            let map = if clean_section { &mut set.clean_entries } else { &mut set.entries };
            insert_unique(map, id, label, origin)?;
        }
        Ok(set)
    }

    /// Merges a separate clean-prediction file (`image_id,label`).
    pub fn with_clean(mut self, clean: BTreeMap<String, String>, origin: &str) -> Result<Self> {
        for (id, label) in clean {
            insert_unique(&mut self.clean_entries, id, label, origin)?;
        }
        Ok(self)
    }

    /// Corrupted-sample predictions grouped by sample id with any `#k`
    /// repetition suffix removed.
    fn grouped(&self) -> HashMap<&str, Vec<&str>> {
        let mut out: HashMap<&str, Vec<&str>> = HashMap::new();
        for (id, label) in &self.entries {
            let base = id.split_once(REPEAT_SEP).map_or(id.as_str(), |(b, _)| b);
            out.entry(base).or_default().push(label);
        }
        out
    }
}

/// Subject name defaults to the file stem.
pub fn parse_predictions(path: impl AsRef<Path>) -> Result<PredictionSet> {
    let path = path.as_ref();
    let subject = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("subject")
        .to_string();
    PredictionSet::parse(&read_text(path)?, &subject, &path.display().to_string())
}

/// Parses an `image_id,label` file (clean predictions or ground truth).
pub fn parse_image_labels(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut rows = csv_rows(text, origin)?.into_iter();
    let Some((_, first)) = rows.next() else {
        return Err(Error::NoData(format!("{origin}: empty file")));
    };
    if !is_header(&first, "image_id", "label") {
        return Err(Error::MissingHeader {
            path: origin.to_string(),
            expected: "image_id,label".into(),
        });
    }
    let mut map = BTreeMap::new();
    for (line, cells) in rows {
        let (id, label) = two_cells(cells, line, origin)?;
        insert_unique(&mut map, id, label, origin)?;
    }
    Ok(map)
}

pub fn load_image_labels(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    parse_image_labels(&read_text(path)?, &path.display().to_string())
}

/// Fine label to entry-level class. `Identity` maps every label to itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelMap {
    Identity,
    Table(BTreeMap<String, String>),
}

impl LabelMap {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut rows = csv_rows(text, origin)?.into_iter();
        let Some((_, first)) = rows.next() else {
            return Err(Error::NoData(format!("{origin}: empty label map")));
        };
        if !is_header(&first, "fine_label", "entry_label") {
            return Err(Error::MissingHeader {
                path: origin.to_string(),
                expected: "fine_label,entry_label".into(),
            });
        }
        let mut map = BTreeMap::new();
        for (line, cells) in rows {
            let (fine, entry) = two_cells(cells, line, origin)?;
            insert_unique(&mut map, fine, entry, origin)?;
        }
        Ok(LabelMap::Table(map))
    }

    pub fn map_label<'a>(&'a self, label: &'a str) -> Result<&'a str> {
        match self {
            LabelMap::Identity => Ok(label),
            LabelMap::Table(m) => m
                .get(label)
                .map(String::as_str)
                .ok_or_else(|| Error::UnmappedLabel(label.to_string())),
        }
    }

    /// Number of entry-level classes; chance accuracy is its reciprocal.
    pub fn num_classes(&self) -> usize {
        match self {
            LabelMap::Identity => DEFAULT_NUM_CLASSES,
            LabelMap::Table(m) => m.values().collect::<BTreeSet<_>>().len(),
        }
    }
}

pub fn parse_label_map(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    LabelMap::parse(&read_text(path)?, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyJoin {
    pub observations: Vec<(f64, bool)>,
    /// Accuracy on the clean originals, when clean predictions were given.
    pub clean_accuracy: Option<f64>,
}

fn check_known_ids(manifest: &Manifest, preds: &PredictionSet) -> Result<()> {
    let known: BTreeSet<&str> = manifest.records.iter().map(|r| r.sample_id.as_str()).collect();
    let unknown: Vec<String> = preds
        .grouped()
        .into_keys()
        .filter(|id| !known.contains(id))
        .map(str::to_string)
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        let mut ids = unknown;
        ids.sort();
        Err(Error::Missing { what: "manifest records for predicted sample ids".into(), ids })
    }
}

/// Shared join: every manifest record must carry at least one prediction;
/// `reference` gives the label a prediction is compared with.
fn join<'a>(
    manifest: &'a Manifest,
    preds: &'a PredictionSet,
    lmap: &LabelMap,
    reference: impl Fn(&'a str) -> Option<&'a str>,
    what: &str,
) -> Result<Vec<(f64, bool)>> {
    check_known_ids(manifest, preds)?;
    let grouped = preds.grouped();
    let mut missing_pred = Vec::new();
    let mut missing_ref = Vec::new();
    let mut out = Vec::with_capacity(manifest.records.len());
    for r in &manifest.records {
        let Some(labels) = grouped.get(r.sample_id.as_str()) else {
            missing_pred.push(r.sample_id.clone());
            continue;
        };
        let Some(target) = reference(&r.image_id) else {
            missing_ref.push(r.image_id.clone());
            continue;
        };
        let target = lmap.map_label(target)?;
        for label in labels {
            out.push((r.delta_v, lmap.map_label(label)? == target));
        }
    }
    if !missing_pred.is_empty() {
        return Err(Error::Missing { what: "predictions for sample ids".into(), ids: missing_pred });
    }
    if !missing_ref.is_empty() {
        missing_ref.sort();
        missing_ref.dedup();
        return Err(Error::Missing { what: what.to_string(), ids: missing_ref });
    }
    Ok(out)
}

/// Correct iff the mapped prediction on the corrupted sample equals the mapped
/// ground truth of its source image.
pub fn join_accuracy(
    manifest: &Manifest,
    preds: &PredictionSet,
    truth: &BTreeMap<String, String>,
    lmap: &LabelMap,
) -> Result<AccuracyJoin> {
    let observations = join(
        manifest,
        preds,
        lmap,
        |id| truth.get(id).map(String::as_str),
        "ground truth for image ids",
    )?;
    let clean_accuracy = if preds.clean_entries.is_empty() {
        None
    } else {
        let mut hits = 0usize;
        let mut missing = Vec::new();
        for (id, label) in &preds.clean_entries {
            match truth.get(id) {
                Some(t) => hits += usize::from(lmap.map_label(label)? == lmap.map_label(t)?),
                None => missing.push(id.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::Missing { what: "ground truth for image ids".into(), ids: missing });
        }
        Some(hits as f64 / preds.clean_entries.len() as f64)
    };
    Ok(AccuracyJoin { observations, clean_accuracy })
}

/// Correct iff the mapped prediction on the corrupted sample equals the mapped
/// prediction on its clean source.
pub fn join_consistency(manifest: &Manifest, preds: &PredictionSet, lmap: &LabelMap) -> Result<Vec<(f64, bool)>> {
    join(
        manifest,
        preds,
        lmap,
        |id| preds.clean_entries.get(id).map(String::as_str),
        "clean predictions for image ids",
    )
}

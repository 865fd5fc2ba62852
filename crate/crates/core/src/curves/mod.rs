//! Binning of `(Δv, correct)` observations and the anchored, non-increasing
//! performance curve fitted to them.
//!
//! Observation `v` lands in bin `floor(v * (M - 1))`, so bins `0..M-1` have
//! width `1 / (M - 1)` and the last bin holds exactly `v = 1`. A bin is
//! represented by the midpoint of the values it can hold: `(j + 0.5) / (M - 1)`
//! for regular bins, and `1` for the last one. The fitted curve has a knot at
//! `v = 0` followed by one knot per bin.
//!
//! Fitting pipeline (recorded as [`FIT_METHOD`] in every report):
//! weighted pool-adjacent-violators on the non-missing bin proportions, clamp
//! between the anchors, a 3-point moving average with anchors held fixed, a
//! second isotonic pass, then linear interpolation onto the knot grid with
//! flat extension past the outermost fitted points.

mod isotonic;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub use isotonic::{pava_non_decreasing, pava_non_increasing};

pub const DEFAULT_BINS: usize = 40;
pub const DEFAULT_MIN_PER_BIN: u64 = 20;
pub const DEFAULT_LEVEL: f64 = 0.83;
pub const FIT_METHOD: &str = "weighted-pava+anchor-clamp+moving-average-3+pava, linear interpolation";

/// Per-bin observation and success counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerformanceHistogram {
    count: Vec<u64>,
    correct: Vec<u64>,
}

impl PerformanceHistogram {
    pub fn new(num_bins: usize) -> Result<Self> {
        if num_bins < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 bins, got {num_bins}"
            )));
        }
        Ok(PerformanceHistogram {
            count: vec![0; num_bins],
            correct: vec![0; num_bins],
        })
    }

    pub fn from_counts(count: Vec<u64>, correct: Vec<u64>) -> Result<Self> {
        if count.len() < 2 || count.len() != correct.len() {
            return Err(Error::InvalidArgument(
                "count and correct must have equal length >= 2".into(),
            ));
        }
        if count.iter().zip(&correct).any(|(n, k)| k > n) {
            return Err(Error::InvalidArgument("correct exceeds count".into()));
        }
        Ok(PerformanceHistogram { count, correct })
    }

    pub fn num_bins(&self) -> usize {
        self.count.len()
    }

    pub fn count(&self) -> &[u64] {
        &self.count
    }

    pub fn correct(&self) -> &[u64] {
        &self.correct
    }

    pub fn total(&self) -> u64 {
        self.count.iter().sum()
    }

    pub fn bin_index(&self, v: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("delta_v {v} outside [0, 1]")));
        }
        let m = self.num_bins();
        Ok(((v * (m - 1) as f64).floor() as usize).min(m - 1))
    }

    pub fn add(&mut self, v: f64, correct: bool) -> Result<()> {
        let j = self.bin_index(v)?;
        self.count[j] += 1;
        self.correct[j] += u64::from(correct);
        Ok(())
    }

    /// Adds another histogram's counts (per-thread partial histograms).
    pub fn merge(&mut self, other: &PerformanceHistogram) -> Result<()> {
        if other.num_bins() != self.num_bins() {
            return Err(Error::Mismatch("histograms differ in bin count".into()));
        }
        for j in 0..self.num_bins() {
            self.count[j] += other.count[j];
            self.correct[j] += other.correct[j];
        }
        Ok(())
    }

    /// Abscissa representing bin `j`.
    pub fn bin_center(&self, j: usize) -> f64 {
        bin_center(j, self.num_bins())
    }

    /// Knot abscissae of curves fitted on this grid: `0` then every bin.
    pub fn knot_grid(&self) -> Vec<f64> {
        knot_grid(self.num_bins())
    }
}

pub fn bin_center(j: usize, num_bins: usize) -> f64 {
    if j + 1 >= num_bins {
        1.0
    } else {
        (j as f64 + 0.5) / (num_bins - 1) as f64
    }
}

pub fn knot_grid(num_bins: usize) -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..num_bins).map(|j| bin_center(j, num_bins)))
        .collect()
}

/// Accumulates `(delta_v, correct)` observations into `num_bins` bins.
pub fn bin_observations(observations: &[(f64, bool)], num_bins: usize) -> Result<PerformanceHistogram> {
    let mut hist = PerformanceHistogram::new(num_bins)?;
    for &(v, ok) in observations {
        hist.add(v, ok)?;
    }
    Ok(hist)
}

/// Per-bin success rate where the bin holds at least `min_per_bin`
/// observations; `None` marks a missing bin.
pub fn raw_performance(hist: &PerformanceHistogram, min_per_bin: u64) -> Vec<Option<f64>> {
    let l = min_per_bin.max(1);
    hist.count
        .iter()
        .zip(&hist.correct)
        .map(|(&n, &k)| (n >= l).then(|| k as f64 / n as f64))
        .collect()
}

/// Monotone non-increasing piecewise-linear curve on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceCurve {
    /// `(v, value)` pairs, `v` strictly increasing from 0 to 1.
    knots: Vec<(f64, f64)>,
    /// Optional per-knot `(lo, hi)` confidence bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    band: Option<Vec<Option<(f64, f64)>>>,
    #[serde(default)]
    anchor_left: Option<f64>,
}

impl PerformanceCurve {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        let curve = PerformanceCurve {
            knots,
            band: None,
            anchor_left: None,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Constant curve, mostly for tests and reference comparisons.
    pub fn constant(value: f64) -> Result<Self> {
        PerformanceCurve::new(vec![(0.0, value), (1.0, value)])
    }

    pub fn with_band(mut self, band: Vec<Option<(f64, f64)>>) -> Result<Self> {
        self.band = Some(band);
        self.validate()?;
        Ok(self)
    }

    pub fn with_anchor_left(mut self, anchor: Option<f64>) -> Self {
        self.anchor_left = anchor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("invalid curve: {m}")));
        if self.knots.len() < 2 {
            return bad("needs at least two knots".into());
        }
        if self.knots[0].0 != 0.0 || self.knots[self.knots.len() - 1].0 != 1.0 {
            return bad("knots must start at v=0 and end at v=1".into());
        }
        for w in self.knots.windows(2) {
            if w[1].0.is_nan() || w[1].0 <= w[0].0 {
                return bad(format!("knot abscissae not increasing at v={}", w[1].0));
            }
            if w[1].1 > w[0].1 + 1e-12 {
                return bad(format!("values increase at v={}", w[1].0));
            }
        }
        if let Some((_, y)) = self.knots.iter().find(|(_, y)| !(-1e-12..=1.0 + 1e-12).contains(y)) {
            return bad(format!("value {y} outside [0, 1]"));
        }
        if let Some(band) = &self.band {
            if band.len() != self.knots.len() {
                return bad("band length differs from knot count".into());
            }
            for (&(v, y), b) in self.knots.iter().zip(band) {
                if let Some((lo, hi)) = b {
                    if !(*lo <= y + 1e-12 && y <= *hi + 1e-12) {
                        return bad(format!("band [{lo}, {hi}] excludes value {y} at v={v}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn band(&self) -> Option<&[Option<(f64, f64)>]> {
        self.band.as_deref()
    }

    pub fn anchor_left(&self) -> Option<f64> {
        self.anchor_left
    }

    /// Linear interpolation between knots; `v` is clamped to `[0, 1]`.
    pub fn value_at(&self, v: f64) -> f64 {
        interpolate(&self.knots, v.clamp(0.0, 1.0))
    }

    /// Confidence band at `v`, interpolated between neighbouring banded knots.
    pub fn band_at(&self, v: f64) -> Option<(f64, f64)> {
        let band = self.band.as_ref()?;
        let v = v.clamp(0.0, 1.0);
        let i = self.knots.partition_point(|&(x, _)| x < v);
        if i < self.knots.len() && self.knots[i].0 == v {
            return band[i];
        }
        let (a, b) = (band[i.checked_sub(1)?]?, band.get(i).copied().flatten()?);
        let (x0, x1) = (self.knots[i - 1].0, self.knots[i].0);
        let t = (v - x0) / (x1 - x0);
        Some((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)))
    }

    /// Writes `v,value,band_lo,band_hi` rows; band cells are empty when absent.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "v,value,band_lo,band_hi")?;
        for (k, &(v, y)) in self.knots.iter().enumerate() {
            match self.band.as_ref().and_then(|b| b[k]) {
                Some((lo, hi)) => writeln!(out, "{v},{y},{lo},{hi}")?,
                None => writeln!(out, "{v},{y},,")?,
            }
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec");
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, &path.display().to_string())
    }

    pub fn parse_csv(text: &str, origin: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(origin, e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["v", "value", "band_lo", "band_hi"] {
            return Err(Error::MissingHeader {
                path: origin.to_string(),
                expected: "v,value,band_lo,band_hi".into(),
            });
        }
        let num = |s: &str, line: u64| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::parse(origin, format!("line {line}: bad number `{s}`")))
        };
        let mut knots = Vec::new();
        let mut band = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::parse(origin, e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            knots.push((num(&rec[0], line)?, num(&rec[1], line)?));
            band.push(match (&rec[2], &rec[3]) {
                ("", "") => None,
                (lo, hi) => Some((num(lo, line)?, num(hi, line)?)),
            });
        }
        let curve = PerformanceCurve::new(knots)?;
        if band.iter().any(Option::is_some) {
            curve.with_band(band)
        } else {
            Ok(curve)
        }
    }
}

fn interpolate(points: &[(f64, f64)], v: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if v <= first.0 {
        return first.1;
    }
    if v >= last.0 {
        return last.1;
    }
    let i = points.partition_point(|&(x, _)| x <= v);
    let (x0, y0) = points[i - 1];
    let (x1, y1) = points[i];
    if x1 == x0 {
        return y1;
    }
    y0 + (v - x0) / (x1 - x0) * (y1 - y0)
}

/// Fits the anchored non-increasing curve to raw bin proportions.
///
/// `raw` comes from [`raw_performance`] on `hist`; bins are weighted by their
/// observation counts. `anchor_left` pins the value at `v = 0` (clean
/// accuracy, or 1 for the consistency of a deterministic model) and
/// `anchor_right` optionally pins `v = 1`.
pub fn fit_monotone_curve(
    raw: &[Option<f64>],
    hist: &PerformanceHistogram,
    anchor_left: Option<f64>,
    anchor_right: Option<f64>,
) -> Result<PerformanceCurve> {
    let m = hist.num_bins();
    if raw.len() != m {
        return Err(Error::Mismatch(format!(
            "{} raw values for {m} bins",
            raw.len()
        )));
    }
    for a in anchor_left.iter().chain(anchor_right.iter()) {
        if !(0.0..=1.0).contains(a) {
            return Err(Error::InvalidArgument(format!("anchor {a} outside [0, 1]")));
        }
    }
    if let (Some(l), Some(r)) = (anchor_left, anchor_right) {
        if r > l {
            return Err(Error::InvalidArgument(format!(
                "right anchor {r} above left anchor {l}"
            )));
        }
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for (j, p) in raw.iter().enumerate() {
        let Some(p) = *p else { continue };
        let x = hist.bin_center(j);
        if x >= 1.0 && anchor_right.is_some() {
            continue;
        }
        xs.push(x);
        ys.push(p);
        ws.push(hist.count[j] as f64);
    }
    if xs.is_empty() && anchor_left.is_none() && anchor_right.is_none() {
        return Err(Error::NoData("no populated bins and no anchors".into()));
    }

    let upper = anchor_left.unwrap_or(1.0);
    let lower = anchor_right.unwrap_or(0.0);
    let project = |vals: &[f64]| -> Vec<f64> {
        pava_non_increasing(vals, &ws)
            .into_iter()
            .map(|v| v.clamp(lower, upper))
            .collect()
    };
    let iso = project(&ys);

    // Moving average over [left anchor] ++ interior ++ [right anchor].
    let mut seq = Vec::with_capacity(iso.len() + 2);
    seq.extend(anchor_left);
    let offset = seq.len();
    seq.extend(&iso);
    seq.extend(anchor_right);
    let smoothed: Vec<f64> = (0..iso.len())
        .map(|i| {
            let k = i + offset;
            let lo = k.saturating_sub(1);
            let hi = (k + 1).min(seq.len() - 1);
            seq[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let fitted = project(&smoothed);

    let mut points = Vec::with_capacity(fitted.len() + 2);
    if let Some(a) = anchor_left {
        points.push((0.0, a));
    }
    points.extend(xs.iter().copied().zip(fitted));
    if let Some(a) = anchor_right {
        points.push((1.0, a));
    }

    let knots = hist
        .knot_grid()
        .into_iter()
        .map(|v| (v, interpolate(&points, v).clamp(0.0, 1.0)))
        .collect();
    Ok(PerformanceCurve::new(knots)?.with_anchor_left(anchor_left))
}

/// Exact area under the piecewise-linear curve over `[0, 1]`.
pub fn integrate_curve(curve: &PerformanceCurve) -> f64 {
    curve
        .knots
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

/// Standard-normal quantile for a two-sided interval at `level`.
pub fn z_for_level(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("level {level} outside (0, 1)")));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf((1.0 + level) / 2.0))
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Attaches pointwise Wilson intervals at confidence `level` to every knot
/// whose bin holds at least `min_per_bin` observations. Intervals are
/// centred on the raw bin proportion and widened where needed so that they
/// contain the fitted value.
pub fn confidence_band(
    hist: &PerformanceHistogram,
    curve: &PerformanceCurve,
    level: f64,
    min_per_bin: u64,
) -> Result<PerformanceCurve> {
    let z = z_for_level(level)?;
    let grid = hist.knot_grid();
    if curve.knots.len() != grid.len()
        || curve.knots.iter().zip(&grid).any(|(k, g)| (k.0 - g).abs() > 1e-12)
    {
        return Err(Error::Mismatch(
            "curve knots do not match the histogram's bin grid".into(),
        ));
    }
    let l = min_per_bin.max(1);
    let band = curve
        .knots
        .iter()
        .enumerate()
        .map(|(k, &(_, y))| {
            let j = k.checked_sub(1)?;
            let (n, s) = (hist.count[j], hist.correct[j]);
            (n >= l).then(|| {
                let (lo, hi) = wilson_interval(s, n, z);
                (lo.min(y), hi.max(y))
            })
        })
        .collect();
    curve.clone().with_band(band)
}

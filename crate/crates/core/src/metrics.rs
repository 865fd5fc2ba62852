//! VCR estimates and the human-relative comparison metrics.
//!
//! For a human curve `h` and a model curve `m` on `[0, 1]`:
//!
//! * `A_h`, `A_m` are the areas under each curve,
//! * `A_{h>m} = ∫ max(0, h - m)` and `A_{m>h} = ∫ max(0, m - h)` are the leads,
//! * `HMRI = 1 - A_{h>m} / A_h` is the share of human robustness the model
//!   replicates,
//! * `MRSI = A_{m>h} / A_m` is the share of model robustness above humans.
//!
//! Both curves are piecewise linear, so every area is computed exactly from
//! the merged knot set and the crossings of the difference.

use serde::{Deserialize, Serialize};

use crate::curves::{
    bin_observations, confidence_band, fit_monotone_curve, integrate_curve, raw_performance,
    PerformanceCurve, DEFAULT_BINS, DEFAULT_LEVEL, DEFAULT_MIN_PER_BIN, FIT_METHOD,
};
use crate::error::{Error, Result};

const SCENARIO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Accuracy,
    Consistency,
}

impl std::str::FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accuracy" => Ok(Property::Accuracy),
            "consistency" => Ok(Property::Consistency),
            other => Err(Error::InvalidArgument(format!(
                "property must be accuracy or consistency, got `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Property::Accuracy => "accuracy",
            Property::Consistency => "consistency",
        })
    }
}

/// Settings for [`estimate_vcr`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub num_bins: usize,
    pub min_per_bin: u64,
    /// Value pinned at `Δv = 0`: clean accuracy, or 1 for consistency.
    pub anchor_left: Option<f64>,
    pub anchor_right: Option<f64>,
    /// Confidence level of the attached band; `None` skips the band.
    pub level: Option<f64>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            num_bins: DEFAULT_BINS,
            min_per_bin: DEFAULT_MIN_PER_BIN,
            anchor_left: None,
            anchor_right: None,
            level: Some(DEFAULT_LEVEL),
        }
    }
}

/// Estimated VCR of one subject for one corruption and property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcrReport {
    pub subject: String,
    pub corruption: String,
    pub property: Property,
    pub r_hat: f64,
    pub observations: u64,
    pub options: EstimateOptions,
    pub fit_method: String,
    pub curve: PerformanceCurve,
}

/// Bins the observations, fits the anchored curve and integrates it.
pub fn estimate_vcr(
    subject: &str,
    corruption: &str,
    property: Property,
    observations: &[(f64, bool)],
    opts: &EstimateOptions,
) -> Result<VcrReport> {
    if observations.is_empty() {
        return Err(Error::NoData(format!("no observations for {subject}")));
    }
    let hist = bin_observations(observations, opts.num_bins)?;
    let raw = raw_performance(&hist, opts.min_per_bin);
    let mut curve = fit_monotone_curve(&raw, &hist, opts.anchor_left, opts.anchor_right)?;
    if let Some(level) = opts.level {
        curve = confidence_band(&hist, &curve, level, opts.min_per_bin)?;
    }
    Ok(VcrReport {
        subject: subject.to_string(),
        corruption: corruption.to_string(),
        property,
        r_hat: integrate_curve(&curve),
        observations: hist.total(),
        options: *opts,
        fit_method: FIT_METHOD.to_string(),
        curve,
    })
}

/// Sorted union of both curves' knot abscissae.
fn merged_grid(a: &PerformanceCurve, b: &PerformanceCurve) -> Vec<f64> {
    let mut xs: Vec<f64> = a
        .knots()
        .iter()
        .chain(b.knots())
        .map(|&(v, _)| v)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// `∫₀¹ max(0, a(v) - b(v)) dv`, exact for piecewise-linear curves.
pub fn lead_area(a: &PerformanceCurve, b: &PerformanceCurve) -> f64 {
    let xs = merged_grid(a, b);
    let diff: Vec<f64> = xs.iter().map(|&v| a.value_at(v) - b.value_at(v)).collect();
    xs.windows(2)
        .zip(diff.windows(2))
        .map(|(x, d)| positive_part_area(x[1] - x[0], d[0], d[1]))
        .sum()
}

/// Area of the positive part of a linear segment of width `w` going from
/// `d0` to `d1`.
fn positive_part_area(w: f64, d0: f64, d1: f64) -> f64 {
    if d0 >= 0.0 && d1 >= 0.0 {
        0.5 * w * (d0 + d1)
    } else if d0 <= 0.0 && d1 <= 0.0 {
        0.0
    } else {
        let pos = d0.max(d1);
        let t = pos / (d0 - d1).abs();
        0.5 * w * t * pos
    }
}

pub fn hmri(human: &PerformanceCurve, model: &PerformanceCurve) -> Result<f64> {
    let a_h = integrate_curve(human);
    if a_h <= 0.0 {
        return Err(Error::ZeroArea("human"));
    }
    Ok((1.0 - lead_area(human, model) / a_h).clamp(0.0, 1.0))
}

pub fn mrsi(human: &PerformanceCurve, model: &PerformanceCurve) -> Result<f64> {
    let a_m = integrate_curve(model);
    if a_m <= 0.0 {
        return Err(Error::ZeroArea("model"));
    }
    Ok((lead_area(model, human) / a_m).clamp(0.0, 1.0))
}

/// How two curves relate over the visual change range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// `0 <= HMRI < 1`, `MRSI = 0`: humans at least as good everywhere.
    HumanDominates,
    /// `HMRI = 1`, `MRSI > 0`: the model at least as good everywhere.
    ModelDominates,
    /// `HMRI < 1`, `MRSI > 0`: each leads somewhere.
    Mixed,
    /// `HMRI = 1`, `MRSI = 0`: the curves coincide.
    Equivalent,
}

impl Scenario {
    pub fn classify(a_h_gt_m: f64, a_m_gt_h: f64) -> Self {
        match (a_h_gt_m > SCENARIO_TOL, a_m_gt_h > SCENARIO_TOL) {
            (true, false) => Scenario::HumanDominates,
            (false, true) => Scenario::ModelDominates,
            (true, true) => Scenario::Mixed,
            (false, false) => Scenario::Equivalent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Areas {
    pub a_h: f64,
    pub a_m: f64,
    pub a_h_gt_m: f64,
    pub a_m_gt_h: f64,
}

/// Human-vs-model comparison for one corruption and property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub subject: String,
    pub reference: String,
    pub corruption: String,
    pub property: Property,
    pub r_hat: f64,
    pub hmri: f64,
    pub mrsi: f64,
    pub areas: Areas,
    pub scenario: Scenario,
}

/// Compares curves directly. A model with zero area cannot surpass anyone,
/// so its MRSI is reported as 0.
pub fn compare_curves(human: &PerformanceCurve, model: &PerformanceCurve) -> Result<(Areas, f64, f64, Scenario)> {
    let areas = Areas {
        a_h: integrate_curve(human),
        a_m: integrate_curve(model),
        a_h_gt_m: lead_area(human, model),
        a_m_gt_h: lead_area(model, human),
    };
    let hmri = hmri(human, model)?;
    let mrsi = if areas.a_m > 0.0 { mrsi(human, model)? } else { 0.0 };
    Ok((areas, hmri, mrsi, Scenario::classify(areas.a_h_gt_m, areas.a_m_gt_h)))
}

pub fn compare(human: &VcrReport, model: &VcrReport) -> Result<ComparisonReport> {
    if human.corruption != model.corruption || human.property != model.property {
        return Err(Error::Mismatch(format!(
            "cannot compare {}/{} with {}/{}",
            human.corruption, human.property, model.corruption, model.property
        )));
    }
    let (areas, hmri, mrsi, scenario) = compare_curves(&human.curve, &model.curve)?;
    Ok(ComparisonReport {
        subject: model.subject.clone(),
        reference: human.subject.clone(),
        corruption: model.corruption.clone(),
        property: model.property,
        r_hat: model.r_hat,
        hmri,
        mrsi,
        areas,
        scenario,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn konst(v: f64) -> PerformanceCurve {
        PerformanceCurve::constant(v).unwrap()
    }

    fn line(a: f64, b: f64) -> PerformanceCurve {
        PerformanceCurve::new(vec![(0.0, a), (1.0, b)]).unwrap()
    }

    #[test]
    fn lead_area_basics() {
        let c = line(0.9, 0.2);
        assert_eq!(lead_area(&c, &c), 0.0);
        assert!((lead_area(&konst(1.0), &konst(0.5)) - 0.5).abs() < 1e-15);
        assert_eq!(lead_area(&konst(0.5), &konst(1.0)), 0.0);
    }

    #[test]
    fn constant_gaps() {
        let (h, m) = (konst(1.0), konst(0.5));
        assert!((hmri(&h, &m).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(mrsi(&h, &m).unwrap(), 0.0);
        assert_eq!(hmri(&m, &h).unwrap(), 1.0);
        assert!((mrsi(&m, &h).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(hmri(&h, &h).unwrap(), 1.0);
        assert_eq!(mrsi(&h, &h).unwrap(), 0.0);
    }

    #[test]
    fn zero_area_errors() {
        assert!(matches!(hmri(&konst(0.0), &konst(0.5)), Err(Error::ZeroArea("human"))));
        assert!(matches!(mrsi(&konst(0.5), &konst(0.0)), Err(Error::ZeroArea("model"))));
    }

    #[test]
    fn crossing_triangles() {
        // Human 1 -> 0 crosses the constant 0.5 model at v = 0.5. Each lead is
        // a triangle with legs 0.5 and 0.5 (area 0.125) and both curves have
        // area 0.5, so HMRI = 1 - 0.125/0.5 and MRSI = 0.125/0.5.
        let (h, m) = (line(1.0, 0.0), konst(0.5));
        let (areas, hm, ms, sc) = compare_curves(&h, &m).unwrap();
        assert!((areas.a_h_gt_m - 0.125).abs() < 1e-15);
        assert!((areas.a_m_gt_h - 0.125).abs() < 1e-15);
        assert!((hm - 0.75).abs() < 1e-12);
        assert!((ms - 0.25).abs() < 1e-12);
        assert_eq!(sc, Scenario::Mixed);

        // Plateau-then-ramp human against a constant 0.4 model: leads of 0.2
        // each against areas of 0.4 each.
        let h = PerformanceCurve::new(vec![(0.0, 1.0), (7.0 / 30.0, 1.0), (17.0 / 30.0, 0.0), (1.0, 0.0)])
            .unwrap();
        let (areas, hm, ms, sc) = compare_curves(&h, &konst(0.4)).unwrap();
        assert!((areas.a_h - 0.4).abs() < 1e-12 && (areas.a_h_gt_m - 0.2).abs() < 1e-12);
        assert!((hm - 0.5).abs() < 1e-12 && (ms - 0.5).abs() < 1e-12);
        assert_eq!(sc, Scenario::Mixed);
    }

    #[test]
    fn scenarios() {
        let s = |h: f64, m: f64| compare_curves(&konst(h), &konst(m)).unwrap().3;
        assert_eq!(s(1.0, 0.5), Scenario::HumanDominates);
        assert_eq!(s(0.5, 1.0), Scenario::ModelDominates);
        assert_eq!(s(0.5, 0.5), Scenario::Equivalent);
        let (_, _, ms, sc) = compare_curves(&konst(0.5), &konst(0.0)).unwrap();
        assert_eq!((ms, sc), (0.0, Scenario::HumanDominates));
    }

    #[test]
    fn estimate_always_correct_and_always_wrong() {
        let obs: Vec<(f64, bool)> = (0..2000).map(|i| (i as f64 / 1999.0, true)).collect();
        let opts = EstimateOptions {
            anchor_left: Some(1.0),
            ..Default::default()
        };
        let r = estimate_vcr("m", "gaussian_noise", Property::Consistency, &obs, &opts).unwrap();
        assert!((r.r_hat - 1.0).abs() < 1e-9);
        assert!((r.r_hat - integrate_curve(&r.curve)).abs() < 1e-9);

        let wrong: Vec<(f64, bool)> = obs.iter().map(|&(v, _)| (v, false)).collect();
        let opts = EstimateOptions {
            anchor_left: Some(0.0),
            ..Default::default()
        };
        let r = estimate_vcr("m", "gaussian_noise", Property::Accuracy, &wrong, &opts).unwrap();
        assert_eq!(r.r_hat, 0.0);
        assert!(estimate_vcr("m", "x", Property::Accuracy, &[], &opts).is_err());
    }

    #[test]
    fn compare_rejects_mismatch() {
        let obs: Vec<(f64, bool)> = (0..500).map(|i| (i as f64 / 499.0, i % 2 == 0)).collect();
        let opts = EstimateOptions {
            anchor_left: Some(1.0),
            ..Default::default()
        };
        let a = estimate_vcr("human", "gaussian_noise", Property::Accuracy, &obs, &opts).unwrap();
        let mut b = a.clone();
        b.corruption = "gaussian_blur".into();
        assert!(compare(&a, &b).is_err());
        let mut c = a.clone();
        c.property = Property::Consistency;
        assert!(compare(&a, &c).is_err());
        let same = compare(&a, &a).unwrap();
        assert_eq!(same.scenario, Scenario::Equivalent);
        assert_eq!(same.hmri, 1.0);
    }

    #[test]
    fn property_parsing() {
        assert_eq!("accuracy".parse::<Property>().unwrap(), Property::Accuracy);
        assert!("acc".parse::<Property>().is_err());
    }
}

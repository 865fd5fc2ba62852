//! Parameterized image corruptions and their parameter domains.
//!
//! Every corruption works on `[0, 1]`-normalized RGB internally and returns an
//! image quantized back to the 8-bit grid, so the output is exactly what gets
//! written to disk.

mod blur;
mod noise;
mod photometric;

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::rng_from_seed;

pub use photometric::{hsv_to_rgb, rgb_to_hsv};

/// Closed real interval, serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

impl From<[f64; 2]> for Interval {
    fn from([lo, hi]: [f64; 2]) -> Self {
        Interval { lo, hi }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Noise,
    Blur,
    Photometric,
}

/// The built-in corruption functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorruptionKind {
    GaussianNoise,
    ShotNoise,
    ImpulseNoise,
    UniformNoise,
    GaussianBlur,
    BoxBlur,
    MedianBlur,
    DefocusBlur,
    GlassBlur,
    MotionBlur,
    Brightness,
    HueSaturationValue,
    ColorJitter,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 13] = [
        CorruptionKind::GaussianNoise,
        CorruptionKind::ShotNoise,
        CorruptionKind::ImpulseNoise,
        CorruptionKind::UniformNoise,
        CorruptionKind::GaussianBlur,
        CorruptionKind::BoxBlur,
        CorruptionKind::MedianBlur,
        CorruptionKind::DefocusBlur,
        CorruptionKind::GlassBlur,
        CorruptionKind::MotionBlur,
        CorruptionKind::Brightness,
        CorruptionKind::HueSaturationValue,
        CorruptionKind::ColorJitter,
    ];

    pub fn name(self) -> &'static str {
        use CorruptionKind::*;
        match self {
            GaussianNoise => "gaussian_noise",
            ShotNoise => "shot_noise",
            ImpulseNoise => "impulse_noise",
            UniformNoise => "uniform_noise",
            GaussianBlur => "gaussian_blur",
            BoxBlur => "box_blur",
            MedianBlur => "median_blur",
            DefocusBlur => "defocus_blur",
            GlassBlur => "glass_blur",
            MotionBlur => "motion_blur",
            Brightness => "brightness",
            HueSaturationValue => "hue_saturation_value",
            ColorJitter => "color_jitter",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        CorruptionKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnknownCorruption(name.to_string()))
    }

    pub fn family(self) -> Family {
        use CorruptionKind::*;
        match self {
            GaussianNoise | ShotNoise | ImpulseNoise | UniformNoise => Family::Noise,
            GaussianBlur | BoxBlur | MedianBlur | DefocusBlur | GlassBlur | MotionBlur => {
                Family::Blur
            }
            Brightness | HueSaturationValue | ColorJitter => Family::Photometric,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        use CorruptionKind::*;
        match self {
            GaussianNoise => &["sigma"],
            ShotNoise => &["photons"],
            ImpulseNoise => &["probability"],
            UniformNoise => &["width"],
            GaussianBlur => &["sigma"],
            BoxBlur | MedianBlur => &["kernel"],
            DefocusBlur => &["radius"],
            GlassBlur => &["displacement_sigma"],
            MotionBlur => &["length", "angle"],
            Brightness => &["shift"],
            HueSaturationValue => &["hue_shift", "sat_shift", "val_shift"],
            ColorJitter => &["brightness", "contrast", "saturation"],
        }
    }

    /// Default parameter domain. These are calibration choices that let the
    /// achievable visual change approach the full `[0, 1]` range on natural
    /// images; override them per run with a spec file.
    pub fn default_domains(self) -> Vec<Interval> {
        use CorruptionKind::*;
        let i = Interval::new;
        match self {
            GaussianNoise => vec![i(0.0, 0.5)],
            ShotNoise => vec![i(1.0, 500.0)],
            ImpulseNoise => vec![i(0.0, 0.5)],
            UniformNoise => vec![i(0.0, 0.7)],
            GaussianBlur => vec![i(0.0, 12.0)],
            BoxBlur | MedianBlur => vec![i(1.0, 31.0)],
            DefocusBlur => vec![i(0.0, 12.0)],
            GlassBlur => vec![i(0.0, 4.0)],
            MotionBlur => vec![i(0.0, 31.0), i(0.0, 180.0)],
            Brightness => vec![i(-0.7, 0.7)],
            HueSaturationValue => vec![i(-90.0, 90.0), i(-80.0, 80.0), i(-80.0, 80.0)],
            ColorJitter => vec![i(0.2, 1.8), i(0.2, 1.8), i(0.2, 1.8)],
        }
    }

    /// Parameter vector that leaves every image unchanged, when one exists.
    pub fn identity_params(self) -> Option<Vec<f64>> {
        use CorruptionKind::*;
        match self {
            GaussianNoise | ImpulseNoise | UniformNoise | GaussianBlur | DefocusBlur
            | GlassBlur | Brightness => Some(vec![0.0]),
            BoxBlur | MedianBlur => Some(vec![1.0]),
            MotionBlur => Some(vec![0.0, 0.0]),
            HueSaturationValue => Some(vec![0.0, 0.0, 0.0]),
            ColorJitter => Some(vec![1.0, 1.0, 1.0]),
            ShotNoise => None,
        }
    }

    /// Whether the output depends on the random seed.
    pub fn is_stochastic(self) -> bool {
        self.family() == Family::Noise || self == CorruptionKind::GlassBlur
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A named corruption function together with its parameter domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub name: String,
    pub param_domains: Vec<Interval>,
    pub family: Family,
}

impl CorruptionSpec {
    pub fn builtin(kind: CorruptionKind) -> Self {
        CorruptionSpec {
            name: kind.name().to_string(),
            param_domains: kind.default_domains(),
            family: kind.family(),
        }
    }

    pub fn kind(&self) -> Result<CorruptionKind> {
        CorruptionKind::from_name(&self.name)
    }

    /// Replaces the parameter domain, checking arity and ordering.
    pub fn with_domains(mut self, domains: Vec<Interval>) -> Result<Self> {
        if domains.len() != self.param_domains.len() {
            return Err(Error::InvalidArgument(format!(
                "{} takes {} parameter(s), got {} domain(s)",
                self.name,
                self.param_domains.len(),
                domains.len()
            )));
        }
        if let Some(d) = domains
            .iter()
            .find(|d| !d.lo.is_finite() || !d.hi.is_finite() || d.lo > d.hi)
        {
            return Err(Error::InvalidArgument(format!(
                "{}: invalid interval [{}, {}]",
                self.name, d.lo, d.hi
            )));
        }
        self.param_domains = domains;
        Ok(self)
    }

    pub fn validate_params(&self, params: &ParamVector) -> Result<()> {
        let bad = |detail: String| Error::InvalidParameter {
            corruption: self.name.clone(),
            detail,
        };
        if params.0.len() != self.param_domains.len() {
            return Err(bad(format!(
                "expected {} component(s), got {}",
                self.param_domains.len(),
                params.0.len()
            )));
        }
        for (k, (v, d)) in params.0.iter().zip(&self.param_domains).enumerate() {
            if !d.contains(*v) {
                return Err(bad(format!(
                    "component {k} = {v} outside [{}, {}]",
                    d.lo, d.hi
                )));
            }
        }
        Ok(())
    }
}

/// On-disk form of a domain override: `{"name": ..., "param_domains": [[lo, hi], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecOverride {
    pub name: String,
    pub param_domains: Vec<Interval>,
}

impl SpecOverride {
    pub fn resolve(self) -> Result<CorruptionSpec> {
        lookup(&self.name)?.with_domains(self.param_domains)
    }
}

/// Reads a spec-override JSON file and returns the resolved spec.
pub fn load_spec_override(path: impl AsRef<Path>) -> Result<CorruptionSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ov: SpecOverride =
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display(), e.to_string()))?;
    ov.resolve()
}

/// One value per parameter component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// All built-in corruption specs with default domains.
pub fn registry() -> Vec<CorruptionSpec> {
    CorruptionKind::ALL
        .into_iter()
        .map(CorruptionSpec::builtin)
        .collect()
}

pub fn lookup(name: &str) -> Result<CorruptionSpec> {
    CorruptionKind::from_name(name).map(CorruptionSpec::builtin)
}

/// Draws every component independently and uniformly from its interval.
pub fn sample_params(spec: &CorruptionSpec, rng_seed: u64) -> ParamVector {
    let mut rng = rng_from_seed(rng_seed);
    ParamVector(
        spec.param_domains
            .iter()
            .map(|d| {
                let u: f64 = rng.random();
                (d.lo + (d.hi - d.lo) * u).clamp(d.lo, d.hi)
            })
            .collect(),
    )
}

/// Applies `spec` with `params` to an RGB image. Stochastic corruptions draw
/// from a generator seeded with `rng_seed`; the others ignore it.
pub fn apply_corruption(
    spec: &CorruptionSpec,
    params: &ParamVector,
    img: &Image,
    rng_seed: u64,
) -> Result<Image> {
    let kind = spec.kind()?;
    spec.validate_params(params)?;
    if img.channels() != 3 {
        return Err(Error::InvalidArgument(format!(
            "{} expects an RGB image, got {} channel(s)",
            spec.name,
            img.channels()
        )));
    }
    let p = params.values();
    let unit = img.with_data(img.data().iter().map(|v| v / 255.0).collect())?;
    let mut rng = rng_from_seed(rng_seed);
    use CorruptionKind::*;
    let out = match kind {
        GaussianNoise => noise::gaussian(&unit, p[0], &mut rng),
        ShotNoise => noise::shot(&unit, p[0], &mut rng),
        ImpulseNoise => noise::impulse(&unit, p[0], &mut rng),
        UniformNoise => noise::uniform(&unit, p[0], &mut rng),
        GaussianBlur => blur::gaussian(&unit, p[0])?,
        BoxBlur => blur::box_blur(&unit, nearest_odd(p[0]))?,
        MedianBlur => blur::median(&unit, nearest_odd(p[0])),
        DefocusBlur => blur::defocus(&unit, p[0])?,
        GlassBlur => blur::glass(&unit, p[0], 2, &mut rng)?,
        MotionBlur => blur::motion(&unit, p[0], p[1])?,
        Brightness => photometric::brightness(&unit, p[0]),
        HueSaturationValue => photometric::hue_saturation_value(&unit, p[0], p[1], p[2]),
        ColorJitter => photometric::color_jitter(&unit, p[0], p[1], p[2]),
    };
    let data = out
        .data()
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round())
        .collect();
    img.with_data(data)
}

/// Rounds a real kernel size to the nearest odd integer, at least 1.
pub fn nearest_odd(k: f64) -> usize {
    let half = ((k - 1.0) / 2.0).round().max(0.0);
    2 * half as usize + 1
}

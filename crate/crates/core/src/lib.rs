//! Visually-continuous corruption robustness (VCR) of image classifiers.
//!
//! The pipeline:
//!
//! 1. [`testset`] samples corruption parameters uniformly, corrupts source
//!    images and records the visual change `Δv = max(0, 1 - VIF)` of every
//!    sample ([`iqa`]).
//! 2. [`ingest`] joins a subject's predictions (model or human) against the
//!    manifest into `(Δv, correct)` observations.
//! 3. [`curves`] bins the observations, fits an anchored non-increasing
//!    performance curve and integrates it: the area is the VCR estimate.
//! 4. [`metrics`] compares human and model curves (HMRI, MRSI), and
//!    [`similarity`] decides which corruptions look alike to humans.

pub mod corruptions;
pub mod curves;
pub mod error;
pub mod image;
pub mod ingest;
pub mod iqa;
pub mod metrics;
pub mod rng;
pub mod similarity;
pub mod testset;

pub use corruptions::{
    apply_corruption, registry, sample_params, CorruptionKind, CorruptionSpec, Family, Interval,
    ParamVector,
};
pub use curves::{
    bin_observations, confidence_band, fit_monotone_curve, integrate_curve, raw_performance,
    PerformanceCurve, PerformanceHistogram,
};
pub use error::{Error, Result};
pub use image::{load_image, save_image, to_luminance, Boundary, Image};
pub use iqa::{delta_v, vif, VifConfig};
pub use metrics::{compare, hmri, lead_area, mrsi, ComparisonReport, Property, Scenario, VcrReport};
pub use testset::{coverage, generate_testset, Manifest, SampleRecord};

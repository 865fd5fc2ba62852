//! Visual Information Fidelity and the visual change measure built on it.
//!
//! This is the pixel-domain multi-scale VIF: at scale `s` (1-based) a Gaussian
//! window of `2^(num_scales - s + 1) + 1` taps with `sigma = taps / 5` gives
//! local means, variances and covariance over every fully-covered position.
//! Between scales both images are low-passed with the same window and
//! decimated by 2. The human visual system is modelled as additive noise of
//! variance `sigma_noise_sq`.
//!
//! Scales whose valid region is empty (small images) contribute nothing to
//! either sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{convolve_separable, gaussian_kernel, Boundary, Image};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VifConfig {
    pub num_scales: u32,
    pub sigma_noise_sq: f64,
    pub eps: f64,
}

impl Default for VifConfig {
    fn default() -> Self {
        VifConfig {
            num_scales: 4,
            sigma_noise_sq: 2.0,
            eps: 1e-10,
        }
    }
}

impl VifConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_scales < 1 || self.num_scales > 16 {
            return Err(Error::InvalidArgument(format!(
                "num_scales must be in 1..=16, got {}",
                self.num_scales
            )));
        }
        if self.sigma_noise_sq.is_nan() || self.sigma_noise_sq <= 0.0 || self.eps.is_nan() || self.eps <= 0.0 {
            return Err(Error::InvalidArgument(
                "sigma_noise_sq and eps must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Window length at 1-based scale `s`.
    pub fn window_len(&self, s: u32) -> usize {
        (1usize << (self.num_scales - s + 1)) + 1
    }

    /// Smallest edge length accepted by [`vif`]: the first-scale window.
    pub fn min_dimension(&self) -> usize {
        self.window_len(1)
    }
}

/// VIF between a reference and a distorted single-channel image.
///
/// Returns 1 for identical images and may exceed 1 when the distortion
/// enhances contrast. A reference without any local variance carries no
/// information and yields exactly 1.
pub fn vif(reference: &Image, distorted: &Image, cfg: &VifConfig) -> Result<f64> {
    cfg.validate()?;
    if reference.channels() != 1 || distorted.channels() != 1 {
        return Err(Error::InvalidArgument(
            "vif expects single-channel images; convert with to_luminance".into(),
        ));
    }
    if reference.width() != distorted.width() || reference.height() != distorted.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            reference.width(),
            reference.height(),
            distorted.width(),
            distorted.height()
        )));
    }
    let min_dim = cfg.min_dimension();
    if reference.width() < min_dim || reference.height() < min_dim {
        return Err(Error::ImageTooSmall(format!(
            "{}x{} is below the {min_dim}x{min_dim} minimum for {} scales",
            reference.width(),
            reference.height(),
            cfg.num_scales
        )));
    }
    // The eps in the gain term would otherwise leave a ~1e-11 residue.
    if reference.data() == distorted.data() {
        return Ok(1.0);
    }

    let mut reference = reference.clone();
    let mut distorted = distorted.clone();
    let mut num = 0.0;
    let mut den = 0.0;
    for s in 1..=cfg.num_scales {
        let len = cfg.window_len(s);
        let taps = gaussian_kernel(len as f64 / 5.0, len)?;
        if s > 1 {
            match (
                lowpass_decimate(&reference, &taps),
                lowpass_decimate(&distorted, &taps),
            ) {
                (Some(r), Some(d)) => {
                    reference = r;
                    distorted = d;
                }
                _ => break,
            }
        }
        if reference.width() < len || reference.height() < len {
            break;
        }
        let (n, d) = scale_terms(&reference, &distorted, &taps, cfg)?;
        num += n;
        den += d;
    }
    if den == 0.0 {
        return Ok(1.0);
    }
    Ok(num / den)
}

/// `max(0, 1 - VIF)`, clamped to at most 1.
pub fn delta_v(reference: &Image, distorted: &Image, cfg: &VifConfig) -> Result<f64> {
    vif(reference, distorted, cfg).map(delta_v_from_vif)
}

/// Visual change for an already computed VIF value.
pub fn delta_v_from_vif(vif: f64) -> f64 {
    (1.0 - vif).clamp(0.0, 1.0)
}

/// Visual change between two images of any channel count, measured on
/// BT.601 luminance.
pub fn delta_v_rgb(reference: &Image, distorted: &Image, cfg: &VifConfig) -> Result<f64> {
    delta_v(&reference.to_luminance(), &distorted.to_luminance(), cfg)
}

fn lowpass_decimate(img: &Image, taps: &[f64]) -> Option<Image> {
    let f = convolve_separable(img, taps, taps, Boundary::Valid).ok()?;
    let (w, h) = (f.width().div_ceil(2), f.height().div_ceil(2));
    let data = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| f.get(2 * x, 2 * y, 0))
        .collect();
    Image::new(w, h, 1, data).ok()
}

fn scale_terms(reference: &Image, distorted: &Image, taps: &[f64], cfg: &VifConfig) -> Result<(f64, f64)> {
    let filt = |img: &Image| convolve_separable(img, taps, taps, Boundary::Valid);
    let product = |a: &Image, b: &Image| {
        let data = a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect();
        a.with_data(data)
    };
    let mu1 = filt(reference)?;
    let mu2 = filt(distorted)?;
    let e11 = filt(&product(reference, reference)?)?;
    let e22 = filt(&product(distorted, distorted)?)?;
    let e12 = filt(&product(reference, distorted)?)?;

    let eps = cfg.eps;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..mu1.data().len() {
        let (m1, m2) = (mu1.data()[i], mu2.data()[i]);
        let mut var_ref = (e11.data()[i] - m1 * m1).max(0.0);
        let var_dist = (e22.data()[i] - m2 * m2).max(0.0);
        let cov = e12.data()[i] - m1 * m2;

        let mut g = cov / (var_ref + eps);
        let mut var_v = var_dist - g * cov;
        if var_ref < eps {
            g = 0.0;
            var_v = var_dist;
            var_ref = 0.0;
        }
        if var_dist < eps {
            g = 0.0;
            var_v = 0.0;
        }
        if g < 0.0 {
            var_v = var_dist;
            g = 0.0;
        }
        if var_v <= eps {
            var_v = eps;
        }
        num += (1.0 + g * g * var_ref / (var_v + cfg.sigma_noise_sq)).log10();
        den += (1.0 + var_ref / cfg.sigma_noise_sq).log10();
    }
    Ok((num, den))
}

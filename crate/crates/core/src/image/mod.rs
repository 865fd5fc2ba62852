//! Raster images, codec I/O and separable filtering.
//!
//! Pixel values are held as `f64` on the `[0, 255]` scale so that filters and
//! quality metrics can work without repeated conversion. Images read from disk
//! (and anything passed through [`Image::quantized`]) hold integral values and
//! round-trip through the codecs bit-exactly.

mod codec;
mod filter;

pub use codec::{load_image, save_image};
pub(crate) use filter::reflect_index;
pub use filter::{convolve_2d, convolve_separable, gaussian_filter, gaussian_kernel, Boundary};

use crate::error::{Error, Result};

/// Row-major, channel-interleaved raster with 1 (luminance) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidArgument(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("image dimensions must be non-zero".into()));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidArgument(format!(
                "data length {} does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn from_u8(width: usize, height: usize, channels: usize, data: &[u8]) -> Result<Self> {
        Image::new(width, height, channels, data.iter().map(|&v| f64::from(v)).collect())
    }

    /// Builds an image by evaluating `f(x, y, channel)` for every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Image::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Same geometry, new samples.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Image::new(self.width, self.height, self.channels, data)
    }

    /// 8-bit storage values: round half away from zero, clamp to `[0, 255]`.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }

    /// Copy whose samples are snapped to the 8-bit storage grid.
    pub fn quantized(&self) -> Image {
        Image {
            data: self.data.iter().map(|&v| f64::from(quantize(v))).collect(),
            ..self.clone()
        }
    }

    /// Extracts one channel as a single-channel image.
    pub fn channel(&self, c: usize) -> Image {
        let data = self.data.iter().skip(c).step_by(self.channels).copied().collect();
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    /// Interleaves single-channel planes of identical geometry.
    pub fn from_planes(planes: &[Image]) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| Error::InvalidArgument("no planes".into()))?;
        if planes
            .iter()
            .any(|p| p.channels != 1 || p.width != first.width || p.height != first.height)
        {
            return Err(Error::DimensionMismatch("planes differ in geometry".into()));
        }
        let n = first.width * first.height;
        let mut data = Vec::with_capacity(n * planes.len());
        for i in 0..n {
            data.extend(planes.iter().map(|p| p.data[i]));
        }
        Image::new(first.width, first.height, planes.len(), data)
    }

    /// ITU-R BT.601 luminance. Single-channel input is returned unchanged.
    pub fn to_luminance(&self) -> Image {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|px| 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2])
            .collect();
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }
}

/// Free-function form of [`Image::to_luminance`].
pub fn to_luminance(img: &Image) -> Image {
    img.to_luminance()
}

#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    // f64::round rounds half away from zero; NaN saturates to 0.
    v.round().clamp(0.0, 255.0) as u8
}

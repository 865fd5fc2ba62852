//! Gaussian kernels and 2-D filtering (correlation) with selectable borders.

use super::Image;
use crate::error::{Error, Result};

/// Border handling for filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Only positions where the kernel fits entirely; the output shrinks by
    /// `kernel_len - 1` along each axis.
    Valid,
    /// Same-size output; samples outside are mirrored about the pixel edge
    /// (`d c b a | a b c d | d c b a`).
    Reflect,
}

/// Normalized 1-D Gaussian taps centred on the middle of `len` samples.
pub fn gaussian_kernel(sigma: f64, len: usize) -> Result<Vec<f64>> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidArgument(format!("sigma must be > 0, got {sigma}")));
    }
    if len.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("kernel length must be odd, got {len}")));
    }
    let half = (len / 2) as f64;
    let mut taps: Vec<f64> = (0..len)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    Ok(taps)
}

/// Separable Gaussian filter applied independently to every channel.
pub fn gaussian_filter(
    img: &Image,
    sigma: f64,
    kernel_len: usize,
    boundary: Boundary,
) -> Result<Image> {
    let taps = gaussian_kernel(sigma, kernel_len)?;
    convolve_separable(img, &taps, &taps, boundary)
}

#[inline]
pub(crate) fn reflect_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

fn output_dims(img: &Image, kw: usize, kh: usize, boundary: Boundary) -> Result<(usize, usize)> {
    match boundary {
        Boundary::Reflect => Ok((img.width(), img.height())),
        Boundary::Valid => {
            if kw > img.width() || kh > img.height() {
                return Err(Error::ImageTooSmall(format!(
                    "{kw}x{kh} kernel does not fit a {}x{} image in valid mode",
                    img.width(),
                    img.height()
                )));
            }
            Ok((img.width() - kw + 1, img.height() - kh + 1))
        }
    }
}

/// Correlates every channel with `row_taps` horizontally, then `col_taps`
/// vertically. Both tap counts must be odd.
pub fn convolve_separable(
    img: &Image,
    row_taps: &[f64],
    col_taps: &[f64],
    boundary: Boundary,
) -> Result<Image> {
    if row_taps.len().is_multiple_of(2) || col_taps.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument("kernel lengths must be odd".into()));
    }
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let (ow, oh) = output_dims(img, row_taps.len(), col_taps.len(), boundary)?;
    let src = img.data();
    let rx = (row_taps.len() / 2) as isize;
    let ry = (col_taps.len() / 2) as isize;

    // Horizontal pass: h rows by ow columns.
    let mut tmp = vec![0.0; ow * h * ch];
    for y in 0..h {
        let row = &src[y * w * ch..(y + 1) * w * ch];
        for x in 0..ow {
            for c in 0..ch {
                let mut acc = 0.0;
                for (k, &t) in row_taps.iter().enumerate() {
                    let sx = match boundary {
                        Boundary::Valid => x + k,
                        Boundary::Reflect => reflect_index(x as isize + k as isize - rx, w),
                    };
                    acc += t * row[sx * ch + c];
                }
                tmp[(y * ow + x) * ch + c] = acc;
            }
        }
    }

    let mut out = vec![0.0; ow * oh * ch];
    for y in 0..oh {
        for (k, &t) in col_taps.iter().enumerate() {
            let sy = match boundary {
                Boundary::Valid => y + k,
                Boundary::Reflect => reflect_index(y as isize + k as isize - ry, h),
            };
            let src_row = &tmp[sy * ow * ch..(sy + 1) * ow * ch];
            let dst_row = &mut out[y * ow * ch..(y + 1) * ow * ch];
            for (d, s) in dst_row.iter_mut().zip(src_row) {
                *d += t * s;
            }
        }
    }
    Image::new(ow, oh, ch, out)
}

/// Dense 2-D correlation of every channel with a `kh x kw` row-major kernel.
pub fn convolve_2d(
    img: &Image,
    kernel: &[f64],
    kw: usize,
    kh: usize,
    boundary: Boundary,
) -> Result<Image> {
    if kernel.len() != kw * kh || kw.is_multiple_of(2) || kh.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "kernel must be odd-sized and {kw}x{kh}, got {} taps",
            kernel.len()
        )));
    }
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let (ow, oh) = output_dims(img, kw, kh, boundary)?;
    let src = img.data();
    let rx = (kw / 2) as isize;
    let ry = (kh / 2) as isize;
    // Sparse kernels (motion lines, small discs) are mostly zeros.
    let taps: Vec<(usize, usize, f64)> = kernel
        .iter()
        .enumerate()
        .filter(|(_, &t)| t != 0.0)
        .map(|(i, &t)| (i % kw, i / kw, t))
        .collect();

    let mut out = vec![0.0; ow * oh * ch];
    for y in 0..oh {
        for x in 0..ow {
            for c in 0..ch {
                let mut acc = 0.0;
                for &(kx, ky, t) in &taps {
                    let (sx, sy) = match boundary {
                        Boundary::Valid => (x + kx, y + ky),
                        Boundary::Reflect => (
                            reflect_index(x as isize + kx as isize - rx, w),
                            reflect_index(y as isize + ky as isize - ry, h),
                        ),
                    };
                    acc += t * src[(sy * w + sx) * ch + c];
                }
                out[(y * ow + x) * ch + c] = acc;
            }
        }
    }
    Image::new(ow, oh, ch, out)
}

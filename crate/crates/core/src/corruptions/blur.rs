use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::image::{convolve_2d, convolve_separable, gaussian_filter, reflect_index, Boundary, Image};

pub(super) fn gaussian(img: &Image, sigma: f64) -> Result<Image> {
    if sigma <= 0.0 {
        return Ok(img.clone());
    }
    let len = 2 * (3.0 * sigma).ceil() as usize + 1;
    gaussian_filter(img, sigma, len, Boundary::Reflect)
}

pub(super) fn box_blur(img: &Image, k: usize) -> Result<Image> {
    if k <= 1 {
        return Ok(img.clone());
    }
    let taps = vec![1.0 / k as f64; k];
    convolve_separable(img, &taps, &taps, Boundary::Reflect)
}

pub(super) fn median(img: &Image, k: usize) -> Image {
    if k <= 1 {
        return img.clone();
    }
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let r = (k / 2) as isize;
    let mut window = Vec::with_capacity(k * k);
    let mut out = vec![0.0; img.data().len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                window.clear();
                for dy in -r..=r {
                    let sy = reflect_index(y as isize + dy, h);
                    for dx in -r..=r {
                        let sx = reflect_index(x as isize + dx, w);
                        window.push(img.get(sx, sy, c));
                    }
                }
                let mid = window.len() / 2;
                let (_, m, _) = window.select_nth_unstable_by(mid, f64::total_cmp);
                out[(y * w + x) * ch + c] = *m;
            }
        }
    }
    img.with_data(out).expect("same geometry")
}

/// Disc kernel of the given radius with a one-pixel linear edge ramp.
pub(super) fn defocus(img: &Image, radius: f64) -> Result<Image> {
    let r = radius.ceil() as usize;
    if r == 0 {
        return Ok(img.clone());
    }
    let size = 2 * r + 1;
    let mut kernel = vec![0.0; size * size];
    for j in 0..size {
        for i in 0..size {
            let dx = i as f64 - r as f64;
            let dy = j as f64 - r as f64;
            let d = (dx * dx + dy * dy).sqrt();
            kernel[j * size + i] = (radius + 0.5 - d).clamp(0.0, 1.0);
        }
    }
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|t| *t /= sum);
    convolve_2d(img, &kernel, size, size, Boundary::Reflect)
}

/// Linear motion kernel of `length` pixels along `angle_deg`, rasterized by
/// bilinear splatting of points spaced a quarter pixel apart.
pub(super) fn motion(img: &Image, length: f64, angle_deg: f64) -> Result<Image> {
    let half = length / 2.0;
    let r = half.ceil() as usize + 1;
    let size = 2 * r + 1;
    let steps = (length * 4.0).ceil().max(0.0) as usize;
    let (sin, cos) = angle_deg.to_radians().sin_cos();
    let mut kernel = vec![0.0; size * size];
    for s in 0..=steps {
        let t = if steps == 0 {
            0.0
        } else {
            -half + length * s as f64 / steps as f64
        };
        let px = r as f64 + t * cos;
        let py = r as f64 - t * sin;
        let (x0, y0) = (px.floor(), py.floor());
        let (fx, fy) = (px - x0, py - y0);
        for (ox, oy, wgt) in [
            (0, 0, (1.0 - fx) * (1.0 - fy)),
            (1, 0, fx * (1.0 - fy)),
            (0, 1, (1.0 - fx) * fy),
            (1, 1, fx * fy),
        ] {
            if wgt > 0.0 {
                let (kx, ky) = (x0 as usize + ox, y0 as usize + oy);
                kernel[ky * size + kx] += wgt;
            }
        }
    }
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|t| *t /= sum);
    if kernel[r * size + r] == 1.0 {
        return Ok(img.clone());
    }
    convolve_2d(img, &kernel, size, size, Boundary::Reflect)
}

/// Blur, locally shuffle pixels by Gaussian displacements, blur again.
/// The pre/post blur sigma is half the displacement sigma.
pub(super) fn glass(
    img: &Image,
    displacement_sigma: f64,
    iterations: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Image> {
    if displacement_sigma <= 0.0 {
        return Ok(img.clone());
    }
    let blur_sigma = displacement_sigma / 2.0;
    let blurred = gaussian(img, blur_sigma)?;
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let mut data = blurred.into_data();
    for _ in 0..iterations {
        for y in 0..h {
            for x in 0..w {
                let zx: f64 = StandardNormal.sample(rng);
                let zy: f64 = StandardNormal.sample(rng);
                let tx = (x as f64 + (zx * displacement_sigma).round()).clamp(0.0, (w - 1) as f64)
                    as usize;
                let ty = (y as f64 + (zy * displacement_sigma).round()).clamp(0.0, (h - 1) as f64)
                    as usize;
                for c in 0..ch {
                    data.swap((y * w + x) * ch + c, (ty * w + tx) * ch + c);
                }
            }
        }
    }
    gaussian(&img.with_data(data)?, blur_sigma)
}

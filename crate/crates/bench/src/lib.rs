//! Fixtures shared by the benchmarks.

use vcr_core::Image;

/// Deterministic textured RGB image with edges and fine detail.
pub fn textured(size: usize) -> Image {
    Image::from_fn(size, size, 3, |x, y, c| {
        let (xf, yf) = (x as f64, y as f64);
        let wave = (0.3 * xf + 0.1 * c as f64).sin() * (0.2 * yf).cos();
        let edge = if (x / 16 + y / 16) % 2 == 0 { 40.0 } else { -40.0 };
        let grain = ((x * 31 + y * 17 + c * 7) % 13) as f64 - 6.0;
        (128.0 + 60.0 * wave + edge + grain).clamp(0.0, 255.0)
    })
    .expect("valid dimensions")
}

/// `n` observations whose correctness falls linearly with visual change.
pub fn linear_observations(n: usize) -> Vec<(f64, bool)> {
    (0..n)
        .map(|i| {
            let v = (i as f64 + 0.5) / n as f64;
            // Low-discrepancy threshold keeps this free of an RNG.
            let u = (i as f64 * 0.618_033_988_75).fract();
            (v, u < 1.0 - v)
        })
        .collect()
}

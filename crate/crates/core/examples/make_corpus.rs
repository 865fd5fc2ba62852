//! Regenerates the bundled test corpus: ten 64x64 RGB scenes made of smooth
//! gradients, oriented texture, a few shapes and mild grain.
//!
//! ```text
//! cargo run -p vcr-core --example make_corpus -- crates/core/tests/data/corpus
//! ```

use std::f64::consts::PI;

use rand::Rng;
use vcr_core::rng::{derive_seed, rng_from_seed};
use vcr_core::{save_image, Image};

const SIZE: usize = 64;
const COUNT: u64 = 10;
const MASTER_SEED: u64 = 0x5eed_c0de;

struct Disc {
    cx: f64,
    cy: f64,
    r: f64,
    color: [f64; 3],
}

fn scene(seed: u64) -> Image {
    let mut rng = rng_from_seed(seed);
    let mut color = || [rng.random_range(30.0..225.0), rng.random_range(30.0..225.0), rng.random_range(30.0..225.0)];
    let (top, bottom) = (color(), color());
    let mut rng = rng_from_seed(derive_seed(seed, 1));
    let freq = rng.random_range(0.08..0.35);
    let theta = rng.random_range(0.0..PI);
    let amp = rng.random_range(10.0..40.0);
    let discs: Vec<Disc> = (0..rng.random_range(2..5))
        .map(|_| Disc {
            cx: rng.random_range(8.0..56.0),
            cy: rng.random_range(8.0..56.0),
            r: rng.random_range(5.0..16.0),
            color: [rng.random_range(0.0..255.0), rng.random_range(0.0..255.0), rng.random_range(0.0..255.0)],
        })
        .collect();
    let grain: Vec<f64> = (0..SIZE * SIZE).map(|_| rng.random_range(-6.0..6.0)).collect();

    Image::from_fn(SIZE, SIZE, 3, |x, y, c| {
        let (xf, yf) = (x as f64, y as f64);
        let t = yf / (SIZE - 1) as f64;
        let mut v = top[c] * (1.0 - t) + bottom[c] * t;
        v += amp * (freq * (xf * theta.cos() + yf * theta.sin())).sin();
        for d in &discs {
            // Soft one-pixel edge.
            let dist = ((xf - d.cx).powi(2) + (yf - d.cy).powi(2)).sqrt();
            let a = (d.r + 0.5 - dist).clamp(0.0, 1.0);
            v = v * (1.0 - a) + d.color[c] * a;
        }
        (v + grain[y * SIZE + x]).clamp(0.0, 255.0)
    })
    .expect("valid dimensions")
    .quantized()
}

fn main() -> vcr_core::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "corpus".into());
    std::fs::create_dir_all(&dir).map_err(|e| vcr_core::Error::InvalidArgument(e.to_string()))?;
    for i in 0..COUNT {
        let path = format!("{dir}/scene_{i:02}.png");
        save_image(&scene(derive_seed(MASTER_SEED, i)), &path)?;
        println!("{path}");
    }
    Ok(())
}

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::image::Image;

fn map(img: &Image, f: impl FnMut(f64) -> f64) -> Image {
    img.with_data(img.data().iter().copied().map(f).collect())
        .expect("same geometry")
}

pub(super) fn gaussian(img: &Image, sigma: f64, rng: &mut ChaCha8Rng) -> Image {
    map(img, |v| {
        let z: f64 = StandardNormal.sample(rng);
        v + sigma * z
    })
}

/// Poisson photon noise with `photons` expected counts at full intensity.
/// Fewer photons means stronger noise.
pub(super) fn shot(img: &Image, photons: f64, rng: &mut ChaCha8Rng) -> Image {
    map(img, |v| {
        let mean = v * photons;
        if mean <= 0.0 {
            return 0.0;
        }
        let count: f64 = Poisson::new(mean).expect("finite positive mean").sample(rng);
        count / photons
    })
}

/// Salt-and-pepper noise; each sample is replaced with probability `p`.
pub(super) fn impulse(img: &Image, p: f64, rng: &mut ChaCha8Rng) -> Image {
    map(img, |v| {
        let hit: f64 = rng.random();
        let salt: bool = rng.random();
        if hit < p {
            if salt {
                1.0
            } else {
                0.0
            }
        } else {
            v
        }
    })
}

pub(super) fn uniform(img: &Image, width: f64, rng: &mut ChaCha8Rng) -> Image {
    map(img, |v| {
        let u: f64 = rng.random();
        v + width * (2.0 * u - 1.0)
    })
}

//! Straight-line pixel-domain multi-scale VIF, written without any of the
//! library's filtering code: full 2-D windows, direct sums, and scales whose
//! valid region is empty simply add nothing.

type Grid = Vec<Vec<f64>>;

const SIGMA_NSQ: f64 = 2.0;
const EPS: f64 = 1e-10;

fn window(n: usize) -> Grid {
    let sigma = n as f64 / 5.0;
    let half = (n as f64 - 1.0) / 2.0;
    let mut w = vec![vec![0.0; n]; n];
    let mut total = 0.0;
    for (i, row) in w.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let (y, x) = (i as f64 - half, j as f64 - half);
            *cell = (-(x * x + y * y) / (2.0 * sigma * sigma)).exp();
            total += *cell;
        }
    }
    for row in &mut w {
        for cell in row.iter_mut() {
            *cell /= total;
        }
    }
    w
}

fn filter_valid(img: &Grid, w: &Grid) -> Grid {
    let n = w.len();
    let rows = img.len();
    let cols = img.first().map_or(0, Vec::len);
    if rows < n || cols < n {
        return Vec::new();
    }
    let mut out = vec![vec![0.0; cols - n + 1]; rows - n + 1];
    for (r, out_row) in out.iter_mut().enumerate() {
        for (c, cell) in out_row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += w[i][j] * img[r + i][c + j];
                }
            }
            *cell = acc;
        }
    }
    out
}

fn decimate(img: &Grid) -> Grid {
    img.iter()
        .step_by(2)
        .map(|row| row.iter().step_by(2).copied().collect())
        .collect()
}

fn mul(a: &Grid, b: &Grid) -> Grid {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x * y).collect())
        .collect()
}

/// VIF of `dist` against `reference`, row-major `rows x cols` buffers.
pub fn vif_reference(reference: &[f64], dist: &[f64], rows: usize, cols: usize) -> f64 {
    let to_grid = |d: &[f64]| -> Grid { d.chunks(cols).map(<[f64]>::to_vec).collect() };
    let mut r = to_grid(reference);
    let mut d = to_grid(dist);
    assert_eq!(r.len(), rows);
    let mut num = 0.0;
    let mut den = 0.0;
    for scale in 1..=4u32 {
        let n = (1usize << (4 - scale + 1)) + 1;
        let w = window(n);
        if scale > 1 {
            r = decimate(&filter_valid(&r, &w));
            d = decimate(&filter_valid(&d, &w));
        }
        let mu1 = filter_valid(&r, &w);
        let mu2 = filter_valid(&d, &w);
        let s11 = filter_valid(&mul(&r, &r), &w);
        let s22 = filter_valid(&mul(&d, &d), &w);
        let s12 = filter_valid(&mul(&r, &d), &w);
        for i in 0..mu1.len() {
            for j in 0..mu1[i].len() {
                let mut sigma1_sq = s11[i][j] - mu1[i][j] * mu1[i][j];
                let mut sigma2_sq = s22[i][j] - mu2[i][j] * mu2[i][j];
                let sigma12 = s12[i][j] - mu1[i][j] * mu2[i][j];
                if sigma1_sq < 0.0 {
                    sigma1_sq = 0.0;
                }
                if sigma2_sq < 0.0 {
                    sigma2_sq = 0.0;
                }
                let mut g = sigma12 / (sigma1_sq + EPS);
                let mut sv_sq = sigma2_sq - g * sigma12;
                if sigma1_sq < EPS {
                    g = 0.0;
                    sv_sq = sigma2_sq;
                    sigma1_sq = 0.0;
                }
                if sigma2_sq < EPS {
                    g = 0.0;
                    sv_sq = 0.0;
                }
                if g < 0.0 {
                    sv_sq = sigma2_sq;
                    g = 0.0;
                }
                if sv_sq <= EPS {
                    sv_sq = EPS;
                }
                num += (1.0 + g * g * sigma1_sq / (sv_sq + SIGMA_NSQ)).log10();
                den += (1.0 + sigma1_sq / SIGMA_NSQ).log10();
            }
        }
    }
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

/// xorshift64* so the frozen pairs do not depend on any library RNG.
struct XorShift(u64);

impl XorShift {
    fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        (self.0.wrapping_mul(0x2545_f491_4f6c_dd1d) >> 11) as f64 / (1u64 << 53) as f64
    }
}

pub const PAIR_SIZE: usize = 32;

/// The 50 frozen `(reference, distorted)` 32x32 pairs on [0, 255]: textured
/// references with additive noise, contrast change, a 3x3 box blur, or an
/// enhancement, cycling by index.
pub fn frozen_pairs() -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = PAIR_SIZE;
    let mut rng = XorShift(0x9e37_79b9_7f4a_7c15);
    (0..50)
        .map(|k| {
            let fx = 0.1 + 0.5 * rng.next_f64();
            let fy = 0.1 + 0.5 * rng.next_f64();
            let amp = 20.0 + 60.0 * rng.next_f64();
            let mut r = vec![0.0; n * n];
            for y in 0..n {
                for x in 0..n {
                    let base = 128.0 + amp * (fx * x as f64).sin() * (fy * y as f64).cos();
                    r[y * n + x] = (base + 30.0 * (rng.next_f64() - 0.5)).round().clamp(0.0, 255.0);
                }
            }
            let strength = rng.next_f64();
            let d: Vec<f64> = match k % 4 {
                0 => r
                    .iter()
                    .map(|v| (v + 80.0 * strength * (rng.next_f64() - 0.5)).clamp(0.0, 255.0))
                    .collect(),
                1 => r.iter().map(|v| 128.0 + (0.2 + 0.6 * strength) * (v - 128.0)).collect(),
                2 => (0..n * n)
                    .map(|i| {
                        let (y, x) = ((i / n) as isize, (i % n) as isize);
                        let mut acc = 0.0;
                        for dy in -1..=1 {
                            for dx in -1..=1 {
                                let yy = (y + dy).clamp(0, n as isize - 1) as usize;
                                let xx = (x + dx).clamp(0, n as isize - 1) as usize;
                                acc += r[yy * n + xx];
                            }
                        }
                        acc / 9.0
                    })
                    .collect(),
                _ => r.iter().map(|v| 128.0 + (1.1 + 0.3 * strength) * (v - 128.0)).collect(),
            };
            (r, d)
        })
        .collect()
}

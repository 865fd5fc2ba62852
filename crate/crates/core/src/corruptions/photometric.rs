use crate::image::Image;

/// RGB in `[0, 1]` to (hue degrees in `[0, 360)`, saturation, value).
pub fn rgb_to_hsv(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    (h, s, v)
}

pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    let c = v * s;
    let hp = h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    (r + m, g + m, b + m)
}

fn map_pixels(img: &Image, mut f: impl FnMut(f64, f64, f64) -> (f64, f64, f64)) -> Image {
    let mut out = Vec::with_capacity(img.data().len());
    for px in img.data().chunks_exact(3) {
        let (r, g, b) = f(px[0], px[1], px[2]);
        out.extend([r, g, b]);
    }
    img.with_data(out).expect("same geometry")
}

fn map_hsv(img: &Image, f: impl Fn(f64, f64, f64) -> (f64, f64, f64)) -> Image {
    map_pixels(img, |r, g, b| {
        let (h, s, v) = rgb_to_hsv(r, g, b);
        let (h, s, v) = f(h, s, v);
        hsv_to_rgb(h, s.clamp(0.0, 1.0), v.clamp(0.0, 1.0))
    })
}

/// Additive shift of the HSV value channel.
pub(super) fn brightness(img: &Image, shift: f64) -> Image {
    if shift == 0.0 {
        return img.clone();
    }
    map_hsv(img, |h, s, v| (h, s, v + shift))
}

/// Hue shift in degrees; saturation and value shifts on the 0..255 scale.
pub(super) fn hue_saturation_value(img: &Image, hue: f64, sat: f64, val: f64) -> Image {
    if hue == 0.0 && sat == 0.0 && val == 0.0 {
        return img.clone();
    }
    map_hsv(img, |h, s, v| (h + hue, s + sat / 255.0, v + val / 255.0))
}

fn gray(r: f64, g: f64, b: f64) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

/// Brightness scaling, contrast about the mean gray level, then saturation
/// blending towards gray, clamping after each step.
pub(super) fn color_jitter(img: &Image, brightness: f64, contrast: f64, saturation: f64) -> Image {
    if brightness == 1.0 && contrast == 1.0 && saturation == 1.0 {
        return img.clone();
    }
    let clamp = |v: f64| v.clamp(0.0, 1.0);
    let step1 = map_pixels(img, |r, g, b| {
        (clamp(r * brightness), clamp(g * brightness), clamp(b * brightness))
    });
    let n = (step1.width() * step1.height()) as f64;
    let mean = step1
        .data()
        .chunks_exact(3)
        .map(|p| gray(p[0], p[1], p[2]))
        .sum::<f64>()
        / n;
    let blend = |v: f64, toward: f64, f: f64| clamp(toward + f * (v - toward));
    let step2 = map_pixels(&step1, |r, g, b| {
        (blend(r, mean, contrast), blend(g, mean, contrast), blend(b, mean, contrast))
    });
    map_pixels(&step2, |r, g, b| {
        let l = gray(r, g, b);
        (blend(r, l, saturation), blend(g, l, saturation), blend(b, l, saturation))
    })
}

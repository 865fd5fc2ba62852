//! Mean visual change over the bundled corpus should grow with severity.

use vcr_core::corruptions::lookup;
use vcr_core::iqa::delta_v_rgb;
use vcr_core::testset::scan_corpus;
use vcr_core::{apply_corruption, load_image, ParamVector, VifConfig};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/corpus");

fn mean_delta_v(name: &str, severities: &[f64]) -> Vec<f64> {
    let spec = lookup(name).unwrap();
    let cfg = VifConfig::default();
    let images: Vec<_> = scan_corpus(CORPUS)
        .unwrap()
        .iter()
        .map(|s| load_image(&s.path).unwrap())
        .collect();
    assert_eq!(images.len(), 10);
    severities
        .iter()
        .map(|&s| {
            let params = ParamVector(vec![s]);
            let total: f64 = images
                .iter()
                .enumerate()
                .map(|(i, img)| {
                    let out = apply_corruption(&spec, &params, img, i as u64).unwrap();
                    delta_v_rgb(img, &out, &cfg).unwrap()
                })
                .sum();
            total / images.len() as f64
        })
        .collect()
}

fn assert_nearly_monotone(means: &[f64]) {
    let inversions: Vec<f64> = means
        .windows(2)
        .filter(|w| w[1] < w[0])
        .map(|w| w[0] - w[1])
        .collect();
    assert!(
        inversions.len() <= 1 && inversions.iter().all(|&d| d < 0.02),
        "means {means:?}"
    );
}

#[test]
fn gaussian_noise_severity() {
    let means = mean_delta_v("gaussian_noise", &[0.02, 0.05, 0.1, 0.2, 0.4]);
    assert_nearly_monotone(&means);
    assert!(means[4] - means[0] > 0.3, "{means:?}");
}

#[test]
fn gaussian_blur_severity() {
    let means = mean_delta_v("gaussian_blur", &[0.5, 1.0, 2.0, 4.0, 8.0]);
    assert_nearly_monotone(&means);
    assert!(means[4] - means[0] > 0.3, "{means:?}");
}

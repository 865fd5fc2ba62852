//! Weighted isotonic regression by pool-adjacent-violators.

/// Least-squares non-increasing fit of `values` under positive `weights`.
///
/// # Panics
///
/// If the slices differ in length.
pub fn pava_non_increasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len(), "values and weights differ in length");
    // Blocks of pooled points: (weighted mean, total weight, point count).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&y, &w) in values.iter().zip(weights) {
        let mut cur = (y, w, 1usize);
        while let Some(&(prev_mean, prev_w, prev_n)) = blocks.last() {
            if prev_mean >= cur.0 {
                break;
            }
            blocks.pop();
            let total = prev_w + cur.1;
            let mean = if total > 0.0 {
                (prev_mean * prev_w + cur.0 * cur.1) / total
            } else {
                (prev_mean + cur.0) / 2.0
            };
            cur = (mean, total, prev_n + cur.2);
        }
        blocks.push(cur);
    }
    blocks
        .into_iter()
        .flat_map(|(mean, _, n)| std::iter::repeat_n(mean, n))
        .collect()
}

/// Least-squares non-decreasing fit.
pub fn pava_non_decreasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = values.iter().map(|v| -v).collect();
    pava_non_increasing(&neg, weights)
        .into_iter()
        .map(|v| -v)
        .collect()
}

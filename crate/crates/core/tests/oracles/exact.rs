//! Exact enumeration oracles: the fair-coin binomial test over integers, the
//! best non-increasing step function on a 0.01 grid, and first-fit clique
//! covers by enumerating set partitions.

/// Two-sided p-value of `k` successes in `n` fair trials, summing every
/// outcome no more likely than `k`. Exact as a ratio of integers.
pub fn binomial_half_pvalue(n: u32, k: u32) -> f64 {
    assert!(n <= 60);
    let mut row = vec![1u128; n as usize + 1];
    for i in 1..n as usize {
        row[i] = row[i - 1] * (n as u128 - i as u128 + 1) / i as u128;
    }
    let ck = row[k as usize];
    let tail: u128 = row.iter().filter(|&&c| c <= ck).sum();
    let total = 1u128 << n;
    if tail >= total {
        1.0
    } else {
        tail as f64 / total as f64
    }
}

/// Smallest weighted squared error of a non-increasing sequence whose values
/// lie on `{0, 0.01, ..., 1}`, by dynamic programming over every level.
pub fn best_grid_step_loss(values: &[f64], weights: &[f64]) -> f64 {
    let levels: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    // best[l]: least loss so far with the current value at level index l.
    let mut best: Vec<f64> = levels.iter().map(|&q| weights[0] * (values[0] - q).powi(2)).collect();
    for i in 1..values.len() {
        // Non-increasing: the previous level must be at least the current one.
        let mut suffix_min = vec![f64::INFINITY; levels.len() + 1];
        for l in (0..levels.len()).rev() {
            suffix_min[l] = suffix_min[l + 1].min(best[l]);
        }
        best = levels
            .iter()
            .enumerate()
            .map(|(l, &q)| suffix_min[l] + weights[i] * (values[i] - q).powi(2))
            .collect();
    }
    best.into_iter().fold(f64::INFINITY, f64::min)
}

fn partitions(n: usize) -> Vec<Vec<usize>> {
    // Restricted growth strings: label[i] <= 1 + max(label[..i]).
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == labels.len() {
            out.push(labels.clone());
            return;
        }
        for l in 0..=max + 1 {
            labels[i] = l;
            rec(i + 1, max.max(l), labels, out);
        }
    }
    if n == 0 {
        out.push(Vec::new());
    } else {
        rec(1, 0, &mut labels, &mut out);
    }
    out
}

/// The unique partition of nodes `0..n` that a first-fit clique cover in
/// index order must produce: every class is a clique, and every node
/// conflicts with some earlier member of each earlier class. Returns the
/// classes as sorted index lists, ordered by smallest member.
pub fn first_fit_cover(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let valid: Vec<Vec<usize>> = partitions(n)
        .into_iter()
        .filter(|labels| {
            (0..n).all(|v| {
                (0..v).all(|u| labels[u] != labels[v] || adj[u][v])
                    && (0..labels[v]).all(|c| (0..v).any(|u| labels[u] == c && !adj[u][v]))
            })
        })
        .collect();
    assert_eq!(valid.len(), 1, "first-fit partition must be unique");
    let labels = &valid[0];
    let k = labels.iter().max().map_or(0, |m| m + 1);
    (0..k)
        .map(|c| (0..n).filter(|&v| labels[v] == c).collect())
        .collect()
}

/// Every clique cover size is at least this; used to report how often
/// first fit is optimal.
pub fn min_clique_cover_size(adj: &[Vec<bool>]) -> usize {
    let n = adj.len();
    partitions(n)
        .into_iter()
        .filter(|labels| (0..n).all(|v| (0..v).all(|u| labels[u] != labels[v] || adj[u][v])))
        .map(|labels| labels.iter().max().map_or(0, |m| m + 1))
        .min()
        .unwrap_or(0)
}

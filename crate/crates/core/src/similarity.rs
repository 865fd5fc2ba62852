//! Which corruptions are visually similar: exact binomial tests on
//! "same or different corruption?" trials, overlap of confidence bands, and
//! grouping into classes of mutually similar corruptions.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::curves::PerformanceCurve;
use crate::error::{Error, Result};

/// Default acceptance threshold on the p-value: a pair counts as similar
/// when `p >= 0.95`.
pub const DEFAULT_THRESHOLD: f64 = 0.95;

/// Relative slack when comparing outcome probabilities against `P(k)`.
const REL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// `P(X >= k)`.
    Greater,
    /// `P(X <= k)`.
    Less,
}

fn ln_pmf(n: u64, i: u64, p: f64) -> f64 {
    if p == 0.0 {
        return if i == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if i == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let (nf, fi) = (n as f64, i as f64);
    ln_gamma(nf + 1.0) - (ln_gamma(fi + 1.0) + ln_gamma(nf - fi + 1.0))
        + (fi * p.ln() + (nf - fi) * (1.0 - p).ln())
}

/// Exact binomial test p-value for `k` successes in `n` trials.
///
/// The two-sided value sums the probabilities of every outcome no more likely
/// than the observed one (minimum-likelihood method).
pub fn binomial_pvalue(n: u64, k: u64, p: f64, alternative: Alternative) -> Result<f64> {
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    let sum = |range: std::ops::RangeInclusive<u64>| -> f64 {
        range.map(|i| ln_pmf(n, i, p).exp()).sum()
    };
    let value = match alternative {
        Alternative::Greater => sum(k..=n),
        Alternative::Less => sum(0..=k),
        Alternative::TwoSided => {
            let cutoff = ln_pmf(n, k, p) + REL_TOL.ln_1p();
            let mut total = 0.0;
            let mut all = true;
            for i in 0..=n {
                let lp = ln_pmf(n, i, p);
                if lp <= cutoff {
                    total += lp.exp();
                } else {
                    all = false;
                }
            }
            if all {
                1.0
            } else {
                total
            }
        }
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Two-sided exact binomial p-value.
pub fn binomial_two_sided_pvalue(n: u64, k: u64, p: f64) -> Result<f64> {
    binomial_pvalue(n, k, p, Alternative::TwoSided)
}

/// Outcome of a distinguishing experiment between two corruptions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinguishTrialSet {
    pub corruption_a: String,
    pub corruption_b: String,
    pub n: u64,
    pub k: u64,
}

impl DistinguishTrialSet {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k > self.n {
            return Err(Error::InvalidArgument(format!(
                "{}/{}: need 0 <= k <= n and n >= 1, got n={} k={}",
                self.corruption_a, self.corruption_b, self.n, self.k
            )));
        }
        Ok(())
    }
}

/// Similar when participants cannot tell the pair apart: `p >= threshold`
/// under the chance-level (`p = 0.5`) null.
pub fn is_similar_pair(trials: &DistinguishTrialSet, threshold: f64) -> Result<(bool, f64)> {
    trials.validate()?;
    let p = binomial_two_sided_pvalue(trials.n, trials.k, 0.5)?;
    Ok((p >= threshold, p))
}

/// Reads `corruption_a,corruption_b,n,k` rows.
pub fn load_trials(path: impl AsRef<Path>) -> Result<Vec<DistinguishTrialSet>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trials(&text, &path.display().to_string())
}

pub fn parse_trials(text: &str, origin: &str) -> Result<Vec<DistinguishTrialSet>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(origin, e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["corruption_a", "corruption_b", "n", "k"] {
        return Err(Error::MissingHeader {
            path: origin.to_string(),
            expected: "corruption_a,corruption_b,n,k".into(),
        });
    }
    let mut out = Vec::new();
    for rec in reader.deserialize::<DistinguishTrialSet>() {
        let t = rec.map_err(|e| Error::parse(origin, e.to_string()))?;
        t.validate()?;
        out.push(t);
    }
    if out.is_empty() {
        return Err(Error::NoData(format!("{origin}: no trial rows")));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDecision {
    pub corruption_a: String,
    pub corruption_b: String,
    pub n: u64,
    pub k: u64,
    pub p_value: f64,
    pub similar: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub threshold: f64,
    pub pairs: Vec<PairDecision>,
    pub classes: Vec<Vec<String>>,
}

/// Tests every pair (trials for the same unordered pair are pooled) and
/// groups the corruptions into similarity classes. Untested pairs count as
/// dissimilar.
pub fn analyze_trials(trials: &[DistinguishTrialSet], threshold: f64) -> Result<SimilarityReport> {
    let mut pooled: BTreeMap<(String, String), (u64, u64)> = BTreeMap::new();
    for t in trials {
        t.validate()?;
        let key = if t.corruption_a <= t.corruption_b {
            (t.corruption_a.clone(), t.corruption_b.clone())
        } else {
            (t.corruption_b.clone(), t.corruption_a.clone())
        };
        let e = pooled.entry(key).or_default();
        e.0 += t.n;
        e.1 += t.k;
    }
    let mut names: Vec<String> = pooled
        .keys()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect();
    names.sort();
    names.dedup();
    let index = |s: &str| names.binary_search_by(|n| n.as_str().cmp(s)).expect("collected above");
    let mut matrix = vec![vec![false; names.len()]; names.len()];
    for (i, row) in matrix.iter_mut().enumerate() {
        row[i] = true;
    }
    let mut pairs = Vec::with_capacity(pooled.len());
    for ((a, b), (n, k)) in pooled {
        let set = DistinguishTrialSet {
            corruption_a: a,
            corruption_b: b,
            n,
            k,
        };
        let (similar, p_value) = is_similar_pair(&set, threshold)?;
        let (i, j) = (index(&set.corruption_a), index(&set.corruption_b));
        if i != j {
            matrix[i][j] = similar;
            matrix[j][i] = similar;
        }
        pairs.push(PairDecision {
            corruption_a: set.corruption_a,
            corruption_b: set.corruption_b,
            n,
            k,
            p_value,
            similar,
        });
    }
    let classes = similarity_classes(&names, &matrix)?;
    Ok(SimilarityReport {
        threshold,
        pairs,
        classes,
    })
}

/// Groups names so that every member of a class is similar to every other
/// member. Names are visited in lexicographic order and each joins the
/// first existing class it is similar to entirely, or opens a new one.
pub fn similarity_classes(names: &[String], similar: &[Vec<bool>]) -> Result<Vec<Vec<String>>> {
    let n = names.len();
    if similar.len() != n || similar.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument(format!(
            "similarity matrix must be {n}x{n}"
        )));
    }
    for i in 0..n {
        if !similar[i][i] {
            return Err(Error::InvalidArgument(format!(
                "`{}` is not similar to itself",
                names[i]
            )));
        }
        for j in 0..i {
            if similar[i][j] != similar[j][i] {
                return Err(Error::InvalidArgument(format!(
                    "asymmetric similarity between `{}` and `{}`",
                    names[i], names[j]
                )));
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| names[a].cmp(&names[b]));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match classes
            .iter_mut()
            .find(|class| class.iter().all(|&j| similar[i][j]))
        {
            Some(class) => class.push(i),
            None => classes.push(vec![i]),
        }
    }
    Ok(classes
        .into_iter()
        .map(|c| c.into_iter().map(|i| names[i].clone()).collect())
        .collect())
}

/// Per-knot overlap of two banded curves on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub overlap: bool,
    pub v_min: f64,
    /// `(v, overlaps)` for every knot where both bands exist and `v >= v_min`.
    pub bins: Vec<(f64, bool)>,
}

/// The curves are statistically indistinguishable when their closed
/// confidence intervals intersect at every shared banded knot at or beyond
/// `v_min`.
pub fn curves_overlap(a: &PerformanceCurve, b: &PerformanceCurve, v_min: f64) -> Result<OverlapReport> {
    let (Some(band_a), Some(band_b)) = (a.band(), b.band()) else {
        return Err(Error::NoData("both curves need confidence bands".into()));
    };
    if a.knots().len() != b.knots().len()
        || a.knots().iter().zip(b.knots()).any(|(x, y)| (x.0 - y.0).abs() > 1e-12)
    {
        return Err(Error::Mismatch("curves are not on a shared bin grid".into()));
    }
    let bins: Vec<(f64, bool)> = a
        .knots()
        .iter()
        .zip(band_a.iter().zip(band_b))
        .filter(|((v, _), _)| *v >= v_min)
        .filter_map(|((v, _), (ba, bb))| {
            let ((lo_a, hi_a), (lo_b, hi_b)) = ((*ba)?, (*bb)?);
            Some((*v, lo_a.max(lo_b) <= hi_a.min(hi_b)))
        })
        .collect();
    if bins.is_empty() {
        return Err(Error::NoData("no shared banded bins".into()));
    }
    Ok(OverlapReport {
        overlap: bins.iter().all(|&(_, o)| o),
        v_min,
        bins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// P(X = i) for X ~ Binomial(n, 1/2) as an exact rational: C(n, i) / 2^n.
    fn exact_pvalue_half(n: u64, k: u64) -> f64 {
        let binom = |i: u64| -> u128 {
            let mut c: u128 = 1;
            for j in 0..i {
                c = c * u128::from(n - j) / u128::from(j + 1);
            }
            c
        };
        let ck = binom(k);
        let num: u128 = (0..=n).map(binom).filter(|&c| c <= ck).sum();
        num as f64 / (1u128 << n) as f64
    }

    #[test]
    fn known_values() {
        assert_eq!(binomial_two_sided_pvalue(20, 10, 0.5).unwrap(), 1.0);
        let p = binomial_two_sided_pvalue(20, 20, 0.5).unwrap();
        assert!((p - 2.0 * 0.5f64.powi(20)).abs() < 1e-18);
        assert_eq!(binomial_two_sided_pvalue(1, 0, 0.5).unwrap(), 1.0);
        assert!(binomial_two_sided_pvalue(3, 4, 0.5).is_err());
    }

    #[test]
    fn matches_rational_enumeration() {
        for n in 0..=30u64 {
            for k in 0..=n {
                let p = binomial_two_sided_pvalue(n, k, 0.5).unwrap();
                assert!((p - exact_pvalue_half(n, k)).abs() < 1e-12, "n={n} k={k}");
                assert_eq!(p, binomial_two_sided_pvalue(n, n - k, 0.5).unwrap());
            }
        }
    }

    #[test]
    fn one_sided_and_skewed() {
        let g = binomial_pvalue(10, 8, 0.5, Alternative::Greater).unwrap();
        assert!((g - 56.0 / 1024.0).abs() < 1e-14);
        let l = binomial_pvalue(10, 2, 0.5, Alternative::Less).unwrap();
        assert!((l - 56.0 / 1024.0).abs() < 1e-14);
        // n = 5, p = 0.2, k = 3: outcomes with pmf <= P(3) = 0.0512 are 3, 4, 5.
        let p = binomial_two_sided_pvalue(5, 3, 0.2).unwrap();
        assert!((p - (0.0512 + 0.0064 + 0.00032)).abs() < 1e-12);
        assert_eq!(binomial_two_sided_pvalue(4, 0, 0.0).unwrap(), 1.0);
        assert_eq!(binomial_two_sided_pvalue(4, 2, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn large_n_is_finite() {
        let p = binomial_two_sided_pvalue(1_000_000, 500_000, 0.5).unwrap();
        assert!((p - 1.0).abs() < 1e-9);
        let p = binomial_two_sided_pvalue(1_000_000, 501_000, 0.5).unwrap();
        assert!(p > 0.0 && p < 0.1);
    }

    #[test]
    fn similar_pair_decisions() {
        let t = |k| DistinguishTrialSet {
            corruption_a: "a".into(),
            corruption_b: "b".into(),
            n: 20,
            k,
        };
        assert_eq!(is_similar_pair(&t(10), 0.95).unwrap(), (true, 1.0));
        assert!(!is_similar_pair(&t(20), 0.95).unwrap().0);
        let (sim, p) = is_similar_pair(&t(11), 0.95).unwrap();
        assert!((p - exact_pvalue_half(20, 11)).abs() < 1e-12);
        assert_eq!(sim, p >= 0.95);
        assert!(is_similar_pair(&DistinguishTrialSet { n: 0, ..t(0) }, 0.95).is_err());
    }

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn triangle_first_fit() {
        let n = names(&["A", "B", "C"]);
        let m = vec![
            vec![true, true, false],
            vec![true, true, true],
            vec![false, true, true],
        ];
        assert_eq!(
            similarity_classes(&n, &m).unwrap(),
            vec![names(&["A", "B"]), names(&["C"])]
        );
    }

    #[test]
    fn all_dissimilar_are_singletons() {
        let n = names(&["z", "y", "x"]);
        let m = vec![
            vec![true, false, false],
            vec![false, true, false],
            vec![false, false, true],
        ];
        assert_eq!(
            similarity_classes(&n, &m).unwrap(),
            vec![names(&["x"]), names(&["y"]), names(&["z"])]
        );
    }

    #[test]
    fn rejects_malformed_matrices() {
        let n = names(&["a", "b"]);
        assert!(similarity_classes(&n, &[vec![true, true], vec![false, true]]).is_err());
        assert!(similarity_classes(&n, &[vec![false, false], vec![false, true]]).is_err());
        assert!(similarity_classes(&n, &[vec![true]]).is_err());
    }

    #[test]
    fn trials_csv() {
        let text = "corruption_a,corruption_b,n,k\r\nb,a,10,5\r\na,b,10,5\r\na,c,20,20\r\n";
        let trials = parse_trials(text, "mem").unwrap();
        assert_eq!(trials.len(), 3);
        let report = analyze_trials(&trials, 0.95).unwrap();
        assert_eq!(report.pairs.len(), 2);
        assert_eq!((report.pairs[0].n, report.pairs[0].k), (20, 10));
        assert_eq!(report.classes, vec![names(&["a", "b"]), names(&["c"])]);
        assert!(parse_trials("a,b\n", "mem").is_err());
        assert!(parse_trials("corruption_a,corruption_b,n,k\n", "mem").is_err());
        assert!(parse_trials("corruption_a,corruption_b,n,k\na,b,3,4\n", "mem").is_err());
    }

    fn banded(lo: f64, hi: f64) -> PerformanceCurve {
        let mid = (lo + hi) / 2.0;
        PerformanceCurve::new(vec![(0.0, mid), (0.5, mid), (1.0, mid)])
            .unwrap()
            .with_band(vec![None, Some((lo, hi)), Some((lo, hi))])
            .unwrap()
    }

    #[test]
    fn overlap_cases() {
        let a = banded(0.8, 0.9);
        assert!(curves_overlap(&a, &a, 0.0).unwrap().overlap);
        let r = curves_overlap(&a, &banded(0.2, 0.3), 0.0).unwrap();
        assert!(!r.overlap);
        assert!(r.bins.iter().all(|&(_, o)| !o));
        assert!(curves_overlap(&banded(0.4, 0.5), &banded(0.5, 0.6), 0.0).unwrap().overlap);
        assert_eq!(curves_overlap(&a, &a, 0.75).unwrap().bins.len(), 1);
        assert!(curves_overlap(&a, &a, 1.5).is_err());
        let plain = PerformanceCurve::constant(0.5).unwrap();
        assert!(curves_overlap(&a, &plain, 0.0).is_err());
    }
}

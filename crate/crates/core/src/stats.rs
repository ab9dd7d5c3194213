//! Cross-session comparison of treatments: Cliff's delta, a bootstrap test on
//! medians, and Scott-Knott clustering that accepts a split only when both
//! agree the difference is real.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// |δ| below this is a negligible effect.
pub const NEGLIGIBLE_DELTA: f64 = 0.147;
pub const DEFAULT_BOOTSTRAP_ITERATIONS: usize = 1000;
pub const DEFAULT_CONFIDENCE: f64 = 0.99;
const DEFAULT_SEED: u64 = 0x5c07_4e07;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub algorithm: String,
    pub values: Vec<f64>,
}

impl MetricSample {
    pub fn new(algorithm: impl Into<String>, values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "metric sample must be nonempty");
        assert!(values.iter().all(|v| v.is_finite()), "metric sample must be finite");
        Self {
            algorithm: algorithm.into(),
            values,
        }
    }

    pub fn median(&self) -> f64 {
        median(&self.values)
    }
}

/// Linear-interpolated percentile, `q` in [0, 100].
pub fn percentile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q / 100.0 * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    percentile(values, 50.0)
}

/// 75th minus 25th percentile.
pub fn iqr(values: &[f64]) -> f64 {
    percentile(values, 75.0) - percentile(values, 25.0)
}

/// (#{x > y} − #{x < y}) / (|a|·|b|), computed by binary search over a sorted copy.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut sb = b.to_vec();
    sb.sort_by(f64::total_cmp);
    let (mut gt, mut lt) = (0usize, 0usize);
    for &x in a {
        let below = sb.partition_point(|&y| y < x);
        let not_above = sb.partition_point(|&y| y <= x);
        gt += below;
        lt += sb.len() - not_above;
    }
    (gt as f64 - lt as f64) / (a.len() * b.len()) as f64
}

/// Two-sided bootstrap test on the difference of medians.
///
/// Both samples are shifted onto the pooled median (the null hypothesis), then
/// resampled with replacement; the difference is significant when fewer than
/// `1 − confidence` of the resampled differences are at least as extreme as the
/// observed one.
pub fn bootstrap_significant(
    a: &[f64],
    b: &[f64],
    iterations: usize,
    confidence: f64,
    seed: u64,
) -> bool {
    let observed = (median(a) - median(b)).abs();
    if observed == 0.0 {
        return false;
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let center = median(&pooled);
    let (ma, mb) = (median(a), median(b));
    let a0: Vec<f64> = a.iter().map(|x| x - ma + center).collect();
    let b0: Vec<f64> = b.iter().map(|x| x - mb + center).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ra = vec![0.0; a.len()];
    let mut rb = vec![0.0; b.len()];
    let mut extreme = 0usize;
    for _ in 0..iterations {
        ra.iter_mut().for_each(|x| *x = a0[rng.gen_range(0..a0.len())]);
        rb.iter_mut().for_each(|x| *x = b0[rng.gen_range(0..b0.len())]);
        if (median(&ra) - median(&rb)).abs() >= observed - 1e-12 {
            extreme += 1;
        }
    }
    let p = (extreme + 1) as f64 / (iterations + 1) as f64;
    p < 1.0 - confidence
}

/// The default significance test used by [`scott_knott`].
pub fn differs(a: &[f64], b: &[f64], seed: u64) -> bool {
    cliffs_delta(a, b).abs() >= NEGLIGIBLE_DELTA
        && bootstrap_significant(a, b, DEFAULT_BOOTSTRAP_ITERATIONS, DEFAULT_CONFIDENCE, seed)
}

/// Ranks per algorithm, 1 for the cluster with the lowest medians.
pub fn scott_knott(samples: &[MetricSample]) -> BTreeMap<String, usize> {
    scott_knott_seeded(samples, DEFAULT_SEED)
}

pub fn scott_knott_seeded(samples: &[MetricSample], seed: u64) -> BTreeMap<String, usize> {
    let mut sorted: Vec<&MetricSample> = samples.iter().collect();
    sorted.sort_by(|a, b| {
        a.median()
            .total_cmp(&b.median())
            .then_with(|| a.algorithm.cmp(&b.algorithm))
    });
    let mut cuts = Vec::new();
    split(&sorted, 0, seed, &mut cuts);
    cuts.sort_unstable();
    let mut ranks = BTreeMap::new();
    let mut rank = 1;
    for (i, s) in sorted.iter().enumerate() {
        if cuts.contains(&i) {
            rank += 1;
        }
        ranks.insert(s.algorithm.clone(), rank);
    }
    ranks
}

fn pooled(group: &[&MetricSample]) -> Vec<f64> {
    group.iter().flat_map(|s| s.values.iter().copied()).collect()
}

/// Recursively splits `group` (sorted by median) at the cut maximizing the
/// between-group sum of squares. Accepted cut positions are recorded as
/// absolute indices into the sorted list.
fn split(group: &[&MetricSample], offset: usize, seed: u64, cuts: &mut Vec<usize>) {
    if group.len() < 2 {
        return;
    }
    let all = pooled(group);
    let grand = all.iter().sum::<f64>() / all.len() as f64;
    let mut best: Option<(usize, f64)> = None;
    for k in 1..group.len() {
        let (l, r) = (pooled(&group[..k]), pooled(&group[k..]));
        let ml = l.iter().sum::<f64>() / l.len() as f64;
        let mr = r.iter().sum::<f64>() / r.len() as f64;
        let ss = l.len() as f64 * (ml - grand).powi(2) + r.len() as f64 * (mr - grand).powi(2);
        if best.is_none_or(|(_, b)| ss > b) {
            best = Some((k, ss));
        }
    }
    let (k, _) = best.expect("group has at least two members");
    let (l, r) = (pooled(&group[..k]), pooled(&group[k..]));
    let level_seed = seed.wrapping_mul(6364136223846793005).wrapping_add((offset + k) as u64);
    if differs(&l, &r, level_seed) {
        cuts.push(offset + k);
        split(&group[..k], offset, seed, cuts);
        split(&group[k..], offset + k, seed, cuts);
    }
}

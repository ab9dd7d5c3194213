//! Orders computed before a session starts: the random and optimal baselines,
//! history metrics, the runtime-cost order, and description-based regression.
//!
//! Every metric reads only the sessions visible through a [`HistoryView`].
//! Orders are produced with [`order_by_score`], so ties always fall back to
//! dataset index.

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Outcome;
use crate::order::{order_by_score, Direction};
use crate::ridge::RidgeSolver;
use crate::view::HistoryView;

pub const DEFAULT_ALPHA: f64 = 0.9;

/// ROCKET weight for a failure `distance` sessions back (1 = previous session).
pub fn rocket_weight(distance: usize) -> f64 {
    match distance {
        0 => 0.0,
        1 => 0.7,
        2 => 0.2,
        _ => 0.1,
    }
}

fn h(o: Outcome) -> f64 {
    if o.is_failed() {
        1.0
    } else {
        0.0
    }
}

/// A1: seeded uniform permutation.
pub fn order_random(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// A2: failing tests by ascending duration, then the rest by ascending duration.
///
/// Shortest-first among failures minimizes the summed cost preceding each
/// detection, which maximizes APFDc under unit severities.
pub fn order_optimal(failing: &[bool], durations: &[f64]) -> Vec<usize> {
    assert_eq!(failing.len(), durations.len());
    let mut idx: Vec<usize> = (0..failing.len()).collect();
    idx.sort_by(|&a, &b| {
        failing[b]
            .cmp(&failing[a])
            .then(durations[a].total_cmp(&durations[b]))
            .then(a.cmp(&b))
    });
    idx
}

/// B1: consecutive non-failing sessions immediately before now.
pub fn time_since_last_failure(outcomes: &[Outcome]) -> usize {
    outcomes.iter().rev().take_while(|o| !o.is_failed()).count()
}

/// B2: failures / executions, where only Passed and Failed count as executed.
/// Zero executions give 0.
pub fn failure_rate(outcomes: &[Outcome]) -> f64 {
    let executed = outcomes.iter().filter(|o| o.is_executed()).count();
    if executed == 0 {
        return 0.0;
    }
    outcomes.iter().filter(|o| o.is_failed()).count() as f64 / executed as f64
}

/// B3: `P_0 = h_1`, `P_i = α h_i + (1 − α) P_{i−1}`. Empty history gives 0.
pub fn exponential_decay(outcomes: &[Outcome], alpha: f64) -> f64 {
    assert!((0.0..=1.0).contains(&alpha), "alpha must lie in [0, 1]");
    let mut it = outcomes.iter();
    let Some(&first) = it.next() else { return 0.0 };
    it.fold(h(first), |p, &o| alpha * h(o) + (1.0 - alpha) * p)
}

/// B4: ROCKET, failures weighted 0.7 / 0.2 / 0.1 by recency.
pub fn rocket(outcomes: &[Outcome]) -> f64 {
    let now = outcomes.len();
    outcomes
        .iter()
        .enumerate()
        .map(|(j, &o)| rocket_weight(now - j) * h(o))
        .sum()
}

/// Consecutive non-executed (Skipped or Timeout) sessions immediately before now.
pub fn consecutive_skips(outcomes: &[Outcome]) -> usize {
    outcomes.iter().rev().take_while(|o| !o.is_executed()).count()
}

/// Mean duration over executed sessions; 0 when never executed.
pub fn mean_duration(outcomes: &[Outcome], durations: &[f64]) -> f64 {
    let (sum, n) = outcomes
        .iter()
        .zip(durations)
        .filter(|(o, _)| o.is_executed())
        .fold((0.0, 0usize), |(s, n), (_, d)| (s + d, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// B5 points: (consecutive skips, failure rate) per test.
pub fn skip_rate_points(view: &HistoryView<'_>) -> Vec<[f64; 2]> {
    (0..view.n_tests())
        .map(|t| {
            let o = view.outcomes(t);
            [consecutive_skips(o) as f64, failure_rate(o)]
        })
        .collect()
}

/// Sample (n − 1) variance–covariance matrix of 2-D points.
pub fn covariance(points: &[[f64; 2]]) -> [[f64; 2]; 2] {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let k = n - 1.0;
    [[sxx / k, sxy / k], [sxy / k, syy / k]]
}

/// `xᵀ S⁻¹ x` for every point, or `None` when S is singular (or fewer than two
/// points).
pub fn mahalanobis_to_origin(points: &[[f64; 2]]) -> Option<Vec<f64>> {
    if points.len() < 2 {
        return None;
    }
    let s = covariance(points);
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    if s[0][0] <= 0.0 || s[1][1] <= 0.0 || det <= 1e-12 * s[0][0] * s[1][1] {
        return None;
    }
    let inv = [
        [s[1][1] / det, -s[0][1] / det],
        [-s[1][0] / det, s[0][0] / det],
    ];
    Some(
        points
            .iter()
            .map(|x| {
                x[0] * (inv[0][0] * x[0] + inv[0][1] * x[1])
                    + x[1] * (inv[1][0] * x[0] + inv[1][1] * x[1])
            })
            .collect(),
    )
}

fn scores(view: &HistoryView<'_>, f: impl Fn(&[Outcome]) -> f64) -> Vec<f64> {
    (0..view.n_tests()).map(|t| f(view.outcomes(t))).collect()
}

pub fn order_b1(view: &HistoryView<'_>) -> Vec<usize> {
    order_by_score(
        &scores(view, |o| time_since_last_failure(o) as f64),
        Direction::Ascending,
    )
}

pub fn order_b2(view: &HistoryView<'_>) -> Vec<usize> {
    order_by_score(&scores(view, failure_rate), Direction::Descending)
}

pub fn order_b3(view: &HistoryView<'_>, alpha: f64) -> Vec<usize> {
    order_by_score(
        &scores(view, |o| exponential_decay(o, alpha)),
        Direction::Descending,
    )
}

pub fn order_b4(view: &HistoryView<'_>) -> Vec<usize> {
    order_by_score(&scores(view, rocket), Direction::Descending)
}

/// B5; falls back to the B2 order when the covariance matrix is singular.
pub fn order_b5(view: &HistoryView<'_>) -> Vec<usize> {
    match mahalanobis_to_origin(&skip_rate_points(view)) {
        Some(d) => order_by_score(&d, Direction::Descending),
        None => {
            warn!("B5: singular covariance matrix, falling back to failure-rate order");
            order_b2(view)
        }
    }
}

/// C1: ascending mean executed duration.
pub fn order_c1(view: &HistoryView<'_>) -> Vec<usize> {
    let est: Vec<f64> = (0..view.n_tests())
        .map(|t| mean_duration(view.outcomes(t), view.durations(t)))
        .collect();
    order_by_score(&est, Direction::Ascending)
}

/// Dependent variable construction for the description-based models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelScheme {
    /// 1 iff failed in the immediately previous session.
    SimpleHistory,
    /// Failure rate over all prior sessions.
    AllHistory,
    /// ROCKET-weighted failures over all prior sessions.
    WeightedHistory,
}

pub fn supervised_labels(view: &HistoryView<'_>, scheme: LabelScheme) -> Vec<f64> {
    match scheme {
        LabelScheme::SimpleHistory => scores(view, |o| o.last().map_or(0.0, |&l| h(l))),
        LabelScheme::AllHistory => scores(view, failure_rate),
        LabelScheme::WeightedHistory => scores(view, rocket),
    }
}

/// D1–D3: regress labels on description features, order by descending
/// prediction.
pub fn order_supervised(
    view: &HistoryView<'_>,
    solver: &RidgeSolver,
    scheme: LabelScheme,
) -> Vec<usize> {
    let labels = supervised_labels(view, scheme);
    let first = labels.first().copied().unwrap_or(0.0);
    if labels.iter().all(|&l| l == first) {
        warn!("{scheme:?}: zero-variance labels, order degenerates to dataset order");
        return (0..labels.len()).collect();
    }
    order_by_score(&solver.predict(&labels), Direction::Descending)
}

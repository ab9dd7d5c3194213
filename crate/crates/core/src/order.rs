//! Stable score-to-order conversion shared by all prioritizers.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Ascending,
    Descending,
}

/// Relative precision scores are rounded to before comparison, so values that
/// differ only by floating-point noise tie.
const TIE_EPS: f64 = 1e-12;

fn snap(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(x.abs().log10().floor() as i32);
    ((x / scale) / TIE_EPS).round() * TIE_EPS * scale
}

/// Test indices ordered by score; ties resolved by ascending index.
pub fn order_by_score(scores: &[f64], direction: Direction) -> Vec<usize> {
    let snapped: Vec<f64> = scores.iter().map(|&s| snap(s)).collect();
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        let ord = snapped[a].total_cmp(&snapped[b]);
        match direction {
            Direction::Ascending => ord,
            Direction::Descending => ord.reverse(),
        }
        .then(a.cmp(&b))
    });
    idx
}

/// Position of each test in `order`.
pub fn positions(order: &[usize], n: usize) -> Vec<usize> {
    let mut pos = vec![usize::MAX; n];
    for (p, &t) in order.iter().enumerate() {
        pos[t] = p;
    }
    pos
}

pub fn is_permutation(order: &[usize], n: usize) -> bool {
    if order.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &t in order {
        if t >= n || std::mem::replace(&mut seen[t], true) {
            return false;
        }
    }
    true
}

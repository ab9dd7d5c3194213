//! Scoring an executed order: APFD, APFDc, recall-versus-cost curves, overhead.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One prioritized session: the emitted order of test indices plus ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub order: Vec<usize>,
    /// Indexed by test.
    pub failing: Vec<bool>,
    /// Indexed by test, seconds.
    pub durations: Vec<f64>,
    /// Seconds spent inside the prioritizer.
    pub algo_wall_time: f64,
}

impl SessionResult {
    pub fn new(order: Vec<usize>, failing: Vec<bool>, durations: Vec<f64>) -> Self {
        Self {
            order,
            failing,
            durations,
            algo_wall_time: 0.0,
        }
    }

    pub fn failure_count(&self) -> usize {
        self.failing.iter().filter(|f| **f).count()
    }

    pub fn total_duration(&self) -> f64 {
        self.durations.iter().sum()
    }

    /// 1-based positions of failing tests in the order.
    fn failure_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.order
            .iter()
            .enumerate()
            .filter(|(_, &t)| self.failing[t])
            .map(|(p, _)| p + 1)
    }
}

/// `None` when the session has no failures; such sessions are left out of
/// aggregation.
pub fn apfd(result: &SessionResult) -> Option<f64> {
    let n = result.order.len() as f64;
    let m = result.failure_count();
    if m == 0 {
        return None;
    }
    let sum: usize = result.failure_positions().sum();
    Some(1.0 - sum as f64 / (n * m as f64) + 1.0 / (2.0 * n))
}

/// APFDc with unit severities. `Ok(None)` when there are no failures.
pub fn apfdc(result: &SessionResult) -> Result<Option<f64>> {
    let severities: Vec<f64> = vec![1.0; result.failing.len()];
    apfdc_weighted(result, &severities)
}

/// APFDc with per-test failure severities (indexed by test; only failing
/// tests' entries are read).
pub fn apfdc_weighted(result: &SessionResult, severities: &[f64]) -> Result<Option<f64>> {
    let total = result.total_duration();
    if total <= 0.0 {
        return Err(Error::ZeroDuration);
    }
    if result.failure_count() == 0 {
        return Ok(None);
    }
    let mut remaining = total;
    let mut num = 0.0;
    let mut sev_sum = 0.0;
    for &t in &result.order {
        let d = result.durations[t];
        if result.failing[t] {
            // Σ_{j ≥ TF} t_j − t_TF / 2
            num += severities[t] * (remaining - 0.5 * d);
            sev_sum += severities[t];
        }
        remaining -= d;
    }
    Ok(Some(num / (total * sev_sum)))
}

/// Points (cumulative cost fraction, recall) from (0, 0) through every test in
/// order. Linear interpolation between consecutive points integrates to APFDc.
pub fn recall_cost_curve(result: &SessionResult) -> Result<Vec<(f64, f64)>> {
    let total = result.total_duration();
    if total <= 0.0 {
        return Err(Error::ZeroDuration);
    }
    let m = result.failure_count();
    let mut cost = 0.0;
    let mut found = 0usize;
    let mut curve = Vec::with_capacity(result.order.len() + 1);
    curve.push((0.0, 0.0));
    for &t in &result.order {
        cost += result.durations[t];
        if result.failing[t] {
            found += 1;
        }
        let recall = if m == 0 { 0.0 } else { found as f64 / m as f64 };
        curve.push(((cost / total).min(1.0), recall));
    }
    if let Some(last) = curve.last_mut() {
        last.0 = 1.0;
    }
    Ok(curve)
}

pub fn write_curve_csv<W: Write>(curve: &[(f64, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cost_fraction", "recall"])?;
    for (c, r) in curve {
        w.write_record([c.to_string(), r.to_string()])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<curve>".into(),
        source,
    })?;
    Ok(())
}

/// Prioritizer time over total suite runtime.
pub fn overhead(result: &SessionResult) -> Result<f64> {
    let total = result.total_duration();
    if total <= 0.0 {
        return Err(Error::ZeroDuration);
    }
    Ok(result.algo_wall_time / total)
}

//! Seeded synthetic histories with controllable failure structure.
//!
//! Each test belongs to one description cluster and carries that cluster's
//! tokens in its description, plus a few filler words. Per session:
//!
//! * a test that failed in the previous session fails again with probability
//!   `persistence`;
//! * otherwise it is skipped with probability `skip_rate`;
//! * otherwise, if its cluster broke this session (probability
//!   `cluster_break_rate` per cluster), it fails with probability
//!   `cluster_correlation`, else with `base_rate`.
//!
//! Durations are a per-test log-normal mean times a small per-session jitter;
//! skipped tests record zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Description, Outcome, SessionHistory, TestRecord};
use crate::error::{Error, Result};

const FILLER: &[&str] = &[
    "check", "verify", "load", "save", "page", "form", "user", "admin", "search", "report",
    "login", "export", "import", "filter", "sort", "render", "submit", "cancel", "open", "close",
];
const FILLER_PER_TEST: usize = 3;
const JITTER: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_tests: usize,
    pub n_sessions: usize,
    pub base_rate: f64,
    pub persistence: f64,
    pub n_clusters: usize,
    pub cluster_break_rate: f64,
    pub cluster_correlation: f64,
    /// Mean and standard deviation of ln(duration in seconds).
    pub duration_log_mean: f64,
    pub duration_log_sd: f64,
    pub skip_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_tests: 500,
            n_sessions: 30,
            base_rate: 0.01,
            persistence: 0.6,
            n_clusters: 20,
            cluster_break_rate: 0.1,
            cluster_correlation: 0.9,
            duration_log_mean: 3.0,
            duration_log_sd: 1.0,
            skip_rate: 0.02,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("base_rate", self.base_rate),
            ("persistence", self.persistence),
            ("cluster_break_rate", self.cluster_break_rate),
            ("cluster_correlation", self.cluster_correlation),
            ("skip_rate", self.skip_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        for (name, c) in [
            ("n_tests", self.n_tests),
            ("n_sessions", self.n_sessions),
            ("n_clusters", self.n_clusters),
        ] {
            if c == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.duration_log_sd >= 0.0 && self.duration_log_mean.is_finite()) {
            return Err(Error::Config("invalid duration parameters".into()));
        }
        Ok(())
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SessionHistory> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let durations = LogNormal::new(spec.duration_log_mean, spec.duration_log_sd)
        .map_err(|e| Error::Config(e.to_string()))?;

    let cluster: Vec<usize> = (0..spec.n_tests)
        .map(|_| rng.gen_range(0..spec.n_clusters))
        .collect();
    let mean_duration: Vec<f64> = (0..spec.n_tests).map(|_| durations.sample(&mut rng)).collect();
    let descriptions: Vec<String> = cluster
        .iter()
        .map(|&c| {
            let mut words = vec![format!("component{c}"), format!("feature{c}")];
            words.extend((0..FILLER_PER_TEST).map(|_| FILLER[rng.gen_range(0..FILLER.len())].to_string()));
            words.join(" ")
        })
        .collect();

    let mut outcomes = vec![Vec::with_capacity(spec.n_sessions); spec.n_tests];
    let mut times = vec![Vec::with_capacity(spec.n_sessions); spec.n_tests];
    for _ in 0..spec.n_sessions {
        let broken: Vec<bool> = (0..spec.n_clusters)
            .map(|_| rng.gen_bool(spec.cluster_break_rate))
            .collect();
        for t in 0..spec.n_tests {
            let failed_before = outcomes[t].last().is_some_and(|o: &Outcome| o.is_failed());
            let outcome = if failed_before && rng.gen_bool(spec.persistence) {
                Outcome::Failed
            } else if rng.gen_bool(spec.skip_rate) {
                Outcome::Skipped
            } else {
                let p = if broken[cluster[t]] {
                    spec.cluster_correlation
                } else {
                    spec.base_rate
                };
                if rng.gen_bool(p) {
                    Outcome::Failed
                } else {
                    Outcome::Passed
                }
            };
            let d = match outcome {
                Outcome::Skipped => 0.0,
                _ => mean_duration[t] * (1.0 + JITTER * rng.gen_range(-1.0..1.0)),
            };
            outcomes[t].push(outcome);
            times[t].push(d);
        }
    }

    let width = (spec.n_tests - 1).to_string().len();
    let tests = outcomes
        .into_iter()
        .zip(times)
        .zip(descriptions)
        .enumerate()
        .map(|(i, ((o, d), text))| TestRecord::new(format!("t{i:0width$}"), Description::Text(text), o, d))
        .collect();
    let sessions = (1..=spec.n_sessions).map(|s| format!("run{s}")).collect();
    SessionHistory::new(sessions, tests)
}

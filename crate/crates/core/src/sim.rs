//! Replay simulation: prioritize recorded sessions with any subset of the
//! strategies, score each order, and rank the strategies.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::SessionHistory;
use crate::dynamic::{CoFailurePrioritizer, FeedbackPrioritizer, FlipPrioritizer, RulePrioritizer};
use crate::error::{Error, Result};
use crate::evaluation::{apfd, apfdc, recall_cost_curve, SessionResult};
use crate::features::{history_features, hybrid_all, text_features, FeatureVector};
use crate::ridge::{RidgeSolver, DEFAULT_LAMBDA};
use crate::static_order::{self as so, LabelScheme, DEFAULT_ALPHA};
use crate::stats::{iqr, median, scott_knott, MetricSample};
use crate::terminator::{
    Terminator, TerminatorConfig, Variant, DEFAULT_BATCH_SIZE, DEFAULT_CERTAINTY_THRESHOLD,
};
use crate::view::HistoryView;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    A1,
    A2,
    B1,
    B2,
    B3,
    B4,
    B5,
    C1,
    D1,
    D2,
    D3,
    E1,
    E2,
    E3,
    F1,
    F2,
    F3,
}

impl Algorithm {
    pub const ALL: [Algorithm; 17] = [
        Algorithm::A1,
        Algorithm::A2,
        Algorithm::B1,
        Algorithm::B2,
        Algorithm::B3,
        Algorithm::B4,
        Algorithm::B5,
        Algorithm::C1,
        Algorithm::D1,
        Algorithm::D2,
        Algorithm::D3,
        Algorithm::E1,
        Algorithm::E2,
        Algorithm::E3,
        Algorithm::F1,
        Algorithm::F2,
        Algorithm::F3,
    ];

    /// Whether the order depends on the seed.
    pub fn is_seeded(self) -> bool {
        matches!(self, Algorithm::A1 | Algorithm::F1 | Algorithm::F2 | Algorithm::F3)
    }

    /// Parses a comma-separated list such as `F3,B4,A1`.
    pub fn parse_list(s: &str) -> Result<Vec<Algorithm>> {
        let mut out: Vec<Algorithm> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let a: Algorithm = part.parse()?;
            if !out.contains(&a) {
                out.push(a);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// Whether prioritizer wall time is measured. With `Disabled` every overhead
/// is zero, which makes reports byte-for-byte reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Timing {
    #[default]
    WallClock,
    Disabled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub algorithms: Vec<Algorithm>,
    /// 1-based first session to prioritize; sessions before it are history only.
    pub start_session: usize,
    pub seeds: Vec<u64>,
    pub batch_size: usize,
    pub certainty_threshold: usize,
    pub alpha: f64,
    pub timing: Timing,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            algorithms: Algorithm::ALL.to_vec(),
            start_session: 6,
            seeds: (1..=20).collect(),
            batch_size: DEFAULT_BATCH_SIZE,
            certainty_threshold: DEFAULT_CERTAINTY_THRESHOLD,
            alpha: DEFAULT_ALPHA,
            timing: Timing::WallClock,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.start_session < 2 {
            return Err(Error::Config("start_session must be at least 2".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.batch_size == 0 || self.certainty_threshold == 0 {
            return Err(Error::Config("N1 and N2 must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha must be in (0, 1], got {}", self.alpha)));
        }
        Ok(())
    }
}

/// One (session, algorithm, seed) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// 0-based session index.
    pub session: usize,
    pub algorithm: Algorithm,
    /// `None` for algorithms that ignore the seed.
    pub seed: Option<u64>,
    pub order: Vec<usize>,
    pub apfd: f64,
    pub apfdc: f64,
    pub overhead: f64,
    /// Prioritizer wall time, seconds.
    pub wall_time: f64,
}

/// Inputs shared across sessions, computed once per dataset. Their cost is not
/// charged to any session's overhead.
struct Shared {
    text: Vec<FeatureVector>,
    ridge: Option<RidgeSolver>,
}

/// Order emitted by one algorithm for `view`'s session, with the time spent
/// producing it. `failing` is consulted only through the feedback channel,
/// and only for tests already emitted.
fn prioritize(
    algorithm: Algorithm,
    view: &HistoryView<'_>,
    failing: &[bool],
    durations_now: &[f64],
    seed: u64,
    config: &SimulationConfig,
    shared: &Shared,
) -> Result<(Vec<usize>, Duration)> {
    let n = view.n_tests();
    let start = Instant::now();
    let fixed = |order: Vec<usize>| Ok((order, start.elapsed()));
    match algorithm {
        Algorithm::A1 => fixed(so::order_random(n, seed)),
        // The optimum is the only strategy allowed to see the session's truth.
        Algorithm::A2 => fixed(so::order_optimal(failing, durations_now)),
        Algorithm::B1 => fixed(so::order_b1(view)),
        Algorithm::B2 => fixed(so::order_b2(view)),
        Algorithm::B3 => fixed(so::order_b3(view, config.alpha)),
        Algorithm::B4 => fixed(so::order_b4(view)),
        Algorithm::B5 => fixed(so::order_b5(view)),
        Algorithm::C1 => fixed(so::order_c1(view)),
        Algorithm::D1 | Algorithm::D2 | Algorithm::D3 => {
            let scheme = match algorithm {
                Algorithm::D1 => LabelScheme::SimpleHistory,
                Algorithm::D2 => LabelScheme::AllHistory,
                _ => LabelScheme::WeightedHistory,
            };
            let solver = shared.ridge.as_ref().expect("ridge solver is built when D-group runs");
            fixed(so::order_supervised(view, solver, scheme))
        }
        Algorithm::E1 => run_feedback(CoFailurePrioritizer::new(view), start, failing, config.batch_size),
        Algorithm::E2 => run_feedback(FlipPrioritizer::new(view), start, failing, config.batch_size),
        Algorithm::E3 => run_feedback(RulePrioritizer::new(view), start, failing, config.batch_size),
        Algorithm::F1 | Algorithm::F2 | Algorithm::F3 => {
            let (variant, features) = match algorithm {
                Algorithm::F1 => (Variant::Text, shared.text.clone()),
                Algorithm::F2 => (Variant::History, history_features(view)),
                _ => (Variant::Hybrid, hybrid_all(&shared.text, &history_features(view))),
            };
            let tc = TerminatorConfig {
                batch_size: config.batch_size,
                certainty_threshold: config.certainty_threshold,
                ..TerminatorConfig::default()
            };
            let t = Terminator::new(features, variant, tc, seed);
            run_feedback(t, start, failing, config.batch_size)
        }
    }
}

/// Runs a feedback loop, charging only the prioritizer's own calls to the
/// clock.
fn run_feedback(
    mut p: impl FeedbackPrioritizer,
    start: Instant,
    failing: &[bool],
    batch: usize,
) -> Result<(Vec<usize>, Duration)> {
    let mut spent = start.elapsed();
    let mut order = Vec::with_capacity(failing.len());
    loop {
        let t0 = Instant::now();
        let next = p.next_batch(batch)?;
        spent += t0.elapsed();
        if next.is_empty() {
            break;
        }
        for &t in &next {
            let t0 = Instant::now();
            p.feedback(t, failing[t])?;
            spent += t0.elapsed();
        }
        order.extend(next);
    }
    Ok((order, spent))
}

/// Mixes a base seed with a session index so each session draws fresh
/// randomness.
fn session_seed(seed: u64, session: usize) -> u64 {
    let mut z = seed ^ (session as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Replays sessions `start_session..` (1-based) of `history` and returns one
/// cell per (session, algorithm, seed); algorithms that ignore the seed get
/// one cell per session. Sessions without failures are skipped.
pub fn simulate_cells(history: &SessionHistory, config: &SimulationConfig) -> Result<Vec<Cell>> {
    config.validate()?;
    if history.session_count() < config.start_session {
        return Err(Error::Config(format!(
            "dataset has {} sessions, fewer than start_session {}",
            history.session_count(),
            config.start_session
        )));
    }
    let needs_text = config
        .algorithms
        .iter()
        .any(|a| matches!(a, Algorithm::D1 | Algorithm::D2 | Algorithm::D3 | Algorithm::F1 | Algorithm::F3));
    let text = if needs_text {
        text_features(history)
    } else {
        Vec::new()
    };
    let ridge = config
        .algorithms
        .iter()
        .any(|a| matches!(a, Algorithm::D1 | Algorithm::D2 | Algorithm::D3))
        .then(|| RidgeSolver::new(&text, DEFAULT_LAMBDA));
    let shared = Shared { text, ridge };

    let sessions: Vec<usize> = (config.start_session - 1..history.session_count())
        .filter(|&s| !history.failures(s).is_empty())
        .collect();
    let skipped = history.session_count() - (config.start_session - 1) - sessions.len();
    if skipped > 0 {
        info!("{skipped} sessions without failures are not scored");
    }

    let mut jobs = Vec::new();
    for &s in &sessions {
        for &a in &config.algorithms {
            if a.is_seeded() {
                jobs.extend(config.seeds.iter().map(|&seed| (s, a, Some(seed))));
            } else {
                jobs.push((s, a, None));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(s, a, seed)| {
            let view = HistoryView::new(history, s)?;
            let failing: Vec<bool> = history.tests().iter().map(|t| t.outcomes[s].is_failed()).collect();
            let durations = history.durations(s);
            let cell_seed = session_seed(seed.unwrap_or(0), s);
            let (order, elapsed) = prioritize(a, &view, &failing, &durations, cell_seed, config, &shared)?;
            let mut result = SessionResult::new(order, failing, durations);
            result.algo_wall_time = match config.timing {
                Timing::WallClock => elapsed.as_secs_f64(),
                Timing::Disabled => 0.0,
            };
            let score = apfdc(&result)?.expect("scored sessions have failures");
            let total = result.total_duration();
            debug!("session {s} {a} seed {seed:?}: APFDc {score:.4}");
            Ok(Cell {
                session: s,
                algorithm: a,
                seed,
                apfd: apfd(&result).expect("scored sessions have failures"),
                apfdc: score,
                overhead: result.algo_wall_time / total,
                wall_time: result.algo_wall_time,
                order: result.order,
            })
        })
        .collect()
}

pub fn simulate(history: &SessionHistory, config: &SimulationConfig) -> Result<EvaluationReport> {
    Ok(EvaluationReport::from_cells(simulate_cells(history, config)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    Apfdc,
    Overhead,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Apfdc => "apfdc",
            Metric::Overhead => "overhead",
        }
    }

    fn value(self, cell: &Cell) -> f64 {
        match self {
            Metric::Apfdc => cell.apfdc,
            Metric::Overhead => cell.overhead,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub metric: Metric,
    /// Scott-Knott rank; 1 is the cluster with the lowest values.
    pub rank: usize,
    pub treatment: Algorithm,
    pub median: f64,
    pub iqr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub rows: Vec<ReportRow>,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Csv,
    CurveCsv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "curve-csv" => Ok(ReportFormat::CurveCsv),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

impl EvaluationReport {
    pub fn from_cells(cells: Vec<Cell>) -> Self {
        let mut rows = Vec::new();
        for metric in [Metric::Apfdc, Metric::Overhead] {
            let mut by_algo: BTreeMap<Algorithm, Vec<f64>> = BTreeMap::new();
            for c in &cells {
                by_algo.entry(c.algorithm).or_default().push(metric.value(c));
            }
            let samples: Vec<MetricSample> = by_algo
                .iter()
                .map(|(a, v)| MetricSample::new(a.to_string(), v.clone()))
                .collect();
            let ranks = scott_knott(&samples);
            let mut block: Vec<ReportRow> = by_algo
                .iter()
                .map(|(a, v)| ReportRow {
                    metric,
                    rank: ranks[&a.to_string()],
                    treatment: *a,
                    median: median(v),
                    iqr: iqr(v),
                })
                .collect();
            block.sort_by(|x, y| {
                y.rank
                    .cmp(&x.rank)
                    .then(y.median.total_cmp(&x.median))
                    .then(x.treatment.cmp(&y.treatment))
            });
            rows.extend(block);
        }
        Self { rows, cells }
    }

    pub fn row(&self, metric: Metric, algorithm: Algorithm) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && r.treatment == algorithm)
    }

    /// Per-cell values of `metric` for `algorithm`, in cell order.
    pub fn values(&self, metric: Metric, algorithm: Algorithm) -> Vec<f64> {
        self.cells
            .iter()
            .filter(|c| c.algorithm == algorithm)
            .map(|c| metric.value(c))
            .collect()
    }

    pub fn write_table<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |source| Error::Io {
            path: "<report>".into(),
            source,
        };
        // overhead is shown as a percentage of suite runtime
        for (metric, title, scale) in [(Metric::Apfdc, "apfdc", 1.0), (Metric::Overhead, "overhead (%)", 100.0)] {
            writeln!(out, "{title}").map_err(io)?;
            writeln!(out, "{:>4}  {:<9}  {:>8}  {:>8}", "rank", "treatment", "median", "iqr").map_err(io)?;
            for r in self.rows.iter().filter(|r| r.metric == metric) {
                writeln!(
                    out,
                    "{:>4}  {:<9}  {:>8.4}  {:>8.4}",
                    r.rank,
                    r.treatment.to_string(),
                    r.median * scale,
                    r.iqr * scale
                )
                .map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric", "rank", "treatment", "median", "iqr"])?;
        for r in &self.rows {
            w.write_record([
                r.metric.name().to_string(),
                r.rank.to_string(),
                r.treatment.to_string(),
                format!("{:.6}", r.median),
                format!("{:.6}", r.iqr),
            ])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<report>".into(),
            source,
        })?;
        Ok(())
    }

    /// Long-form recall-versus-cost curves for every cell. Needs the history
    /// the cells were computed from.
    pub fn write_curves<W: Write>(&self, history: &SessionHistory, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["treatment", "seed", "session", "cost_fraction", "recall"])?;
        for c in &self.cells {
            if c.session >= history.session_count() || c.order.len() != history.n_tests() {
                return Err(Error::Config("cells do not belong to this dataset".into()));
            }
            let result = cell_result(history, c);
            let seed = c.seed.map(|s| s.to_string()).unwrap_or_default();
            let session = history.session_ids()[c.session].clone();
            for (x, y) in recall_cost_curve(&result)? {
                w.write_record([
                    c.algorithm.to_string(),
                    seed.clone(),
                    session.clone(),
                    format!("{x:.9}"),
                    format!("{y:.9}"),
                ])?;
            }
        }
        w.flush().map_err(|source| Error::Io {
            path: "<curves>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn write<W: Write>(&self, format: ReportFormat, history: Option<&SessionHistory>, out: W) -> Result<()> {
        match format {
            ReportFormat::Table => self.write_table(out),
            ReportFormat::Csv => self.write_csv(out),
            ReportFormat::CurveCsv => {
                let h = history.ok_or_else(|| Error::Config("curve-csv needs the dataset".into()))?;
                self.write_curves(h, out)
            }
        }
    }
}

/// Rebuilds the scored session for a cell.
pub fn cell_result(history: &SessionHistory, cell: &Cell) -> SessionResult {
    let s = cell.session;
    let mut r = SessionResult::new(
        cell.order.clone(),
        history.tests().iter().map(|t| t.outcomes[s].is_failed()).collect(),
        history.durations(s),
    );
    r.algo_wall_time = cell.wall_time;
    r
}

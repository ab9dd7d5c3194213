//! Feedback-driven prioritizers that reorder the remaining tests as results
//! from the current session arrive: co-failure (E1), flipping history (E2) and
//! mined pass/fail rules (E3).
//!
//! Pairwise statistics are computed from per-test session bitsets, so a pair
//! lookup is a handful of `popcount`s.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::dataset::Outcome;
use crate::error::{Error, Result};
use crate::order::positions;
use crate::static_order::{failure_rate, order_b4};
use crate::view::HistoryView;

/// Contract shared by every prioritizer that consumes in-session results.
///
/// Each test is emitted exactly once per session. Emitted tests are pending
/// until their result is reported through [`feedback`](Self::feedback).
pub trait FeedbackPrioritizer {
    /// Up to `k` tests to run next; empty once everything has been emitted.
    fn next_batch(&mut self, k: usize) -> Result<Vec<usize>>;
    fn feedback(&mut self, test: usize, failed: bool) -> Result<()>;
    /// Tests not yet emitted.
    fn remaining(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Waiting,
    Pending,
    Done,
}

/// Emission bookkeeping common to the E-group.
#[derive(Debug, Clone)]
struct Ledger {
    slots: Vec<Slot>,
    waiting: usize,
}

impl Ledger {
    fn new(n: usize) -> Self {
        Self {
            slots: vec![Slot::Waiting; n],
            waiting: n,
        }
    }

    fn is_waiting(&self, t: usize) -> bool {
        self.slots[t] == Slot::Waiting
    }

    fn emit(&mut self, t: usize) {
        debug_assert!(self.is_waiting(t));
        self.slots[t] = Slot::Pending;
        self.waiting -= 1;
    }

    fn complete(&mut self, t: usize) -> Result<()> {
        match self.slots.get(t) {
            Some(Slot::Pending) => {
                self.slots[t] = Slot::Done;
                Ok(())
            }
            _ => Err(Error::Contract(format!("feedback for test {t}, which is not pending"))),
        }
    }
}

/// Fixed-width set of session indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SessionBits(Vec<u64>);

impl SessionBits {
    pub fn new(len: usize) -> Self {
        Self(vec![0; len.div_ceil(64)])
    }

    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn and_count(&self, other: &Self) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }
}

/// Per-test session sets of failures and passes over the visible history.
#[derive(Debug, Clone)]
pub struct CoFailureTable {
    failed: Vec<SessionBits>,
    passed: Vec<SessionBits>,
}

impl CoFailureTable {
    pub fn new(view: &HistoryView<'_>) -> Self {
        let s = view.prior_sessions();
        let mut failed = vec![SessionBits::new(s); view.n_tests()];
        let mut passed = failed.clone();
        for t in 0..view.n_tests() {
            for (i, o) in view.outcomes(t).iter().enumerate() {
                match o {
                    Outcome::Failed => failed[t].set(i),
                    Outcome::Passed => passed[t].set(i),
                    Outcome::Skipped | Outcome::Timeout => {}
                }
            }
        }
        Self { failed, passed }
    }

    fn with(&self, t: usize, failed: bool) -> &SessionBits {
        if failed {
            &self.failed[t]
        } else {
            &self.passed[t]
        }
    }

    /// Sessions where `a` had outcome `a_failed` and `b` had outcome `b_failed`.
    pub fn joint(&self, a: usize, a_failed: bool, b: usize, b_failed: bool) -> usize {
        self.with(a, a_failed).and_count(self.with(b, b_failed))
    }

    /// Sessions where `a` had outcome `a_failed` and `b` was executed.
    pub fn co_executed(&self, a: usize, a_failed: bool, b: usize) -> usize {
        self.joint(a, a_failed, b, true) + self.joint(a, a_failed, b, false)
    }

    /// P(`test` fails | `given` had outcome `given_failed`), over sessions where
    /// both were executed. `None` without co-execution history.
    pub fn conditional_fail(&self, test: usize, given: usize, given_failed: bool) -> Option<f64> {
        let denom = self.co_executed(given, given_failed, test);
        (denom > 0).then(|| self.joint(given, given_failed, test, true) as f64 / denom as f64)
    }

    pub fn n_tests(&self) -> usize {
        self.failed.len()
    }
}

/// Picks the up-to-`k` waiting tests with the best key; ties by lowest index.
fn take_best(
    ledger: &mut Ledger,
    k: usize,
    mut better: impl FnMut(usize, usize) -> bool,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(k.min(ledger.waiting));
    while out.len() < k && ledger.waiting > 0 {
        let mut best: Option<usize> = None;
        for t in 0..ledger.slots.len() {
            if ledger.is_waiting(t) && best.is_none_or(|b| better(t, b)) {
                best = Some(t);
            }
        }
        let t = best.expect("waiting > 0");
        ledger.emit(t);
        out.push(t);
    }
    out
}

/// E1: co-failure. Every waiting test's priority moves by
/// `P(t fails | finished outcome) − 0.5` when a result arrives.
#[derive(Debug, Clone)]
pub struct CoFailurePrioritizer {
    table: CoFailureTable,
    priority: Vec<f64>,
    ledger: Ledger,
}

impl CoFailurePrioritizer {
    pub fn new(view: &HistoryView<'_>) -> Self {
        let n = view.n_tests();
        Self {
            table: CoFailureTable::new(view),
            priority: vec![0.0; n],
            ledger: Ledger::new(n),
        }
    }

    pub fn priorities(&self) -> &[f64] {
        &self.priority
    }

    /// Priority increment for `test` after `finished` reported `failed`.
    pub fn increment(&self, test: usize, finished: usize, failed: bool) -> f64 {
        self.table
            .conditional_fail(test, finished, failed)
            .unwrap_or(0.5)
            - 0.5
    }
}

impl FeedbackPrioritizer for CoFailurePrioritizer {
    fn next_batch(&mut self, k: usize) -> Result<Vec<usize>> {
        let p = &self.priority;
        Ok(take_best(&mut self.ledger, k, |a, b| p[a] > p[b]))
    }

    fn feedback(&mut self, test: usize, failed: bool) -> Result<()> {
        self.ledger.complete(test)?;
        for t in 0..self.priority.len() {
            if self.ledger.is_waiting(t) {
                self.priority[t] += self.increment(t, test, failed);
            }
        }
        Ok(())
    }

    fn remaining(&self) -> usize {
        self.ledger.waiting
    }
}

/// Per-pair count of session transitions where both tests flipped between
/// Passed and Failed.
#[derive(Debug, Clone)]
pub struct FlipTable {
    flips: Vec<SessionBits>,
}

impl FlipTable {
    pub fn new(view: &HistoryView<'_>) -> Self {
        let s = view.prior_sessions();
        let flips = (0..view.n_tests())
            .map(|t| {
                let mut bits = SessionBits::new(s);
                for (i, w) in view.outcomes(t).windows(2).enumerate() {
                    let flipped = w[0].is_executed() && w[1].is_executed() && w[0] != w[1];
                    if flipped {
                        bits.set(i);
                    }
                }
                bits
            })
            .collect();
        Self { flips }
    }

    pub fn count(&self, a: usize, b: usize) -> usize {
        self.flips[a].and_count(&self.flips[b])
    }

    pub fn flip_total(&self, a: usize) -> usize {
        self.flips[a].count()
    }
}

/// E2: flipping history. Starts from the ROCKET order; on a failure of `a`,
/// each waiting `b` takes priority `max(current, flips(a, b))`.
#[derive(Debug, Clone)]
pub struct FlipPrioritizer {
    table: FlipTable,
    priority: Vec<f64>,
    /// Position in the ROCKET order, the tie-break key.
    base_rank: Vec<usize>,
    ledger: Ledger,
}

impl FlipPrioritizer {
    pub fn new(view: &HistoryView<'_>) -> Self {
        let n = view.n_tests();
        Self {
            table: FlipTable::new(view),
            priority: vec![0.0; n],
            base_rank: positions(&order_b4(view), n),
            ledger: Ledger::new(n),
        }
    }

    pub fn priorities(&self) -> &[f64] {
        &self.priority
    }
}

impl FeedbackPrioritizer for FlipPrioritizer {
    fn next_batch(&mut self, k: usize) -> Result<Vec<usize>> {
        let (p, r) = (&self.priority, &self.base_rank);
        Ok(take_best(&mut self.ledger, k, |a, b| {
            p[a] > p[b] || (p[a] == p[b] && r[a] < r[b])
        }))
    }

    fn feedback(&mut self, test: usize, failed: bool) -> Result<()> {
        self.ledger.complete(test)?;
        if failed {
            for t in 0..self.priority.len() {
                if self.ledger.is_waiting(t) {
                    let c = self.table.count(test, t) as f64;
                    self.priority[t] = self.priority[t].max(c);
                }
            }
        }
        Ok(())
    }

    fn remaining(&self) -> usize {
        self.ledger.waiting
    }
}

/// `(antecedent = outcome) ⇒ (consequent = outcome)` over co-executed sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub antecedent: usize,
    pub antecedent_failed: bool,
    pub consequent: usize,
    pub consequent_failed: bool,
    pub support: usize,
    pub confidence: f64,
}

impl Rule {
    /// A fail rule predicts the consequent fails; a pass rule that it passes.
    pub fn is_fail_rule(&self) -> bool {
        self.consequent_failed
    }
}

pub const DEFAULT_MIN_SUPPORT: usize = 2;
pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.9;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
}

impl RuleSet {
    /// Single-antecedent rules with `support ≥ min_support` and
    /// `confidence > min_confidence`.
    pub fn mine(view: &HistoryView<'_>, min_support: usize, min_confidence: f64) -> Self {
        let table = CoFailureTable::new(view);
        let n = table.n_tests();
        let mut rules = Vec::new();
        for a in 0..n {
            for a_failed in [true, false] {
                if table.with(a, a_failed).count() < min_support {
                    continue;
                }
                for c in (0..n).filter(|&c| c != a) {
                    let denom = table.co_executed(a, a_failed, c);
                    if denom < min_support {
                        continue;
                    }
                    for c_failed in [true, false] {
                        let support = table.joint(a, a_failed, c, c_failed);
                        let confidence = support as f64 / denom as f64;
                        if support >= min_support && confidence > min_confidence {
                            rules.push(Rule {
                                antecedent: a,
                                antecedent_failed: a_failed,
                                consequent: c,
                                consequent_failed: c_failed,
                                support,
                                confidence,
                            });
                        }
                    }
                }
            }
        }
        Self { rules }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Number of rules each test takes part in, as antecedent or consequent.
    pub fn involvement(&self, n: usize) -> Vec<usize> {
        let mut count = vec![0; n];
        for r in &self.rules {
            count[r.antecedent] += 1;
            count[r.consequent] += 1;
        }
        count
    }
}

/// E3: rule-based queue. Initial order by rule involvement, then failure rate.
/// When a result matches a rule's antecedent, a predicted-failing consequent
/// jumps to the front and a predicted-passing one goes to the back.
#[derive(Debug, Clone)]
pub struct RulePrioritizer {
    queue: VecDeque<usize>,
    /// Rule indices keyed by (antecedent, antecedent_failed).
    by_antecedent: Vec<[Vec<usize>; 2]>,
    rules: RuleSet,
    ledger: Ledger,
}

impl RulePrioritizer {
    pub fn new(view: &HistoryView<'_>) -> Self {
        Self::with_rules(view, RuleSet::mine(view, DEFAULT_MIN_SUPPORT, DEFAULT_MIN_CONFIDENCE))
    }

    pub fn with_rules(view: &HistoryView<'_>, rules: RuleSet) -> Self {
        let n = view.n_tests();
        let involvement = rules.involvement(n);
        let rate: Vec<f64> = (0..n).map(|t| failure_rate(view.outcomes(t))).collect();
        let mut initial: Vec<usize> = (0..n).collect();
        initial.sort_by(|&a, &b| {
            involvement[b]
                .cmp(&involvement[a])
                .then(rate[b].total_cmp(&rate[a]))
                .then(a.cmp(&b))
        });
        let mut by_antecedent = vec![[Vec::new(), Vec::new()]; n];
        for (i, r) in rules.rules.iter().enumerate() {
            by_antecedent[r.antecedent][r.antecedent_failed as usize].push(i);
        }
        Self {
            queue: initial.into(),
            by_antecedent,
            rules,
            ledger: Ledger::new(n),
        }
    }

    pub fn queue(&self) -> Vec<usize> {
        self.queue.iter().copied().collect()
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }
}

impl FeedbackPrioritizer for RulePrioritizer {
    fn next_batch(&mut self, k: usize) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let Some(t) = self.queue.pop_front() else { break };
            self.ledger.emit(t);
            out.push(t);
        }
        Ok(out)
    }

    fn feedback(&mut self, test: usize, failed: bool) -> Result<()> {
        self.ledger.complete(test)?;
        let mut fronts: Vec<(f64, usize)> = Vec::new();
        let mut backs: Vec<(f64, usize)> = Vec::new();
        for &ri in &self.by_antecedent[test][failed as usize] {
            let r = &self.rules.rules[ri];
            if !self.ledger.is_waiting(r.consequent) {
                continue;
            }
            if r.is_fail_rule() {
                fronts.push((r.confidence, r.consequent));
            } else {
                backs.push((r.confidence, r.consequent));
            }
        }
        if fronts.is_empty() && backs.is_empty() {
            return Ok(());
        }
        let by_conf = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
        fronts.sort_by(by_conf);
        backs.sort_by(by_conf);
        let mut moved = vec![false; self.ledger.slots.len()];
        let mut front: Vec<usize> = Vec::new();
        for &(_, t) in &fronts {
            if !std::mem::replace(&mut moved[t], true) {
                front.push(t);
            }
        }
        let mut back: Vec<usize> = Vec::new();
        for &(_, t) in &backs {
            if !std::mem::replace(&mut moved[t], true) {
                back.push(t);
            }
        }
        let rest = self.queue.iter().copied().filter(|&t| !moved[t]);
        self.queue = front.iter().copied().chain(rest).chain(back).collect();
        Ok(())
    }

    fn remaining(&self) -> usize {
        self.ledger.waiting
    }
}

/// Drains a prioritizer with results from `failed`, `batch` tests at a time.
pub fn drain(p: &mut dyn FeedbackPrioritizer, batch: usize, failed: &[bool]) -> Result<Vec<usize>> {
    let mut order = Vec::with_capacity(failed.len());
    loop {
        let next = p.next_batch(batch)?;
        if next.is_empty() {
            break;
        }
        for &t in &next {
            p.feedback(t, failed[t])?;
        }
        order.extend(next);
    }
    Ok(order)
}

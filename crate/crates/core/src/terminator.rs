//! Active-learning prioritization.
//!
//! Tests are executed in batches. Until the first failure shows up, batches
//! are drawn uniformly at random. After that, every batch starts by presuming
//! a random sample of unexecuted tests (as many as have been executed) to be
//! passing, training a class-balanced linear SVM on executed plus presumed
//! tests, and querying the unexecuted tests closest to the decision boundary
//! (uncertainty sampling). Once `certainty_threshold` failures are known,
//! training switches to aggressive undersampling (keep only the most
//! confidently negative examples, as many as there are failures, and refit
//! unweighted) and querying switches to the tests with the highest decision
//! values (certainty sampling).

use rand::seq::index::sample;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamic::FeedbackPrioritizer;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::order::{order_by_score, Direction};
use crate::svm::{self, ClassWeight, LinearModel, SvmParams};

pub const DEFAULT_BATCH_SIZE: usize = 10;
pub const DEFAULT_CERTAINTY_THRESHOLD: usize = 30;

/// Which features the classifier sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// F1: description term frequencies.
    Text,
    /// F2: prior-session outcome encoding.
    History,
    /// F3: both, concatenated.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminatorConfig {
    pub batch_size: usize,
    pub certainty_threshold: usize,
    pub svm: SvmParams,
}

impl Default for TerminatorConfig {
    fn default() -> Self {
        Self {
            batch_size: DEFAULT_BATCH_SIZE,
            certainty_threshold: DEFAULT_CERTAINTY_THRESHOLD,
            svm: SvmParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QueryMode {
    Random,
    Uncertainty,
    Certainty,
}

// Named streams split from the session seed.
const STREAM_ORDER: u64 = 1;
const STREAM_PRESUME: u64 = 2;
const STREAM_SVM: u64 = 3;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Mid-session snapshot. Features are not included; they are rebuilt from the
/// dataset on restore.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    #[serde(rename = "L")]
    pub executed: Vec<usize>,
    #[serde(rename = "L_R")]
    pub failed: Vec<usize>,
    pub pending: Vec<usize>,
    pub seed: u64,
    pub n1: usize,
    pub n2: usize,
    pub variant: Variant,
    rng_order: ChaCha8Rng,
    rng_presume: ChaCha8Rng,
    rng_svm: ChaCha8Rng,
}

#[derive(Debug, Clone)]
pub struct Terminator {
    features: Vec<FeatureVector>,
    variant: Variant,
    config: TerminatorConfig,
    seed: u64,
    /// L, in execution order.
    executed: Vec<usize>,
    /// L_R, in execution order.
    failed: Vec<usize>,
    pending: Vec<usize>,
    /// Indexed by test: 0 unexecuted, 1 pending, 2 executed.
    state: Vec<u8>,
    /// Indexed by test: executed and failed.
    is_failed: Vec<bool>,
    rng_order: ChaCha8Rng,
    rng_presume: ChaCha8Rng,
    rng_svm: ChaCha8Rng,
    last_mode: Option<QueryMode>,
    last_training_sizes: Vec<usize>,
}

const UNEXECUTED: u8 = 0;
const PENDING: u8 = 1;
const EXECUTED: u8 = 2;

impl Terminator {
    pub fn new(
        features: Vec<FeatureVector>,
        variant: Variant,
        config: TerminatorConfig,
        seed: u64,
    ) -> Self {
        assert!(config.batch_size >= 1 && config.certainty_threshold >= 1);
        let n = features.len();
        Self {
            features,
            variant,
            config,
            seed,
            executed: Vec::new(),
            failed: Vec::new(),
            pending: Vec::new(),
            state: vec![UNEXECUTED; n],
            is_failed: vec![false; n],
            rng_order: stream(seed, STREAM_ORDER),
            rng_presume: stream(seed, STREAM_PRESUME),
            rng_svm: stream(seed, STREAM_SVM),
            last_mode: None,
            last_training_sizes: Vec::new(),
        }
    }

    pub fn n_tests(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[FeatureVector] {
        &self.features
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn executed(&self) -> &[usize] {
        &self.executed
    }

    pub fn failed(&self) -> &[usize] {
        &self.failed
    }

    pub fn pending(&self) -> &[usize] {
        &self.pending
    }

    pub fn last_mode(&self) -> Option<QueryMode> {
        self.last_mode
    }

    /// Sample counts of the fits made by the last [`train`](Self::train): one
    /// entry, or two when undersampling refit the model.
    pub fn last_training_sizes(&self) -> &[usize] {
        &self.last_training_sizes
    }

    fn certain(&self) -> bool {
        self.failed.len() >= self.config.certainty_threshold
    }

    /// Unexecuted (and not pending) tests in index order.
    pub fn unexecuted(&self) -> Vec<usize> {
        (0..self.state.len())
            .filter(|&t| self.state[t] == UNEXECUTED)
            .collect()
    }

    /// Executed tests with their true labels plus `|L|` random unexecuted tests
    /// presumed passing (all of them if fewer remain).
    pub fn presume(&mut self) -> Vec<(usize, bool)> {
        let pool = self.unexecuted();
        let k = self.executed.len().min(pool.len());
        let mut labeled: Vec<(usize, bool)> = self
            .executed
            .iter()
            .map(|&t| (t, self.is_failed[t]))
            .collect();
        let mut picked: Vec<usize> = sample(&mut self.rng_presume, pool.len(), k)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        picked.sort_unstable();
        labeled.extend(picked.into_iter().map(|t| (t, false)));
        labeled
    }

    fn fit(&mut self, set: &[(usize, bool)], weighting: ClassWeight) -> Result<LinearModel> {
        let xs: Vec<&FeatureVector> = set.iter().map(|&(t, _)| &self.features[t]).collect();
        let ys: Vec<bool> = set.iter().map(|&(_, y)| y).collect();
        let params = self
            .config
            .svm
            .with_class_weight(weighting)
            .with_seed(self.rng_svm.next_u64());
        svm::fit(&xs, &ys, &params)
    }

    /// Balanced fit on `labeled`; with at least `certainty_threshold` failures,
    /// refit unweighted on [`undersample`](Self::undersample)'s reduced set.
    pub fn train(&mut self, labeled: &[(usize, bool)]) -> Result<LinearModel> {
        if self.failed.is_empty() {
            return Err(Error::Contract("training requires at least one failure".into()));
        }
        self.last_training_sizes = vec![labeled.len()];
        let model = self.fit(labeled, ClassWeight::Balanced)?;
        if !self.certain() {
            return Ok(model);
        }
        let reduced = self.undersample(labeled, &model);
        self.last_training_sizes.push(reduced.len());
        self.fit(&reduced, ClassWeight::None)
    }

    /// The positives of `labeled` plus as many negatives, those with the
    /// lowest decision values under `model`.
    pub fn undersample(&self, labeled: &[(usize, bool)], model: &LinearModel) -> Vec<(usize, bool)> {
        let negatives: Vec<usize> = labeled.iter().filter(|(_, y)| !y).map(|&(t, _)| t).collect();
        let scores: Vec<f64> = negatives.iter().map(|&t| model.decision(&self.features[t])).collect();
        let positives = labeled.len() - negatives.len();
        let mut reduced: Vec<(usize, bool)> = labeled.iter().filter(|(_, y)| *y).copied().collect();
        reduced.extend(
            order_by_score(&scores, Direction::Ascending)
                .into_iter()
                .take(positives.min(negatives.len()))
                .map(|i| (negatives[i], false)),
        );
        reduced
    }

    /// Up to `batch_size` unexecuted tests: highest decision values once in
    /// certainty mode, smallest |decision| before.
    pub fn query(&mut self, model: &LinearModel) -> Vec<usize> {
        let pool = self.unexecuted();
        let d: Vec<f64> = pool.iter().map(|&t| model.decision(&self.features[t])).collect();
        let ranked = if self.certain() {
            self.last_mode = Some(QueryMode::Certainty);
            order_by_score(&d, Direction::Descending)
        } else {
            self.last_mode = Some(QueryMode::Uncertainty);
            let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
            order_by_score(&abs, Direction::Ascending)
        };
        ranked
            .into_iter()
            .take(self.config.batch_size)
            .map(|i| pool[i])
            .collect()
    }

    fn random_batch(&mut self) -> Vec<usize> {
        let pool = self.unexecuted();
        let k = self.config.batch_size.min(pool.len());
        self.last_mode = Some(QueryMode::Random);
        sample(&mut self.rng_order, pool.len(), k)
            .into_iter()
            .map(|i| pool[i])
            .collect()
    }

    /// The next batch of tests to run. All results of the previous batch must
    /// have been reported.
    pub fn next(&mut self) -> Result<Vec<usize>> {
        if !self.pending.is_empty() {
            return Err(Error::Contract(format!(
                "{} results outstanding from the previous batch",
                self.pending.len()
            )));
        }
        if self.executed.len() == self.n_tests() {
            return Ok(Vec::new());
        }
        let batch = if self.failed.is_empty() {
            self.random_batch()
        } else {
            let labeled = self.presume();
            let model = self.train(&labeled)?;
            self.query(&model)
        };
        for &t in &batch {
            self.state[t] = PENDING;
        }
        self.pending.clone_from(&batch);
        Ok(batch)
    }

    pub fn record(&mut self, test: usize, failed: bool) -> Result<()> {
        let Some(k) = self.pending.iter().position(|&t| t == test) else {
            return Err(Error::Contract(format!("feedback for test {test}, which is not pending")));
        };
        self.pending.remove(k);
        self.state[test] = EXECUTED;
        self.executed.push(test);
        if failed {
            self.failed.push(test);
            self.is_failed[test] = true;
        }
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            executed: self.executed.clone(),
            failed: self.failed.clone(),
            pending: self.pending.clone(),
            seed: self.seed,
            n1: self.config.batch_size,
            n2: self.config.certainty_threshold,
            variant: self.variant,
            rng_order: self.rng_order.clone(),
            rng_presume: self.rng_presume.clone(),
            rng_svm: self.rng_svm.clone(),
        }
    }

    /// Rebuilds a session from a checkpoint and the same features it was
    /// created with.
    pub fn restore(
        checkpoint: Checkpoint,
        features: Vec<FeatureVector>,
        svm: SvmParams,
    ) -> Result<Self> {
        let config = TerminatorConfig {
            batch_size: checkpoint.n1,
            certainty_threshold: checkpoint.n2,
            svm,
        };
        if config.batch_size == 0 || config.certainty_threshold == 0 {
            return Err(Error::Contract("n1 and n2 must be at least 1".into()));
        }
        let mut t = Terminator::new(features, checkpoint.variant, config, checkpoint.seed);
        let n = t.n_tests();
        for &i in checkpoint.executed.iter().chain(&checkpoint.pending) {
            if i >= n || t.state[i] != UNEXECUTED {
                return Err(Error::Contract(format!("checkpoint lists test {i} twice or out of range")));
            }
            t.state[i] = if checkpoint.pending.contains(&i) { PENDING } else { EXECUTED };
        }
        if checkpoint.failed.iter().any(|i| !checkpoint.executed.contains(i)) {
            return Err(Error::Contract("checkpoint failures must be executed".into()));
        }
        for &i in &checkpoint.failed {
            t.is_failed[i] = true;
        }
        t.executed = checkpoint.executed;
        t.failed = checkpoint.failed;
        t.pending = checkpoint.pending;
        t.rng_order = checkpoint.rng_order;
        t.rng_presume = checkpoint.rng_presume;
        t.rng_svm = checkpoint.rng_svm;
        Ok(t)
    }
}

impl FeedbackPrioritizer for Terminator {
    /// The batch size is fixed by the configuration; `k` caps it further.
    fn next_batch(&mut self, k: usize) -> Result<Vec<usize>> {
        let saved = self.config.batch_size;
        self.config.batch_size = saved.min(k.max(1));
        let out = self.next();
        self.config.batch_size = saved;
        out
    }

    fn feedback(&mut self, test: usize, failed: bool) -> Result<()> {
        self.record(test, failed)
    }

    fn remaining(&self) -> usize {
        self.n_tests() - self.executed.len() - self.pending.len()
    }
}

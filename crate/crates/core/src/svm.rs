//! Linear soft-margin SVM on sparse inputs.
//!
//! Minimizes the L2-regularized, per-sample weighted hinge loss
//!
//! ```text
//! J(w, b) = ½(‖w‖² + b²) + C Σᵢ cᵢ max(0, 1 − yᵢ(w·xᵢ + b))
//! ```
//!
//! by dual coordinate descent. The bias is treated as the weight of a constant
//! feature, so it is regularized along with `w`. Each coordinate step
//! touches only the nonzero entries of one sample, and samples pinned at a
//! bound are shrunk out of the active set. [`fit_traced`] additionally
//! evaluates the primal objective after every epoch and keeps the best iterate
//! seen so far, so its reported objective never increases from one epoch to
//! the next; [`fit`] skips that bookkeeping and returns the last iterate.
//! Samples are visited in a seeded shuffle of a content-defined order, so the
//! result does not depend on the order the samples are passed in.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassWeight {
    /// Each class's loss scaled by `n_samples / (2 · n_class)`.
    Balanced,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub cost: f64,
    pub class_weight: ClassWeight,
    pub max_epochs: usize,
    /// Stop once the spread of projected dual gradients drops below this
    /// (the customary 0.1 for dual coordinate descent).
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            cost: 1.0,
            class_weight: ClassWeight::Balanced,
            max_epochs: 200,
            tolerance: 0.1,
            seed: 0,
        }
    }
}

impl SvmParams {
    pub fn with_class_weight(mut self, class_weight: ClassWeight) -> Self {
        self.class_weight = class_weight;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    /// Signed margin `w·x + b`; positive means the failing class.
    pub fn decision(&self, x: &FeatureVector) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }

    pub fn decisions<'a>(&self, xs: impl IntoIterator<Item = &'a FeatureVector>) -> Vec<f64> {
        xs.into_iter().map(|x| self.decision(x)).collect()
    }

    fn norm_sq(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>() + self.bias * self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub epochs: usize,
    pub converged: bool,
    /// Best primal objective after each epoch.
    pub objective_trace: Vec<f64>,
}

fn sign(label: bool) -> f64 {
    if label {
        1.0
    } else {
        -1.0
    }
}

/// Per-sample loss multipliers.
pub fn sample_weights(labels: &[bool], scheme: ClassWeight) -> Vec<f64> {
    match scheme {
        ClassWeight::None => vec![1.0; labels.len()],
        ClassWeight::Balanced => {
            let n = labels.len() as f64;
            let pos = labels.iter().filter(|l| **l).count() as f64;
            let neg = n - pos;
            let (wp, wn) = (n / (2.0 * pos), n / (2.0 * neg));
            labels.iter().map(|&l| if l { wp } else { wn }).collect()
        }
    }
}

/// Primal objective `J(w, b)`.
pub fn objective(
    model: &LinearModel,
    samples: &[&FeatureVector],
    labels: &[bool],
    weights: &[f64],
    cost: f64,
) -> f64 {
    let loss: f64 = samples
        .iter()
        .zip(labels)
        .zip(weights)
        .map(|((x, &y), c)| c * (1.0 - sign(y) * model.decision(x)).max(0.0))
        .sum();
    0.5 * model.norm_sq() + cost * loss
}

/// A subgradient of `J` at `model`: (∂w, ∂b). Exact gradient wherever no
/// margin equals one.
pub fn subgradient(
    model: &LinearModel,
    samples: &[&FeatureVector],
    labels: &[bool],
    weights: &[f64],
    cost: f64,
) -> (Vec<f64>, f64) {
    let mut gw = model.weights.clone();
    let mut gb = model.bias;
    for ((x, &y), c) in samples.iter().zip(labels).zip(weights) {
        let ys = sign(y);
        if ys * model.decision(x) < 1.0 {
            for &(j, v) in x.entries() {
                gw[j] -= cost * c * ys * v;
            }
            gb -= cost * c * ys;
        }
    }
    (gw, gb)
}

fn cmp_entries(a: &FeatureVector, b: &FeatureVector) -> Ordering {
    let (ea, eb) = (a.entries(), b.entries());
    for (&(ia, va), &(ib, vb)) in ea.iter().zip(eb) {
        let o = ia.cmp(&ib).then(va.total_cmp(&vb));
        if o != Ordering::Equal {
            return o;
        }
    }
    ea.len().cmp(&eb.len())
}

pub fn fit(samples: &[&FeatureVector], labels: &[bool], params: &SvmParams) -> Result<LinearModel> {
    solve(samples, labels, params, false).map(|(m, _)| m)
}

pub fn fit_traced(
    samples: &[&FeatureVector],
    labels: &[bool],
    params: &SvmParams,
) -> Result<(LinearModel, FitReport)> {
    solve(samples, labels, params, true)
}

fn solve(
    samples: &[&FeatureVector],
    labels: &[bool],
    params: &SvmParams,
    traced: bool,
) -> Result<(LinearModel, FitReport)> {
    assert_eq!(samples.len(), labels.len());
    let pos = labels.iter().filter(|l| **l).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::DegenerateTrainingSet("both classes are required"));
    }
    let dim = samples[0].dim();
    let n = samples.len();
    let upper: Vec<f64> = sample_weights(labels, params.class_weight)
        .into_iter()
        .map(|c| c * params.cost)
        .collect();
    let sample_w: Vec<f64> = upper.iter().map(|u| u / params.cost).collect();
    let diag: Vec<f64> = samples.iter().map(|x| x.norm_sq() + 1.0).collect();
    let ys: Vec<f64> = labels.iter().map(|&l| sign(l)).collect();

    let mut alpha = vec![0.0; n];
    let mut model = LinearModel::zeros(dim);
    let mut best = model.clone();
    let mut best_obj = objective(&model, samples, labels, &sample_w, params.cost);
    let mut trace = Vec::new();
    // Visit samples in an order fixed by their content, not their position,
    // so permuting the input cannot change the iterates.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| labels[a].cmp(&labels[b]).then_with(|| cmp_entries(samples[a], samples[b])));
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut converged = false;
    let mut epochs = 0;
    // Shrinking: samples stuck at a bound whose gradient points outward are
    // set aside; everything is re-checked before declaring convergence.
    let mut active = n;
    let (mut pg_max_old, mut pg_min_old) = (f64::INFINITY, f64::NEG_INFINITY);

    while epochs < params.max_epochs {
        epochs += 1;
        order[..active].shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut s = 0;
        while s < active {
            let i = order[s];
            let x = samples[i];
            let g = ys[i] * model.decision(x) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                if g > pg_max_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                }
                g.min(0.0)
            } else if alpha[i] >= upper[i] {
                if g < pg_min_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                }
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / diag[i]).clamp(0.0, upper[i]);
                let step = (alpha[i] - old) * ys[i];
                for &(j, v) in x.entries() {
                    model.weights[j] += step * v;
                }
                model.bias += step;
            }
            s += 1;
        }
        if traced {
            let obj = objective(&model, samples, labels, &sample_w, params.cost);
            if obj <= best_obj {
                best_obj = obj;
                best.clone_from(&model);
            }
            trace.push(best_obj);
        }
        if pg_max - pg_min < params.tolerance {
            if active == n {
                converged = true;
                break;
            }
            active = n;
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
            continue;
        }
        pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
        pg_min_old = if pg_min >= 0.0 { f64::NEG_INFINITY } else { pg_min };
    }
    Ok((
        if traced { best } else { model },
        FitReport {
            epochs,
            converged,
            objective_trace: trace,
        },
    ))
}

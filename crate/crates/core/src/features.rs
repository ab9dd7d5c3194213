//! Sparse feature vectors for tests: term-frequency text features, per-session
//! history encodings, and their concatenation.

use std::collections::HashMap;

use crate::dataset::{Description, Outcome, SessionHistory};
use crate::error::{Error, Result};
use crate::view::HistoryView;

/// Sparse real vector. Entries are sorted by index and hold no explicit zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Builds from (index, value) pairs; duplicate indices are summed.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut entries: Vec<(usize, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|(i, _)| *i);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            assert!(i < dim, "index {i} out of dimension {dim}");
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|(_, v)| *v != 0.0);
        Self { dim, entries: merged }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        Self::from_pairs(values.len(), values.iter().copied().enumerate())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |(i, _)| *i)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    pub fn dot(&self, other: &FeatureVector) -> f64 {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut acc = 0.0;
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    acc += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        acc
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_pairs(self.dim, self.entries.iter().map(|&(i, v)| (i, v * factor)))
    }

    /// Unit L2 norm, or unchanged when all-zero.
    pub fn l2_normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(1.0 / n)
        }
    }

    /// `self` followed by `tail`; no renormalization.
    pub fn concat(&self, tail: &FeatureVector) -> Self {
        let offset = self.dim;
        let mut entries = self.entries.clone();
        entries.extend(tail.entries.iter().map(|&(i, v)| (i + offset, v)));
        Self {
            dim: self.dim + tail.dim,
            entries,
        }
    }
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Vocabulary in first-appearance order over the dataset.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut vocab = Self::default();
        for text in texts {
            for tok in tokenize(text) {
                if !vocab.index.contains_key(&tok) {
                    vocab.index.insert(tok.clone(), vocab.terms.len());
                    vocab.terms.push(tok);
                }
            }
        }
        vocab
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term_frequencies(&self, text: &str, offset: usize, dim: usize) -> FeatureVector {
        FeatureVector::from_pairs(
            dim,
            tokenize(text).filter_map(|t| self.index_of(&t).map(|i| (i + offset, 1.0))),
        )
    }
}

/// Term-frequency rows, L2-normalized, one per test in dataset order.
///
/// Pre-featurized vectors occupy the leading dimensions (padded to the longest
/// vector) and pass through after normalization; tokenized text fills the
/// dimensions after them.
pub fn text_features(history: &SessionHistory) -> Vec<FeatureVector> {
    let vector_dim = history
        .tests()
        .iter()
        .filter_map(|t| match &t.description {
            Description::Vector(v) => Some(v.len()),
            Description::Text(_) => None,
        })
        .max()
        .unwrap_or(0);
    let vocab = Vocabulary::build(history.tests().iter().filter_map(|t| match &t.description {
        Description::Text(s) => Some(s.as_str()),
        Description::Vector(_) => None,
    }));
    let dim = vector_dim + vocab.len();
    history
        .tests()
        .iter()
        .map(|t| {
            let raw = match &t.description {
                Description::Text(s) => vocab.term_frequencies(s, vector_dim, dim),
                Description::Vector(v) => {
                    FeatureVector::from_pairs(dim, v.iter().copied().enumerate())
                }
            };
            raw.l2_normalized()
        })
        .collect()
}

/// Failed → 1, Passed → −1, Skipped/Timeout → 0.
pub fn encode_outcome(o: Outcome) -> f64 {
    match o {
        Outcome::Failed => 1.0,
        Outcome::Passed => -1.0,
        Outcome::Skipped | Outcome::Timeout => 0.0,
    }
}

/// One dimension per session visible in `view`.
pub fn history_features(view: &HistoryView<'_>) -> Vec<FeatureVector> {
    let dim = view.prior_sessions();
    (0..view.n_tests())
        .map(|t| {
            FeatureVector::from_pairs(
                dim,
                view.outcomes(t).iter().map(|&o| encode_outcome(o)).enumerate(),
            )
        })
        .collect()
}

/// History features for prioritizing `session` (0-based); session 0 yields
/// empty vectors.
pub fn history_features_at(history: &SessionHistory, session: usize) -> Result<Vec<FeatureVector>> {
    if session >= history.session_count() {
        return Err(Error::SessionOutOfRange {
            index: session,
            count: history.session_count(),
        });
    }
    Ok(history_features(&HistoryView::new(history, session)?))
}

pub fn hybrid_features(text: &FeatureVector, hist: &FeatureVector) -> FeatureVector {
    text.concat(hist)
}

pub fn hybrid_all(text: &[FeatureVector], hist: &[FeatureVector]) -> Vec<FeatureVector> {
    text.iter().zip(hist).map(|(t, h)| hybrid_features(t, h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{toy_history, TestRecord};

    fn history_of(descs: &[&str]) -> SessionHistory {
        let tests = descs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                TestRecord::new(
                    format!("t{i}"),
                    Description::Text((*d).into()),
                    vec![Outcome::Passed],
                    vec![1.0],
                )
            })
            .collect();
        SessionHistory::new(vec!["1".into()], tests).unwrap()
    }

    #[test]
    fn term_frequency_then_l2() {
        let h = history_of(&["a b", "a a"]);
        let f = text_features(&h);
        let r = 1.0 / 2f64.sqrt();
        assert_eq!(f[0].dim(), 2);
        assert!((f[0].get(0) - r).abs() < 1e-12 && (f[0].get(1) - r).abs() < 1e-12);
        assert_eq!(f[1].entries(), &[(0, 1.0)]);
    }

    #[test]
    fn single_term_and_identical() {
        let f = text_features(&history_of(&["x"]));
        assert_eq!(f[0].entries(), &[(0, 1.0)]);
        let f = text_features(&history_of(&["Same words here", "same WORDS, here"]));
        assert_eq!(f[0], f[1]);
        assert!((f[0].dot(&f[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_description_is_zero() {
        let f = text_features(&history_of(&["", "a"]));
        assert_eq!(f[0].nnz(), 0);
        assert_eq!(f[0].norm(), 0.0);
    }

    #[test]
    fn vectors_pass_through_normalized() {
        let tests = vec![
            TestRecord::new("a", Description::Vector(vec![3.0, 4.0]), vec![Outcome::Passed], vec![1.0]),
            TestRecord::new("b", Description::Vector(vec![0.0, 0.0]), vec![Outcome::Passed], vec![1.0]),
        ];
        let h = SessionHistory::new(vec!["1".into()], tests).unwrap();
        let f = text_features(&h);
        let d = f[0].to_dense();
        assert!((d[0] - 0.6).abs() < 1e-12 && (d[1] - 0.8).abs() < 1e-12);
        assert_eq!(f[1].nnz(), 0);
    }

    #[test]
    fn toy_history_encoding() {
        let h = toy_history();
        let f = history_features_at(&h, 3).unwrap();
        assert_eq!(f[0].to_dense(), vec![-1.0, 1.0, 0.0]);
        assert!(history_features_at(&h, 0).unwrap().iter().all(|v| v.dim() == 0));
        assert!(history_features_at(&h, 4).is_err());
    }

    #[test]
    fn all_passed_encoding() {
        let tests = vec![TestRecord::new(
            "a",
            Description::Text("x".into()),
            vec![Outcome::Passed; 4],
            vec![1.0; 4],
        )];
        let h = SessionHistory::new((0..4).map(|s| s.to_string()).collect(), tests).unwrap();
        assert_eq!(history_features_at(&h, 3).unwrap()[0].to_dense(), vec![-1.0; 3]);
    }

    #[test]
    fn hybrid_dimensions() {
        let h = toy_history();
        let text = text_features(&h);
        let hist = history_features_at(&h, 3).unwrap();
        let hy = hybrid_all(&text, &hist);
        for ((t, s), y) in text.iter().zip(&hist).zip(&hy) {
            assert_eq!(y.dim(), t.dim() + s.dim());
        }
        // "test check box in page a" → 6 vocab terms + 3 new ones across the set
        assert_eq!(text[0].dim(), 9);

        let a = FeatureVector::from_pairs(3, [(0, 1.0)]);
        let hv = FeatureVector::from_dense(&[1.0, 0.0]);
        let c = hybrid_features(&a, &hv);
        assert_eq!(c.dim(), 5);
        assert_eq!(c.entries(), &[(0, 1.0), (3, 1.0)]);
        assert_eq!(hybrid_features(&FeatureVector::zeros(2), &FeatureVector::zeros(3)).nnz(), 0);
    }
}

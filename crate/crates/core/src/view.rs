use crate::dataset::{Description, Outcome, SessionHistory};
use crate::error::{Error, Result};

/// Read-only window over a history as seen when prioritizing one session.
///
/// Only sessions strictly before `current` are reachable. Accessors hand out
/// slices truncated at `current`, so nothing built on a view can observe the
/// outcomes or durations of the session being prioritized.
#[derive(Debug, Clone, Copy)]
pub struct HistoryView<'a> {
    history: &'a SessionHistory,
    current: usize,
}

impl<'a> HistoryView<'a> {
    /// `current` is the 0-based index of the session about to run; it may equal
    /// `session_count` to look at the whole history.
    pub fn new(history: &'a SessionHistory, current: usize) -> Result<Self> {
        if current > history.session_count() {
            return Err(Error::SessionOutOfRange {
                index: current,
                count: history.session_count(),
            });
        }
        Ok(Self { history, current })
    }

    pub fn n_tests(&self) -> usize {
        self.history.n_tests()
    }

    /// Number of sessions visible (the index of the session being prioritized).
    pub fn prior_sessions(&self) -> usize {
        self.current
    }

    pub fn test_id(&self, test: usize) -> &'a str {
        &self.history.test(test).test_id
    }

    pub fn description(&self, test: usize) -> &'a Description {
        &self.history.test(test).description
    }

    pub fn outcomes(&self, test: usize) -> &'a [Outcome] {
        &self.history.test(test).outcomes[..self.current]
    }

    pub fn durations(&self, test: usize) -> &'a [f64] {
        &self.history.test(test).durations[..self.current]
    }

    pub fn outcome(&self, test: usize, session: usize) -> Outcome {
        self.outcomes(test)[session]
    }

    /// The same history seen from an earlier session.
    pub fn truncated(&self, current: usize) -> Self {
        Self {
            history: self.history,
            current: current.min(self.current),
        }
    }
}

//! Black-box test case prioritization.
//!
//! Seventeen prioritization strategies over multi-session test execution
//! histories, from random and optimal baselines through history metrics and
//! supervised description models to feedback-driven dynamic orderings and the
//! active-learning [`terminator`] loop. The [`sim`] module replays recorded
//! sessions against any subset of them and scores the resulting orders with
//! APFD/APFDc and overhead, ranked with Scott-Knott clustering.

pub mod dataset;
pub mod dynamic;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod order;
pub mod ridge;
pub mod sim;
pub mod stats;
pub mod static_order;
pub mod svm;
pub mod synth;
pub mod terminator;
pub mod view;

pub use dataset::{Description, Outcome, SessionHistory, TestRecord};
pub use error::{Error, Result};
pub use features::FeatureVector;
pub use view::HistoryView;

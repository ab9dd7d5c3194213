//! Multi-session test histories: types, validation, and file ingestion.
//!
//! Two on-disk layouts are accepted. JSON lines carries one object per test:
//!
//! ```text
//! {"test_id": "t1", "description": "Test Check Box in page A", "vector": null,
//!  "sessions": [{"id": "r1", "outcome": "P", "duration_s": 1.0, "message": null}, ...]}
//! ```
//!
//! The CSV layout is long-form with one row per (test, session) and columns
//! `test_id, session_id, outcome, duration_s, message, description`.
//!
//! Failures whose message matches the timeout pattern are stored as
//! [`Outcome::Timeout`] and never count as failures downstream.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Result of one test in one session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Passed,
    Failed,
    Skipped,
    Timeout,
}

impl Outcome {
    pub fn is_failed(self) -> bool {
        self == Outcome::Failed
    }

    /// Passed or Failed. Skipped and Timeout sessions do not count as executions
    /// for history metrics.
    pub fn is_executed(self) -> bool {
        matches!(self, Outcome::Passed | Outcome::Failed)
    }

    pub fn code(self) -> &'static str {
        match self {
            Outcome::Passed => "P",
            Outcome::Failed => "F",
            Outcome::Skipped => "S",
            Outcome::Timeout => "T",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code.trim() {
            "P" | "p" | "passed" | "Passed" => Some(Outcome::Passed),
            "F" | "f" | "failed" | "Failed" => Some(Outcome::Failed),
            "S" | "s" | "skipped" | "Skipped" => Some(Outcome::Skipped),
            "T" | "t" | "timeout" | "Timeout" => Some(Outcome::Timeout),
            _ => None,
        }
    }
}

/// What is known about a test besides its results: free text, or a vector
/// that was featurized upstream.
#[derive(Debug, Clone, PartialEq)]
pub enum Description {
    Text(String),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestRecord {
    pub test_id: String,
    pub description: Description,
    pub outcomes: Vec<Outcome>,
    pub durations: Vec<f64>,
}

impl TestRecord {
    pub fn new(
        test_id: impl Into<String>,
        description: Description,
        outcomes: Vec<Outcome>,
        durations: Vec<f64>,
    ) -> Self {
        Self {
            test_id: test_id.into(),
            description,
            outcomes,
            durations,
        }
    }
}

/// Ordered sessions over a fixed test universe.
///
/// Tests keep their insertion order; that index is the tie-break key used by
/// every prioritizer.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionHistory {
    tests: Vec<TestRecord>,
    session_ids: Vec<String>,
}

impl SessionHistory {
    pub fn new(session_ids: Vec<String>, tests: Vec<TestRecord>) -> Result<Self> {
        if tests.is_empty() {
            return Err(Error::Empty);
        }
        if session_ids.is_empty() {
            return Err(Error::Invalid("session_count must be positive".into()));
        }
        let expected = session_ids.len();
        let mut seen = HashSet::with_capacity(tests.len());
        for t in &tests {
            if !seen.insert(t.test_id.as_str()) {
                return Err(Error::DuplicateTest(t.test_id.clone()));
            }
            for found in [t.outcomes.len(), t.durations.len()] {
                if found != expected {
                    return Err(Error::SessionCount {
                        test_id: t.test_id.clone(),
                        expected,
                        found,
                    });
                }
            }
            if let Some(d) = t.durations.iter().find(|d| !d.is_finite() || **d < 0.0) {
                return Err(Error::Invalid(format!(
                    "test {:?} has invalid duration {d}",
                    t.test_id
                )));
            }
        }
        Ok(Self { tests, session_ids })
    }

    pub fn tests(&self) -> &[TestRecord] {
        &self.tests
    }

    pub fn test(&self, index: usize) -> &TestRecord {
        &self.tests[index]
    }

    pub fn n_tests(&self) -> usize {
        self.tests.len()
    }

    pub fn session_count(&self) -> usize {
        self.session_ids.len()
    }

    pub fn session_ids(&self) -> &[String] {
        &self.session_ids
    }

    pub fn index_of(&self, test_id: &str) -> Option<usize> {
        self.tests.iter().position(|t| t.test_id == test_id)
    }

    /// Indices of tests that failed in `session` (Timeout excluded).
    pub fn failures(&self, session: usize) -> Vec<usize> {
        self.tests
            .iter()
            .enumerate()
            .filter(|(_, t)| t.outcomes[session].is_failed())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn durations(&self, session: usize) -> Vec<f64> {
        self.tests.iter().map(|t| t.durations[session]).collect()
    }

    /// Mutable access for tests that need to perturb data; validation is not rerun.
    #[doc(hidden)]
    pub fn tests_mut(&mut self) -> &mut [TestRecord] {
        &mut self.tests
    }

    /// Writes the history as JSON lines.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for t in &self.tests {
            let (description, vector) = match &t.description {
                Description::Text(s) => (Some(s.clone()), None),
                Description::Vector(v) => (None, Some(v.clone())),
            };
            let sessions = self
                .session_ids
                .iter()
                .zip(t.outcomes.iter().zip(&t.durations))
                .map(|(id, (o, d))| RawSession {
                    id: id.clone(),
                    outcome: o.code().to_string(),
                    duration_s: *d,
                    message: None,
                })
                .collect();
            let raw = RawTest {
                test_id: t.test_id.clone(),
                description,
                vector,
                sessions,
            };
            serde_json::to_writer(&mut out, &raw)?;
            out.write_all(b"\n").map_err(|source| Error::Io {
                path: "<output>".into(),
                source,
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Failure messages matching this pattern are relabelled as Timeout.
    pub timeout_pattern: Regex,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            timeout_pattern: Regex::new("(?i)time[sd]? ?out").expect("static regex"),
        }
    }
}

impl IngestOptions {
    fn classify(&self, code: &str, message: Option<&str>, line: usize) -> Result<Outcome> {
        let outcome = Outcome::from_code(code)
            .ok_or_else(|| Error::parse(line, format!("unknown outcome {code:?}")))?;
        if outcome == Outcome::Failed && message.is_some_and(|m| self.timeout_pattern.is_match(m))
        {
            return Ok(Outcome::Timeout);
        }
        Ok(outcome)
    }
}

pub fn ingest(path: impl AsRef<Path>, format: Format) -> Result<SessionHistory> {
    ingest_with(path, format, &IngestOptions::default())
}

pub fn ingest_with(
    path: impl AsRef<Path>,
    format: Format,
    options: &IngestOptions,
) -> Result<SessionHistory> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        Format::Jsonl => parse_jsonl(BufReader::new(file), options),
        Format::Csv => parse_csv(file, options),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSession {
    id: String,
    outcome: String,
    duration_s: f64,
    #[serde(default)]
    message: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawTest {
    test_id: String,
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    vector: Option<Vec<f64>>,
    sessions: Vec<RawSession>,
}

pub fn parse_jsonl<R: BufRead>(reader: R, options: &IngestOptions) -> Result<SessionHistory> {
    let mut tests = Vec::new();
    let mut session_ids: Option<Vec<String>> = None;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawTest =
            serde_json::from_str(&line).map_err(|e| Error::parse(line_no, e.to_string()))?;
        let description = match (raw.description, raw.vector) {
            (Some(text), None) => Description::Text(text),
            (None, Some(v)) => Description::Vector(v),
            _ => {
                return Err(Error::parse(
                    line_no,
                    "exactly one of description/vector must be present",
                ))
            }
        };
        let ids: Vec<String> = raw.sessions.iter().map(|s| s.id.clone()).collect();
        match &session_ids {
            None => session_ids = Some(ids),
            Some(expected) if expected.len() != ids.len() => {
                return Err(Error::SessionCount {
                    test_id: raw.test_id,
                    expected: expected.len(),
                    found: ids.len(),
                })
            }
            Some(expected) if *expected != ids => {
                return Err(Error::parse(line_no, "session ids differ from first record"))
            }
            Some(_) => {}
        }
        let mut outcomes = Vec::with_capacity(raw.sessions.len());
        let mut durations = Vec::with_capacity(raw.sessions.len());
        for s in &raw.sessions {
            outcomes.push(options.classify(&s.outcome, s.message.as_deref(), line_no)?);
            durations.push(s.duration_s);
        }
        tests.push(TestRecord::new(raw.test_id, description, outcomes, durations));
    }
    let session_ids = session_ids.ok_or(Error::Empty)?;
    SessionHistory::new(session_ids, tests)
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    test_id: String,
    session_id: String,
    outcome: String,
    duration_s: f64,
    #[serde(default)]
    message: Option<String>,
    #[serde(default)]
    description: Option<String>,
}

pub fn parse_csv<R: Read>(reader: R, options: &IngestOptions) -> Result<SessionHistory> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut session_index: HashMap<String, usize> = HashMap::new();
    let mut session_ids = Vec::new();
    let mut test_index: HashMap<String, usize> = HashMap::new();
    // per test: description, per-session (outcome, duration)
    let mut rows: Vec<(String, Option<String>, Vec<Option<(Outcome, f64)>>)> = Vec::new();

    for rec in rdr.deserialize::<CsvRow>() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(line, e.to_string())
        })?;
        let line = rows.iter().map(|r| r.2.len()).sum::<usize>() + 2;
        let outcome = options.classify(
            &rec.outcome,
            rec.message.as_deref().filter(|m| !m.is_empty()),
            line,
        )?;
        let s = *session_index.entry(rec.session_id.clone()).or_insert_with(|| {
            session_ids.push(rec.session_id.clone());
            session_ids.len() - 1
        });
        let t = *test_index.entry(rec.test_id.clone()).or_insert_with(|| {
            rows.push((rec.test_id.clone(), None, Vec::new()));
            rows.len() - 1
        });
        let entry = &mut rows[t];
        if entry.1.is_none() {
            entry.1 = rec.description.filter(|d| !d.is_empty());
        }
        if entry.2.len() <= s {
            entry.2.resize(s + 1, None);
        }
        if entry.2[s].replace((outcome, rec.duration_s)).is_some() {
            return Err(Error::parse(
                line,
                format!(
                    "duplicate row for test {:?} session {:?}",
                    rec.test_id, rec.session_id
                ),
            ));
        }
    }
    if rows.is_empty() {
        return Err(Error::Empty);
    }
    let expected = session_ids.len();
    let mut tests = Vec::with_capacity(rows.len());
    for (test_id, description, cells) in rows {
        let found = cells.iter().filter(|c| c.is_some()).count();
        if found != expected {
            return Err(Error::SessionCount {
                test_id,
                expected,
                found,
            });
        }
        let (outcomes, durations) = cells.into_iter().map(|c| c.expect("counted")).unzip();
        tests.push(TestRecord::new(
            test_id,
            Description::Text(description.unwrap_or_default()),
            outcomes,
            durations,
        ));
    }
    SessionHistory::new(session_ids, tests)
}

/// The four-test, four-session example history used throughout the docs and tests.
///
/// Durations are constant per test with t1 < t2 < t3 < t4.
pub fn toy_history() -> SessionHistory {
    use Outcome::{Failed as F, Passed as P, Skipped as S};
    let rows = [
        ("t1", "Test Check Box in  page A", [P, F, S, F]),
        ("t2", "Test Radio Button in  page A", [F, F, P, F]),
        ("t3", "Test Check Box in  page B", [P, P, F, P]),
        ("t4", "Test Radio Button in  page B", [F, P, F, F]),
    ];
    let tests = rows
        .iter()
        .enumerate()
        .map(|(i, (id, desc, outcomes))| {
            TestRecord::new(
                *id,
                Description::Text((*desc).to_string()),
                outcomes.to_vec(),
                vec![(i + 1) as f64; 4],
            )
        })
        .collect();
    SessionHistory::new((1..=4).map(|s| format!("run{s}")).collect(), tests)
        .expect("toy history is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<SessionHistory> {
        parse_jsonl(Cursor::new(text), &IngestOptions::default())
    }

    #[test]
    fn toy_round_trip() {
        let h = toy_history();
        let mut buf = Vec::new();
        h.write_jsonl(&mut buf).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, h);
        assert_eq!(back.session_count(), 4);
        use Outcome::*;
        assert_eq!(back.test(0).outcomes, vec![Passed, Failed, Skipped, Failed]);
    }

    #[test]
    fn empty_input_is_rejected() {
        let err = parse("").unwrap_err();
        assert_eq!(err.to_string(), "no records");
        let err = parse_csv(Cursor::new("test_id,session_id,outcome,duration_s,message,description\n"), &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Empty));
    }

    #[test]
    fn timeout_message_is_not_a_failure() {
        let h = parse(
            r#"{"test_id":"a","description":"x","sessions":[{"id":"1","outcome":"F","duration_s":3.0,"message":"Step time out after 30s"},{"id":"2","outcome":"F","duration_s":3.0,"message":"assertion"}]}"#,
        )
        .unwrap();
        assert_eq!(h.test(0).outcomes, vec![Outcome::Timeout, Outcome::Failed]);
        assert!(!h.test(0).outcomes[0].is_failed());
        assert!(h.failures(0).is_empty());
        assert_eq!(h.failures(1), vec![0]);
    }

    #[test]
    fn custom_timeout_pattern() {
        let opts = IngestOptions {
            timeout_pattern: Regex::new("deadline").unwrap(),
        };
        let h = parse_jsonl(
            Cursor::new(r#"{"test_id":"a","description":"x","sessions":[{"id":"1","outcome":"F","duration_s":1,"message":"time out"},{"id":"2","outcome":"F","duration_s":1,"message":"deadline exceeded"}]}"#),
            &opts,
        )
        .unwrap();
        assert_eq!(h.test(0).outcomes, vec![Outcome::Failed, Outcome::Timeout]);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let text = "{\"test_id\":\"a\",\"description\":\"x\",\"sessions\":[{\"id\":\"1\",\"outcome\":\"P\",\"duration_s\":1}]}\n{not json";
        match parse(text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
        let bad_outcome = "{\"test_id\":\"a\",\"description\":\"x\",\"sessions\":[{\"id\":\"1\",\"outcome\":\"Q\",\"duration_s\":1}]}";
        assert!(matches!(parse(bad_outcome), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn inconsistent_session_counts() {
        let text = "{\"test_id\":\"a\",\"description\":\"x\",\"sessions\":[{\"id\":\"1\",\"outcome\":\"P\",\"duration_s\":1}]}\n\
                    {\"test_id\":\"b\",\"description\":\"x\",\"sessions\":[{\"id\":\"1\",\"outcome\":\"P\",\"duration_s\":1},{\"id\":\"2\",\"outcome\":\"P\",\"duration_s\":1}]}";
        assert!(matches!(parse(text), Err(Error::SessionCount { found: 2, expected: 1, .. })));
    }

    #[test]
    fn duplicate_test_id() {
        let line = "{\"test_id\":\"a\",\"description\":\"x\",\"sessions\":[{\"id\":\"1\",\"outcome\":\"P\",\"duration_s\":1}]}";
        let err = parse(&format!("{line}\n{line}")).unwrap_err();
        assert!(matches!(err, Error::DuplicateTest(ref id) if id == "a"));
    }

    #[test]
    fn description_xor_vector() {
        let both = "{\"test_id\":\"a\",\"description\":\"x\",\"vector\":[1.0],\"sessions\":[{\"id\":\"1\",\"outcome\":\"P\",\"duration_s\":1}]}";
        assert!(matches!(parse(both), Err(Error::Parse { .. })));
        let neither = "{\"test_id\":\"a\",\"sessions\":[{\"id\":\"1\",\"outcome\":\"P\",\"duration_s\":1}]}";
        assert!(matches!(parse(neither), Err(Error::Parse { .. })));
        let vector = "{\"test_id\":\"a\",\"vector\":[0.0, 2.0],\"sessions\":[{\"id\":\"1\",\"outcome\":\"P\",\"duration_s\":1}]}";
        assert_eq!(parse(vector).unwrap().test(0).description, Description::Vector(vec![0.0, 2.0]));
    }

    #[test]
    fn negative_duration_is_invalid() {
        let text = "{\"test_id\":\"a\",\"description\":\"x\",\"sessions\":[{\"id\":\"1\",\"outcome\":\"P\",\"duration_s\":-1}]}";
        assert!(matches!(parse(text), Err(Error::Invalid(_))));
    }

    #[test]
    fn csv_long_form() {
        let text = "test_id,session_id,outcome,duration_s,message,description\n\
                    t1,r1,P,1.0,,Check Box\n\
                    t1,r2,F,1.5,time out,Check Box\n\
                    t2,r1,F,2.0,boom,Radio\n\
                    t2,r2,S,0,,Radio\n";
        let h = parse_csv(Cursor::new(text), &IngestOptions::default()).unwrap();
        assert_eq!(h.session_ids(), &["r1".to_string(), "r2".to_string()]);
        assert_eq!(h.test(0).outcomes, vec![Outcome::Passed, Outcome::Timeout]);
        assert_eq!(h.test(1).outcomes, vec![Outcome::Failed, Outcome::Skipped]);
        assert_eq!(h.test(1).description, Description::Text("Radio".into()));
        assert_eq!(h.test(0).durations, vec![1.0, 1.5]);
    }

    #[test]
    fn csv_missing_cell() {
        let text = "test_id,session_id,outcome,duration_s,message,description\n\
                    t1,r1,P,1.0,,a\n\
                    t1,r2,P,1.0,,a\n\
                    t2,r1,P,1.0,,b\n";
        let err = parse_csv(Cursor::new(text), &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SessionCount { found: 1, expected: 2, .. }));
    }
}

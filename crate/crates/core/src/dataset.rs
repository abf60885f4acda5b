//! Observation types and their CSV loaders.
//!
//! Three row-per-observation formats are accepted (UTF-8, `.` decimal
//! separator, `#` comment lines ignored, header row optional):
//!
//! | format      | header              | rows                                         |
//! |-------------|---------------------|----------------------------------------------|
//! | reliability | `kind,time`         | `failure,<t>`, `survival,<t>`, one optional `prior_guess,<t>` |
//! | binary      | `outcome,predictor` | `success,<x>` or `failure,<x>`               |
//! | count       | `count[,predictor]` | `<n>` or `<n>,<x>`                           |
//!
//! Loaders are all-or-nothing: the first bad row aborts with its line number.
//! Times are dimensionless; keeping them in consistent units is up to the caller.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Failure times, times without failure, and an optional prior life-time guess.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityData {
    pub failures: Vec<f64>,
    pub survivals: Vec<f64>,
    pub prior_guess: Option<f64>,
}

/// Predictor values of observed successes and failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryOutcomeData {
    pub success_predictors: Vec<f64>,
    pub failure_predictors: Vec<f64>,
}

/// Event counts, optionally with one predictor per count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountData {
    pub counts: Vec<u64>,
    pub predictors: Option<Vec<f64>>,
    /// Length of the observation window each count refers to.
    pub window_tau: f64,
    /// Total observation time, required by the plain Poisson model.
    pub total_time: Option<f64>,
    pub prior_guess: Option<f64>,
}

/// What a probability of interest is evaluated for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryTarget {
    /// Mission time / counting window.
    pub tau: f64,
    /// Event count.
    pub m: u64,
    /// Predictor value, for regression models.
    pub z: Option<f64>,
}

fn positive_time(value: f64, what: &str, line: u64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Validation {
            line,
            message: format!("{what} must be positive and finite, got {value}"),
        })
    }
}

impl ReliabilityData {
    pub fn new(failures: Vec<f64>, survivals: Vec<f64>, prior_guess: Option<f64>) -> Result<Self> {
        for &x in failures.iter().chain(survivals.iter()) {
            positive_time(x, "time", 0)?;
        }
        if let Some(t) = prior_guess {
            positive_time(t, "prior guess", 0)?;
        }
        if failures.is_empty() && survivals.is_empty() {
            return Err(Error::NoObservations);
        }
        Ok(Self { failures, survivals, prior_guess })
    }

    /// Number of observed failures.
    pub fn r(&self) -> usize {
        self.failures.len()
    }

    /// Number of units.
    pub fn n(&self) -> usize {
        self.failures.len() + self.survivals.len()
    }

    /// Sum of all failure and survival times.
    pub fn exposure(&self) -> f64 {
        self.failures.iter().sum::<f64>() + self.survivals.iter().sum::<f64>()
    }

    /// Total power-transformed time without failure:
    /// `t^k + Σ x_i^k + Σ y_j^k` (the prior guess term only when present).
    pub fn power_exposure(&self, k: f64) -> f64 {
        let t = self.prior_guess.map_or(0.0, |t| t.powf(k));
        t + self.failures.iter().map(|x| x.powf(k)).sum::<f64>()
            + self.survivals.iter().map(|y| y.powf(k)).sum::<f64>()
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut failures = Vec::new();
        let mut survivals = Vec::new();
        let mut prior_guess = None;
        for (line, record) in records(reader, "kind")? {
            expect_fields(&record, 2, line)?;
            let time = parse_f64(&record[1], line)?;
            match record[0].to_ascii_lowercase().as_str() {
                "failure" => failures.push(positive_time(time, "failure time", line)?),
                "survival" => survivals.push(positive_time(time, "survival time", line)?),
                "prior_guess" => {
                    if prior_guess.is_some() {
                        return Err(Error::Validation {
                            line,
                            message: "more than one prior_guess row".into(),
                        });
                    }
                    prior_guess = Some(positive_time(time, "prior guess", line)?);
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown kind '{other}', expected failure|survival|prior_guess"),
                    })
                }
            }
        }
        if failures.is_empty() && survivals.is_empty() {
            return Err(Error::NoObservations);
        }
        Ok(Self { failures, survivals, prior_guess })
    }

    /// Serializes back to the reliability CSV format. Failures come first, then
    /// survivals, then the prior guess.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,time\n");
        for x in &self.failures {
            let _ = writeln!(out, "failure,{x:?}");
        }
        for y in &self.survivals {
            let _ = writeln!(out, "survival,{y:?}");
        }
        if let Some(t) = self.prior_guess {
            let _ = writeln!(out, "prior_guess,{t:?}");
        }
        out
    }
}

impl BinaryOutcomeData {
    pub fn new(success_predictors: Vec<f64>, failure_predictors: Vec<f64>) -> Result<Self> {
        if success_predictors.is_empty() && failure_predictors.is_empty() {
            return Err(Error::NoObservations);
        }
        if let Some(bad) = success_predictors.iter().chain(&failure_predictors).find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite predictor {bad}")));
        }
        Ok(Self { success_predictors, failure_predictors })
    }

    pub fn r(&self) -> usize {
        self.success_predictors.len()
    }

    pub fn n(&self) -> usize {
        self.success_predictors.len() + self.failure_predictors.len()
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut success = Vec::new();
        let mut failure = Vec::new();
        for (line, record) in records(reader, "outcome")? {
            expect_fields(&record, 2, line)?;
            let x = parse_f64(&record[1], line)?;
            if !x.is_finite() {
                return Err(Error::Validation { line, message: format!("predictor must be finite, got {x}") });
            }
            match record[0].to_ascii_lowercase().as_str() {
                "success" => success.push(x),
                "failure" => failure.push(x),
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown outcome '{other}', expected success|failure"),
                    })
                }
            }
        }
        Self::new(success, failure)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("outcome,predictor\n");
        for x in &self.success_predictors {
            let _ = writeln!(out, "success,{x:?}");
        }
        for y in &self.failure_predictors {
            let _ = writeln!(out, "failure,{y:?}");
        }
        out
    }
}

impl CountData {
    pub fn new(
        counts: Vec<u64>,
        predictors: Option<Vec<f64>>,
        window_tau: f64,
        total_time: Option<f64>,
        prior_guess: Option<f64>,
    ) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::NoObservations);
        }
        if let Some(p) = &predictors {
            if p.len() != counts.len() {
                return Err(Error::InvalidInput(format!(
                    "{} predictors for {} counts",
                    p.len(),
                    counts.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("non-finite predictor".into()));
            }
        }
        positive_time(window_tau, "window tau", 0).map_err(as_invalid)?;
        if let Some(t) = total_time {
            positive_time(t, "total time", 0).map_err(as_invalid)?;
        }
        if let Some(t) = prior_guess {
            positive_time(t, "prior guess", 0).map_err(as_invalid)?;
        }
        Ok(Self { counts, predictors, window_tau, total_time, prior_guess })
    }

    /// Total number of events.
    pub fn total_events(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn from_reader<R: Read>(reader: R, window_tau: f64, total_time: Option<f64>) -> Result<Self> {
        let mut counts = Vec::new();
        let mut predictors = Vec::new();
        let mut with_predictor: Option<bool> = None;
        for (line, record) in records(reader, "count")? {
            let has = match record.len() {
                1 => false,
                2 => true,
                n => {
                    return Err(Error::Parse { line, message: format!("expected 1 or 2 fields, got {n}") })
                }
            };
            match with_predictor {
                None => with_predictor = Some(has),
                Some(prev) if prev != has => {
                    return Err(Error::Parse {
                        line,
                        message: "predictor column present on some rows only".into(),
                    })
                }
                _ => {}
            }
            let raw = record[0].replace('\u{2212}', "-");
            let count: i64 = raw.parse().map_err(|_| Error::Parse {
                line,
                message: format!("'{}' is not an integer count", &record[0]),
            })?;
            if count < 0 {
                return Err(Error::Validation { line, message: format!("negative count {count}") });
            }
            counts.push(count as u64);
            if has {
                let x = parse_f64(&record[1], line)?;
                if !x.is_finite() {
                    return Err(Error::Validation { line, message: "predictor must be finite".into() });
                }
                predictors.push(x);
            }
        }
        let predictors = with_predictor.unwrap_or(false).then_some(predictors);
        Self::new(counts, predictors, window_tau, total_time, None)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match &self.predictors {
            Some(p) => {
                out.push_str("count,predictor\n");
                for (c, x) in self.counts.iter().zip(p) {
                    let _ = writeln!(out, "{c},{x:?}");
                }
            }
            None => {
                out.push_str("count\n");
                for c in &self.counts {
                    let _ = writeln!(out, "{c}");
                }
            }
        }
        out
    }
}

fn as_invalid(e: Error) -> Error {
    match e {
        Error::Validation { message, .. } => Error::InvalidInput(message),
        other => other,
    }
}

pub fn load_reliability_csv(path: impl AsRef<Path>) -> Result<ReliabilityData> {
    ReliabilityData::from_reader(std::fs::File::open(path)?)
}

pub fn load_binary_csv(path: impl AsRef<Path>) -> Result<BinaryOutcomeData> {
    BinaryOutcomeData::from_reader(std::fs::File::open(path)?)
}

pub fn load_count_csv(path: impl AsRef<Path>, tau: f64, total_time: Option<f64>) -> Result<CountData> {
    CountData::from_reader(std::fs::File::open(path)?, tau, total_time)
}

/// Reads all records with their 1-based line numbers, dropping a leading
/// header row whose first field equals `header`.
fn records<R: Read>(reader: R, header: &str) -> Result<Vec<(u64, StringRecord)>> {
    let mut rdr = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && rec[0].eq_ignore_ascii_case(header) {
            continue;
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn expect_fields(rec: &StringRecord, n: usize, line: u64) -> Result<()> {
    if rec.len() == n {
        Ok(())
    } else {
        Err(Error::Parse { line, message: format!("expected {n} fields, got {}", rec.len()) })
    }
}

fn parse_f64(field: &str, line: u64) -> Result<f64> {
    field
        .replace('\u{2212}', "-")
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("'{field}' is not a number") })
}

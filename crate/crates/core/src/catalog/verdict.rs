//! Per-rule verdicts and the evidence behind them.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    MinorNonConformity,
    Violation,
    NotApplicable,
    Inconclusive,
}

impl Outcome {
    pub const ALL: [Outcome; 5] = [
        Outcome::Pass,
        Outcome::MinorNonConformity,
        Outcome::Violation,
        Outcome::NotApplicable,
        Outcome::Inconclusive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::MinorNonConformity => "minor_non_conformity",
            Outcome::Violation => "violation",
            Outcome::NotApplicable => "not_applicable",
            Outcome::Inconclusive => "inconclusive",
        }
    }

    /// Ordering used when folding several checks into one verdict.
    pub(crate) fn rank(self) -> u8 {
        match self {
            Outcome::NotApplicable => 0,
            Outcome::Pass => 1,
            Outcome::MinorNonConformity => 2,
            Outcome::Inconclusive => 3,
            Outcome::Violation => 4,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One measured quantity compared against its threshold over an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub start: f64,
    pub end: f64,
    pub measure: String,
    pub value: f64,
    pub threshold: f64,
}

impl Evidence {
    pub fn new(interval: (f64, f64), measure: impl Into<String>, value: f64, threshold: f64) -> Self {
        Evidence { start: interval.0, end: interval.1, measure: measure.into(), value, threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub rule: String,
    pub outcome: Outcome,
    #[serde(default)]
    pub evidence: Vec<Evidence>,
    pub message: String,
}

impl Verdict {
    pub fn new(rule: &str, outcome: Outcome, message: impl Into<String>) -> Self {
        Verdict { rule: rule.to_string(), outcome, evidence: Vec::new(), message: message.into() }
    }

    pub fn not_applicable(rule: &str, reason: impl Into<String>) -> Self {
        Verdict::new(rule, Outcome::NotApplicable, reason)
    }

    pub fn with_evidence(mut self, e: Evidence) -> Self {
        self.evidence.push(e);
        self
    }

    /// Violations and minors must point at something measured.
    pub fn is_well_formed(&self) -> bool {
        match self.outcome {
            Outcome::Violation | Outcome::MinorNonConformity => !self.evidence.is_empty(),
            Outcome::NotApplicable => !self.message.is_empty(),
            _ => true,
        }
    }
}

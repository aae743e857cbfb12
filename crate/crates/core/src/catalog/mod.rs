//! Rule registry, thresholds and verdict types.

pub mod registry;
pub mod thresholds;
pub mod verdict;

pub use registry::{evaluable_rules, registry, rule_lookup, Category, Evaluability, Rule, Severity, SourceRef, RULES};
pub use thresholds::{ConfigError, ConfigErrors, Origin, Permissive, ThresholdConfig, ThresholdSpec, ThresholdValue, THRESHOLD_SPECS};
pub use verdict::{Evidence, Outcome, Verdict};

//! Resample, detect maneuvers, gate and evaluate every selected rule.

mod context;
mod rules;
mod zebra;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{evaluable_rules, Category, Origin, Outcome, Rule, ThresholdConfig, Verdict};
use crate::metrics::{detect_maneuvers, ManeuverEvent, Tracks};
use crate::scenario::Scenario;

pub use context::EPS;
pub use zebra::{stop_required, VruObservation};

use context::Ctx;

/// How rules (and batch scenarios) are scheduled. Results are identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Inclusion list of rule ids or category names. The default selects every evaluable rule.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleFilter {
    items: Option<Vec<String>>,
}

impl RuleFilter {
    pub fn all() -> Self {
        RuleFilter { items: None }
    }

    pub fn only<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        RuleFilter { items: Some(items.into_iter().map(Into::into).collect()) }
    }

    /// Comma-separated list, e.g. `REC-08,infrastructure`.
    pub fn parse(list: &str) -> Self {
        RuleFilter::only(list.split(',').map(str::trim).filter(|s| !s.is_empty()))
    }

    /// An id also selects its lettered parts (`REC-03` selects `REC-03a` and `REC-03b`).
    pub fn selects(&self, rule: &Rule) -> bool {
        let Some(items) = &self.items else { return true };
        items.iter().any(|it| {
            if Category::parse(it) == Some(rule.category) {
                return true;
            }
            let id = rule.id;
            id.eq_ignore_ascii_case(it)
                || (id.len() == it.len() + 1
                    && id[..it.len()].eq_ignore_ascii_case(it)
                    && id.as_bytes()[it.len()].is_ascii_lowercase())
        })
    }

    pub fn rules(&self) -> Vec<&'static Rule> {
        let mut v: Vec<&'static Rule> = evaluable_rules().filter(|r| self.selects(r)).collect();
        v.sort_by(|a, b| a.id.cmp(b.id));
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    /// Hash of the resolved thresholds.
    pub fingerprint: String,
    /// Thresholds that differ from their defaults, with where they came from.
    #[serde(default)]
    pub overrides: BTreeMap<String, String>,
    /// One per selected evaluable rule, ordered by rule id.
    pub verdicts: Vec<Verdict>,
    pub counts: BTreeMap<String, usize>,
    pub events: Vec<ManeuverEvent>,
}

impl Report {
    pub fn count(&self, o: Outcome) -> usize {
        self.counts.get(o.as_str()).copied().unwrap_or(0)
    }

    pub fn verdict(&self, rule: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.rule == rule)
    }

    pub fn with_outcome(&self, o: Outcome) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(move |v| v.outcome == o)
    }

    /// Counts agree with the verdict list and the list is ordered by id.
    pub fn is_consistent(&self) -> bool {
        let ordered = self.verdicts.windows(2).all(|w| w[0].rule < w[1].rule);
        ordered && Outcome::ALL.iter().all(|&o| self.count(o) == self.with_outcome(o).count())
    }
}

fn counts(verdicts: &[Verdict]) -> BTreeMap<String, usize> {
    Outcome::ALL
        .iter()
        .map(|&o| (o.as_str().to_string(), verdicts.iter().filter(|v| v.outcome == o).count()))
        .collect()
}

fn overrides(cfg: &ThresholdConfig) -> BTreeMap<String, String> {
    cfg.entries()
        .filter(|(_, _, origin)| *origin != Origin::Default)
        .map(|(spec, v, origin)| (spec.key.to_string(), format!("{v} ({origin})")))
        .collect()
}

#[cfg(feature = "parallel")]
fn map_ordered<T: Sync, R: Send>(items: &[T], exec: Execution, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    match exec {
        Execution::Parallel => items.par_iter().map(f).collect(),
        Execution::Sequential => items.iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn map_ordered<T: Sync, R: Send>(items: &[T], _exec: Execution, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

fn evaluate_rule(ctx: &Ctx, rule: &Rule) -> Verdict {
    match rules::evaluator(rule.id) {
        Some(eval) => eval(ctx),
        None => Verdict::new(rule.id, Outcome::Inconclusive, "no evaluator for this rule"),
    }
}

/// Evaluates with the default execution mode.
pub fn evaluate(scenario: &Scenario, cfg: &ThresholdConfig, filter: &RuleFilter) -> Report {
    evaluate_with(scenario, cfg, filter, Execution::default())
}

pub fn evaluate_with(scenario: &Scenario, cfg: &ThresholdConfig, filter: &RuleFilter, exec: Execution) -> Report {
    let selected = filter.rules();
    let (verdicts, events) = match Tracks::build(scenario, cfg) {
        Ok(tr) => {
            let events = detect_maneuvers(&tr, cfg);
            let ctx = Ctx { tr: &tr, events: &events, cfg };
            let verdicts = map_ordered(&selected, exec, |r| evaluate_rule(&ctx, r));
            (verdicts, events)
        }
        Err(e) => {
            let msg = format!("trace could not be resampled: {e}");
            (selected.iter().map(|r| Verdict::new(r.id, Outcome::Inconclusive, msg.clone())).collect(), Vec::new())
        }
    };
    Report {
        scenario: scenario.metadata.name.clone(),
        fingerprint: cfg.fingerprint(),
        overrides: overrides(cfg),
        counts: counts(&verdicts),
        verdicts,
        events,
    }
}

/// Scenarios are evaluated independently; output order follows input order.
pub fn evaluate_batch(scenarios: &[Scenario], cfg: &ThresholdConfig, filter: &RuleFilter, exec: Execution) -> Vec<Report> {
    map_ordered(scenarios, exec, |s| evaluate_with(s, cfg, filter, Execution::Sequential))
}

/// Whether a rule's trigger is present, and why not when it is absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applicability {
    pub applicable: bool,
    pub reason: String,
}

/// Gating for one rule against a resampled scenario and its detected events.
pub fn applicable(rule: &Rule, tracks: &Tracks<'_>, events: &[ManeuverEvent], cfg: &ThresholdConfig) -> Applicability {
    let ctx = Ctx { tr: tracks, events, cfg };
    let v = evaluate_rule(&ctx, rule);
    match v.outcome {
        Outcome::NotApplicable => Applicability { applicable: false, reason: v.message },
        _ => Applicability { applicable: true, reason: format!("{} triggered", rule.id) },
    }
}

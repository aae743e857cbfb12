//! Human and machine renderings of a [`Report`].

use std::fmt::Write as _;

use crate::catalog::{rule_lookup, Category, Outcome, Verdict};
use crate::engine::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    /// Pretty-printed JSON mirroring [`Report`].
    Machine,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" => Some(ReportFormat::Text),
            "machine" | "json" => Some(ReportFormat::Machine),
            _ => None,
        }
    }
}

pub fn render_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Machine => report_to_json(report),
    }
}

/// Several reports as one document: text blocks separated by a blank line, or a JSON array.
pub fn render_reports(reports: &[Report], format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => reports.iter().map(render_text).collect::<Vec<_>>().join("\n"),
        ReportFormat::Machine => {
            let mut s = serde_json::to_string_pretty(reports).expect("report is serializable");
            s.push('\n');
            s
        }
    }
}

pub fn report_to_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report is serializable");
    s.push('\n');
    s
}

pub fn report_from_json(text: &str) -> Result<Report, serde_json::Error> {
    serde_json::from_str(text)
}

/// One-line tally, e.g. `1 violation, 20 pass, 0 minor, 0 inconclusive, 15 not applicable`.
pub fn summary_line(report: &Report) -> String {
    if report.verdicts.is_empty() {
        return "0 rules evaluated".to_string();
    }
    let v = report.count(Outcome::Violation);
    format!(
        "{v} violation{}, {} pass, {} minor, {} inconclusive, {} not applicable",
        if v == 1 { "" } else { "s" },
        report.count(Outcome::Pass),
        report.count(Outcome::MinorNonConformity),
        report.count(Outcome::Inconclusive),
        report.count(Outcome::NotApplicable),
    )
}

fn label(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "PASS",
        Outcome::MinorNonConformity => "MINOR",
        Outcome::Violation => "VIOLATION",
        Outcome::NotApplicable => "N/A",
        Outcome::Inconclusive => "INCONCLUSIVE",
    }
}

fn category_of(v: &Verdict) -> Option<Category> {
    rule_lookup(&v.rule).map(|r| r.category)
}

fn num(x: f64) -> String {
    format!("{x:.2}")
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Scenario: {}", report.scenario);
    let _ = writeln!(out, "Thresholds: {}", report.fingerprint);
    for (key, value) in &report.overrides {
        let _ = writeln!(out, "  override {key} = {value}");
    }
    let categories = [Some(Category::General), Some(Category::Infrastructure), Some(Category::Maneuver), None];
    for cat in categories {
        let group: Vec<&Verdict> = report.verdicts.iter().filter(|v| category_of(v) == cat).collect();
        if group.is_empty() {
            continue;
        }
        let _ = writeln!(out, "\n[{}]", cat.map_or("unregistered", Category::as_str));
        for v in group {
            write_verdict(&mut out, v);
        }
    }
    if !report.events.is_empty() {
        let _ = writeln!(out, "\nEvents:");
        for e in &report.events {
            let _ = write!(out, "  {:>7.1} - {:>7.1} s  {}", e.start, e.end, e.kind);
            for (k, v) in &e.tags {
                let _ = write!(out, " {k}={v}");
            }
            if !e.actors.is_empty() {
                let _ = write!(out, " actors={}", e.actors.join(","));
            }
            out.push('\n');
        }
    }
    let _ = writeln!(out, "\nSummary: {}", summary_line(report));
    out
}

fn write_verdict(out: &mut String, v: &Verdict) {
    let rule = rule_lookup(&v.rule);
    let title = rule.map_or("", |r| r.title);
    let _ = writeln!(out, "  {:<13}{:<16}{title}", label(v.outcome), v.rule);
    if v.outcome == Outcome::NotApplicable {
        let _ = writeln!(out, "{:29}{}", "", v.message);
        return;
    }
    if let Some(r) = rule {
        for s in r.sources {
            let _ = writeln!(out, "{:29}{} {}: \"{}\"", "", s.document, s.clause, s.quote);
        }
    }
    if v.outcome != Outcome::Pass {
        let _ = writeln!(out, "{:29}{}", "", v.message);
        for e in &v.evidence {
            let _ = writeln!(
                out,
                "{:29}{} = {} (threshold {}) over {:.1}-{:.1} s",
                "",
                e.measure,
                num(e.value),
                num(e.threshold),
                e.start,
                e.end
            );
        }
    }
}

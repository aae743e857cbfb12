//! Scenario files, report rendering and the built-in examples.

mod scenario_file;

pub use scenario_file::{scenario_to_json, ActorFile, FeatureFile, GeometryFile, LaneFile, NetworkFile, ScenarioFile};
mod examples;

pub use examples::{builtin_example, UnknownExample, Variant, EXAMPLE_NAMES};
mod report;

pub use report::{render_report, render_reports, render_text, report_from_json, report_to_json, summary_line, ReportFormat};

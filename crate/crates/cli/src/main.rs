//! `avbc` command-line front end.
//!
//! Exit codes: 0 when no rule is violated, 1 when at least one is (or a
//! minor non-conformity under `--strict`), 2 for input and usage errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use avbc_core::catalog::{registry, Category, Outcome, ThresholdConfig};
use avbc_core::engine::{evaluate_batch, Execution, Report, RuleFilter};
use avbc_core::io::{builtin_example, render_reports, scenario_to_json, summary_line, ReportFormat, Variant, EXAMPLE_NAMES};
use avbc_core::metrics::braking_table;
use avbc_core::scenario::load_scenario;

const CONFIG_ENV: &str = "AVBC_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "avbc", version, about = "Check recorded AV trajectories against driving rules")]
struct Cli {
    /// Threshold override file (`key = value` lines). Takes precedence over $AVBC_CONFIG.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one or more scenario files.
    Check {
        #[arg(required = true, value_name = "SCENARIO")]
        scenarios: Vec<PathBuf>,
        /// Comma-separated rule ids or categories to evaluate.
        #[arg(long, value_name = "LIST")]
        rules: Option<String>,
        /// text or machine
        #[arg(long, default_value = "text", value_parser = parse_format)]
        format: ReportFormat,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Exit 1 on minor non-conformities too.
        #[arg(long)]
        strict: bool,
    },
    /// Print the rule registry with source quotes.
    Rules {
        /// general, infrastructure or maneuver
        #[arg(long, value_name = "CAT", value_parser = parse_category)]
        filter: Option<Category>,
    },
    /// Write a built-in example scenario.
    Example {
        #[arg(value_parser = parse_example)]
        name: String,
        #[arg(long, default_value = "compliant", value_parser = parse_variant)]
        variant: Variant,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Stopping and following distances by speed.
    BrakingTable {
        /// Reaction time in seconds (default: system_latency threshold).
        #[arg(long)]
        t: Option<f64>,
        /// Friction coefficient (default: friction_coefficient threshold).
        #[arg(long)]
        f: Option<f64>,
        /// Grade as a fraction (default: road_grade threshold).
        #[arg(long, allow_negative_numbers = true)]
        g: Option<f64>,
        /// Highest speed in km/h.
        #[arg(long, default_value_t = 90.0)]
        vmax: f64,
        /// Speed step in km/h.
        #[arg(long, default_value_t = 10.0)]
        step: f64,
    },
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    ReportFormat::parse(s).ok_or_else(|| format!("expected 'text' or 'machine', got '{s}'"))
}

fn parse_category(s: &str) -> Result<Category, String> {
    Category::parse(s).ok_or_else(|| format!("expected general, infrastructure or maneuver, got '{s}'"))
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| format!("expected 'compliant' or 'violating', got '{s}'"))
}

fn parse_example(s: &str) -> Result<String, String> {
    EXAMPLE_NAMES
        .contains(&s)
        .then(|| s.to_string())
        .ok_or_else(|| format!("unknown example '{s}' (expected one of: {})", EXAMPLE_NAMES.join(", ")))
}

/// Input or usage problem; always exit 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(UsageError(msg)) => {
            eprintln!("avbc: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8, UsageError> {
    match cli.command {
        Command::Check { scenarios, rules, format, out, strict } => {
            let cfg = resolve_config(cli.config.as_deref())?;
            check(scenarios, rules.as_deref(), format, out.as_deref(), strict, &cfg)
        }
        Command::Rules { filter } => {
            emit(None, &render_rules(filter))?;
            Ok(0)
        }
        Command::Example { name, variant, out } => {
            let scenario = builtin_example(&name, variant)?;
            emit(out.as_deref(), &scenario_to_json(&scenario))?;
            Ok(0)
        }
        Command::BrakingTable { t, f, g, vmax, step } => {
            let cfg = resolve_config(cli.config.as_deref())?;
            let t = t.unwrap_or(cfg.system_latency);
            let f = f.unwrap_or(cfg.friction_coefficient);
            let g = g.unwrap_or(cfg.road_grade);
            if !(step > 0.0 && step.is_finite() && vmax.is_finite() && t >= 0.0) {
                return Err(UsageError("--step must be positive and --t non-negative".into()));
            }
            let rows = braking_table(t, f, g, vmax, step, &cfg)?;
            let mut text = format!(
                "{:>10} {:>10} {:>14} {:>12} {:>12}\n",
                "speed_kmh", "aashto_m", "aashto_plus_m", "two_second_m", "car_length_m"
            );
            for r in rows {
                text.push_str(&format!(
                    "{:>10.1} {:>10.2} {:>14.2} {:>12.2} {:>12.2}\n",
                    r.speed_kmh, r.aashto_m, r.aashto_plus_margin_m, r.two_second_m, r.car_length_m
                ));
            }
            emit(None, &text)?;
            Ok(0)
        }
    }
}

fn resolve_config(flag: Option<&Path>) -> Result<ThresholdConfig, UsageError> {
    let env = std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    match flag.map(Path::to_path_buf).or(env) {
        Some(path) => ThresholdConfig::load_file(&path).map_err(|e| UsageError(format!("{}: {e}", path.display()))),
        None => Ok(ThresholdConfig::default()),
    }
}

fn check(
    mut paths: Vec<PathBuf>,
    rules: Option<&str>,
    format: ReportFormat,
    out: Option<&Path>,
    strict: bool,
    cfg: &ThresholdConfig,
) -> Result<u8, UsageError> {
    let filter = rules.map_or_else(RuleFilter::all, RuleFilter::parse);
    if filter.rules().is_empty() {
        return Err(UsageError(format!("0 rules evaluated: no rule matches '{}'", rules.unwrap_or(""))));
    }
    paths.sort();
    paths.dedup();
    let mut scenarios = Vec::with_capacity(paths.len());
    for p in &paths {
        let text = fs::read_to_string(p).map_err(|e| UsageError(format!("{}: {e}", p.display())))?;
        scenarios.push(load_scenario(&text).map_err(|e| UsageError(format!("{}: {e}", p.display())))?);
    }
    let reports = evaluate_batch(&scenarios, cfg, &filter, Execution::default());
    let body = if format == ReportFormat::Machine && reports.len() == 1 {
        avbc_core::io::report_to_json(&reports[0])
    } else {
        render_reports(&reports, format)
    };
    emit(out, &body)?;
    if out.is_some() || format == ReportFormat::Machine {
        for (p, r) in paths.iter().zip(&reports) {
            eprintln!("{}: {}", p.display(), summary_line(r));
        }
    }
    Ok(exit_code(&reports, strict))
}

fn exit_code(reports: &[Report], strict: bool) -> u8 {
    let failing = |r: &Report| r.count(Outcome::Violation) > 0 || (strict && r.count(Outcome::MinorNonConformity) > 0);
    u8::from(reports.iter().any(failing))
}

fn render_rules(filter: Option<Category>) -> String {
    let mut text = String::new();
    for rule in registry().iter().filter(|r| filter.map_or(true, |c| r.category == c)) {
        let status = if rule.is_evaluable() { "evaluable" } else { "catalog only" };
        text.push_str(&format!("{:<16}[{}] {}  ({status})\n", rule.id, rule.category, rule.title));
        for s in rule.sources {
            text.push_str(&format!("    {} {}: \"{}\"\n", s.document, s.clause, s.quote));
        }
        if !rule.parameters.is_empty() {
            text.push_str(&format!("    thresholds: {}\n", rule.parameters.join(", ")));
        }
    }
    text
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), UsageError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| UsageError(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

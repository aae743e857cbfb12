//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use avbc_core::catalog::{registry, Category, Evaluability, Outcome, ThresholdConfig, ThresholdValue};
use avbc_core::engine::{evaluate_with, Execution, RuleFilter};
use avbc_core::geometry::lateral_clearance;
use avbc_core::io::{builtin_example, report_to_json, Variant, EXAMPLE_NAMES};
use avbc_core::metrics::{aashto, braking_table, car_length_rule, ttc_conflict_point, ttc_longitudinal};
use avbc_core::road::RoadNetwork;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Independent evaluation of the stopping-distance formula.
fn stopping_distance(v: f64, t: f64, f: f64, g: f64) -> f64 {
    let reaction = 0.278 * t * v;
    let braking = (v * v) / (254.0 * (f + g));
    reaction + braking
}

fn c1_aashto() -> Result<String, String> {
    let s = aashto(50.0, 1.0, 0.7, 0.0).map_err(|e| e.to_string())?;
    ensure((s - 27.96).abs() <= 0.01, || format!("aashto(50, 1.0, 0.7, 0) = {s:.4}"))?;
    let cfg = ThresholdConfig::default();
    let rows = braking_table(1.0, 0.7, 0.0, 90.0, 10.0, &cfg).map_err(|e| e.to_string())?;
    ensure(rows.len() == 9, || format!("expected 9 rows for 10..90 km/h, got {}", rows.len()))?;
    let mut worst: f64 = 0.0;
    for (k, r) in rows.iter().enumerate() {
        let v = 10.0 * (k + 1) as f64;
        ensure(r.speed_kmh == v, || format!("row {k} speed {}", r.speed_kmh))?;
        worst = worst.max((r.aashto_m - stopping_distance(v, 1.0, 0.7, 0.0)).abs());
        worst = worst.max((r.aashto_plus_margin_m - stopping_distance(v, 1.0, 0.7, 0.0) - 2.0).abs());
    }
    ensure(worst < 0.01, || format!("table deviates by {worst:.4} m"))?;
    Ok(format!("aashto(50)={s:.2} m, 9 rows within {worst:.1e} m"))
}

fn c2_following_crossover() -> Result<String, String> {
    let cfg = ThresholdConfig::default();
    let l = cfg.car_length;
    ensure(l == 4.5, || format!("car length default {l}"))?;
    // Symbolic: both are linear through the origin, so compare slopes (m per km/h).
    let (two_sec_slope, car_slope) = (2.0 / 3.6, l / 16.0);
    ensure(two_sec_slope > car_slope, || format!("slopes {two_sec_slope} vs {car_slope}"))?;
    let rows = braking_table(1.0, 0.7, 0.0, 200.0, 1.0, &cfg).map_err(|e| e.to_string())?;
    for r in &rows {
        ensure(r.two_second_m > r.car_length_m, || format!("two-second not above car-length at {} km/h", r.speed_kmh))?;
    }
    let mut crossings = Vec::new();
    for t in [0.5, 1.0, 1.5] {
        for f in [0.3, 0.5, 0.7] {
            let curve = |v: f64| aashto(v, t, f, 0.0).unwrap() + cfg.follow_stop_margin;
            // Superlinear: positive second differences and s(2v) > 2 s(v) for the braking part.
            for k in 1..200 {
                let v = k as f64;
                let dd = curve(v + 1.0) - 2.0 * curve(v) + curve(v - 1.0);
                ensure(dd > 0.0, || format!("curve not convex at {v} km/h (t={t}, f={f})"))?;
                let b = |x: f64| aashto(x, t, f, 0.0).unwrap();
                ensure(b(2.0 * v) > 2.0 * b(v), || format!("doubling speed at {v} km/h"))?;
            }
            let diff = |v: f64| curve(v) - car_length_rule(v, cfg.car_length_per_16kmh, l);
            let grid: Vec<f64> = (0..=20_000).map(|k| k as f64 * 0.01).collect();
            let n = grid.windows(2).filter(|w| diff(w[0]).signum() != diff(w[1]).signum()).count();
            ensure(n == 1, || format!("t={t}, f={f}: {n} crossings with the car-length rule"))?;
            let at = grid.windows(2).find(|w| diff(w[0]).signum() != diff(w[1]).signum()).unwrap()[1];
            crossings.push(format!("{at:.1}"));
        }
    }
    Ok(format!(
        "two-second above car-length on 1..200 km/h; one crossing per setting at [{}] km/h",
        crossings.join(", ")
    ))
}

/// Threshold keys with the value the source states for them.
const STATED: &[(&str, ThresholdValue)] = &[
    ("zebra_lateral_stop", ThresholdValue::Scalar(4.0)),
    ("zebra_lateral_approach", ThresholdValue::Scalar(7.0)),
    ("zebra_intent_wait", ThresholdValue::Scalar(5.0)),
    ("parked_pass_speed", ThresholdValue::Scalar(30.0)),
    ("zebra_traverse_speed", ThresholdValue::Scalar(30.0)),
    ("ped_speed_split", ThresholdValue::Scalar(30.0)),
    ("adjacent_stationary_pass_speed", ThresholdValue::Scalar(30.0)),
    ("signal_lead", ThresholdValue::Scalar(3.0)),
    ("overtake_junction_lead", ThresholdValue::Scalar(3.0)),
    ("rear_gap_ttc", ThresholdValue::Scalar(9.0)),
    ("return_ttc", ThresholdValue::Scalar(2.0)),
    ("turn_completion_ttc", ThresholdValue::Scalar(2.0)),
    ("slip_entry_offset", ThresholdValue::Scalar(3.0)),
    ("straddle_max", ThresholdValue::Scalar(80.0)),
    ("overtake_dwell_max", ThresholdValue::Scalar(20.0)),
    ("stuck_alert", ThresholdValue::Scalar(10.0)),
    ("ped_clearance_ge30", ThresholdValue::Scalar(1.5)),
    ("moving_vehicle_gap", ThresholdValue::Scalar(1.5)),
    ("cyclist_gap", ThresholdValue::Scalar(1.5)),
    ("ped_clearance_lt30", ThresholdValue::Scalar(1.0)),
    ("parked_vehicle_gap", ThresholdValue::Scalar(1.0)),
    ("ped_clearance_exception", ThresholdValue::Scalar(0.5)),
    ("fixed_obstacle_gap", ThresholdValue::Scalar(0.5)),
    ("adjacent_pass_clearance", ThresholdValue::Scalar(0.5)),
    ("stop_line_window", ThresholdValue::Range(0.0, 1.5)),
    ("lat_accel_max", ThresholdValue::Scalar(3.0)),
    ("lat_jerk_max", ThresholdValue::Scalar(5.0)),
    ("jerk_window", ThresholdValue::Scalar(0.5)),
    ("speed_limit_default", ThresholdValue::Scalar(50.0)),
    ("slow_tsv_threshold", ThresholdValue::Scalar(25.0)),
    ("adjacent_speed_ratio", ThresholdValue::Scalar(1.2)),
    ("follow_stop_margin", ThresholdValue::Scalar(2.0)),
];

fn c3_threshold_fidelity() -> Result<String, String> {
    let cfg = ThresholdConfig::default();
    let stated: BTreeMap<&str, ThresholdValue> = STATED.iter().copied().collect();
    let mut checked = BTreeSet::new();
    for rule in registry() {
        for &key in rule.parameters {
            let actual = cfg.get(key).ok_or_else(|| format!("{} reads unknown key {key}", rule.id))?;
            if let Some(&want) = stated.get(key) {
                ensure(actual == want, || format!("{key} = {actual}, stated {want}"))?;
                checked.insert(key);
            }
        }
    }
    let unread: Vec<&str> = stated.keys().filter(|k| !checked.contains(*k)).copied().collect();
    ensure(unread.is_empty(), || format!("no rule reads {unread:?}"))?;
    Ok(format!("{} stated defaults verified through rule parameters", checked.len()))
}

fn c4_oracles() -> Result<String, String> {
    let mut rng = common::rng(0xacce_0004);
    let mut worst_follow: f64 = 0.0;
    let mut worst_conflict: f64 = 0.0;
    let mut worst_clear: f64 = 0.0;
    let mut hits = (0, 0);
    for i in 0..200 {
        let c = common::random_follow_case(&mut rng);
        let got = ttc_longitudinal(&c.lane, &c.rear, &c.front).map_err(|e| format!("case {i}: {e}"))?;
        let want = common::follow_oracle(&c, 120.0);
        match (got, want) {
            (Some(g), Some(w)) => {
                worst_follow = worst_follow.max((g - w).abs());
                hits.0 += 1;
            }
            (None, None) => {}
            (Some(g), None) if g > 120.0 - 0.01 => {}
            other => return Err(format!("longitudinal case {i}: {other:?}")),
        }
    }
    for i in 0..200 {
        let c = common::random_conflict_case(&mut rng);
        let got = ttc_conflict_point(&c.region, &c.path, c.s_front, c.speed);
        let want = common::conflict_oracle(&c);
        match (got, want) {
            (Some(g), Some(w)) => {
                worst_conflict = worst_conflict.max((g - w).abs());
                hits.1 += 1;
            }
            (None, None) => {}
            other => return Err(format!("conflict case {i}: {other:?}")),
        }
    }
    for _ in 0..200 {
        let (ego, other) = common::random_footprint_pair(&mut rng);
        worst_clear = worst_clear.max((lateral_clearance(&ego, &other) - common::clearance_oracle(&ego, &other)).abs());
    }
    ensure(worst_follow <= 0.010, || format!("longitudinal TTC off by {worst_follow:.4} s"))?;
    ensure(worst_conflict <= 0.010, || format!("conflict TTC off by {worst_conflict:.4} s"))?;
    ensure(worst_clear <= 0.02, || format!("clearance off by {worst_clear:.4} m"))?;
    ensure(hits.0 >= 50 && hits.1 >= 50, || format!("too few closing cases {hits:?}"))?;
    Ok(format!(
        "max error: longitudinal {worst_follow:.4} s ({} closing), conflict {worst_conflict:.4} s ({} hits), clearance {worst_clear:.4} m",
        hits.0, hits.1
    ))
}

/// Violations each built-in example is built to produce.
fn documented(name: &str, variant: Variant) -> BTreeSet<String> {
    let ids: &[&str] = match (name, variant) {
        (_, Variant::Compliant) => &[],
        ("slip-road", _) => &["REC-02", "REC-05"],
        ("discretionary-right-turn", _) => &["REC-08"],
        ("overtake-parked", _) => &["REC-11"],
        ("adjacent-wide-vehicle", _) => &["REC-16"],
        ("vegetation", _) => &["REC-18"],
        ("pedestrian-on-road", _) => &["REC-21", "TR68-6.3.2"],
        _ => unreachable!("unknown example {name}"),
    };
    ids.iter().map(|s| s.to_string()).collect()
}

fn c5_golden() -> Result<String, String> {
    let cfg = ThresholdConfig::default();
    let mut n = 0;
    for name in EXAMPLE_NAMES {
        for variant in Variant::ALL {
            let s = builtin_example(name, variant).map_err(|e| e.to_string())?;
            let got = common::violations(&common::run(&s, &cfg));
            let want = documented(name, variant);
            ensure(got == want, || format!("{name} {variant}: got {got:?}, documented {want:?}"))?;
            n += 1;
        }
    }
    Ok(format!("{n} example runs match their documented violation sets"))
}

fn c6_engine_properties() -> Result<String, String> {
    let cfg = ThresholdConfig::default();
    let all = RuleFilter::all();
    // Determinism and completeness.
    for name in EXAMPLE_NAMES {
        let s = builtin_example(name, Variant::Violating).map_err(|e| e.to_string())?;
        let a = report_to_json(&evaluate_with(&s, &cfg, &all, Execution::Sequential));
        let b = report_to_json(&evaluate_with(&s, &cfg, &all, Execution::Sequential));
        let c = report_to_json(&evaluate_with(&s, &cfg, &all, Execution::Parallel));
        ensure(a == b && b == c, || format!("{name}: reports differ between runs"))?;
        for filter in [all.clone(), RuleFilter::parse("maneuver"), RuleFilter::parse("REC-03,TR68-6.4,FTD-221")] {
            let r = evaluate_with(&s, &cfg, &filter, Execution::Sequential);
            let want: Vec<&str> = filter.rules().iter().map(|r| r.id).collect();
            let got: Vec<&str> = r.verdicts.iter().map(|v| v.rule.as_str()).collect();
            ensure(got == want, || format!("{name}: verdicts {got:?} vs selected {want:?}"))?;
        }
    }
    // Gating: strip every road feature and no infrastructure rule may apply.
    let mut gated = 0;
    for name in EXAMPLE_NAMES {
        let mut s = builtin_example(name, Variant::Violating).map_err(|e| e.to_string())?;
        s.network = RoadNetwork::new(s.network.lanes.clone(), Vec::new()).map_err(|e| e.join("; "))?;
        let r = evaluate_with(&s, &cfg, &RuleFilter::parse("infrastructure"), Execution::Sequential);
        for v in &r.verdicts {
            ensure(v.outcome == Outcome::NotApplicable, || format!("{name}: {} is {} without features", v.rule, v.outcome))?;
            gated += 1;
        }
    }
    // Monotonicity: loosening one threshold never adds a violation.
    let mut rng = common::rng(0xacce_0006);
    let keys: Vec<&str> = avbc_core::catalog::THRESHOLD_SPECS.iter().map(|s| s.key).collect();
    let mut comparisons = 0;
    for _ in 0..20 {
        let s = common::perturbed_example(&mut rng);
        let base = common::violations(&common::run(&s, &cfg));
        for key in &keys {
            let Some(loose) = common::moved(&cfg, key, 0.3) else { continue };
            let got = common::violations(&common::run(&s, &loose));
            let added: Vec<&String> = got.difference(&base).collect();
            ensure(added.is_empty(), || format!("{}: loosening {key} added {added:?}", s.metadata.name))?;
            comparisons += 1;
        }
    }
    Ok(format!(
        "deterministic and complete on {} examples; {gated} infrastructure verdicts gated; {comparisons} loosenings monotone",
        EXAMPLE_NAMES.len()
    ))
}

fn normalise(text: &str) -> String {
    text.replace(['\u{2018}', '\u{2019}'], "'")
        .replace(['\u{201c}', '\u{201d}'], "\"")
        .replace(['\u{2013}', '\u{2014}'], "-")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn c7_registry_coverage() -> Result<String, String> {
    let mut by_item: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
    for r in registry() {
        if let Some(rest) = r.id.strip_prefix("REC-") {
            let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
            let suffix = &rest[digits.len()..];
            ensure(suffix.len() <= 1 && suffix.chars().all(|c| c.is_ascii_lowercase()), || format!("odd id {}", r.id))?;
            by_item.entry(digits.parse().map_err(|_| format!("odd id {}", r.id))?).or_default().push(r.id);
        }
    }
    let items: Vec<u32> = by_item.keys().copied().collect();
    ensure(items == (1..=22).collect::<Vec<_>>(), || format!("recommendation items {items:?}"))?;
    for (n, ids) in &by_item {
        let unique: BTreeSet<&&str> = ids.iter().collect();
        ensure(unique.len() == ids.len(), || format!("item {n} duplicated: {ids:?}"))?;
        // One entry, or one family of lettered parts (a, b, ...) without a bare entry.
        let lettered = ids.iter().all(|id| id.ends_with(|c: char| c.is_ascii_lowercase()));
        ensure(ids.len() == 1 || lettered, || format!("item {n} listed both whole and in parts: {ids:?}"))?;
        for id in ids {
            let rule = registry().iter().find(|r| r.id == *id).unwrap();
            let catalog_only = rule.evaluability == Evaluability::CatalogOnly;
            ensure(catalog_only == (*n == 13), || format!("{id} evaluability {:?}", rule.evaluability))?;
        }
    }
    let source_text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../paper.md")).ok().map(|p| normalise(&p));
    let mut anchored = 0;
    for r in registry().iter().filter(|r| r.is_evaluable()) {
        ensure(!r.sources.is_empty() && r.sources.iter().all(|s| !s.quote.trim().is_empty()), || {
            format!("{} has no quote anchor", r.id)
        })?;
        if let Some(text) = &source_text {
            for s in r.sources {
                ensure(text.contains(&normalise(s.quote)), || format!("{}: quote not found verbatim: {}", r.id, s.quote))?;
                anchored += 1;
            }
        }
    }
    let cats: BTreeSet<Category> = registry().iter().map(|r| r.category).collect();
    Ok(format!(
        "items 1-22 present once each; {anchored} evaluable quotes found verbatim in the source text; {} categories",
        cats.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Check); 7] = [
        ("AASHTO stopping distance", Duration::from_secs(1), c1_aashto),
        ("following-model crossover", Duration::from_secs(5), c2_following_crossover),
        ("threshold fidelity", Duration::from_secs(1), c3_threshold_fidelity),
        ("oracle equivalence", Duration::from_secs(30), c4_oracles),
        ("golden verdicts", Duration::from_secs(10), c5_golden),
        ("engine properties", Duration::from_secs(600), c6_engine_properties),
        ("registry coverage", Duration::from_secs(1), c7_registry_coverage),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        let result = result.and_then(|detail| {
            if took <= budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {:.2} s, budget {:.0} s", took.as_secs_f64(), budget.as_secs_f64()))
            }
        });
        match result {
            Ok(detail) => println!("PASS criterion {} {name}: {detail} [{:.2} s]", i + 1, took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {} {name}: {why} [{:.2} s]", i + 1, took.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! End-to-end runs of the `avbc` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn avbc(args: &[&str]) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_avbc"));
    c.args(args).env_remove("AVBC_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    avbc(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes a built-in example into `dir` and returns its path.
fn example(dir: &Path, name: &str, variant: &str) -> PathBuf {
    let path = dir.join(format!("{name}-{variant}.json"));
    let o = run(&["example", name, "--variant", variant, "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

fn machine(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn outcome<'a>(report: &'a Value, rule: &str) -> &'a str {
    report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["rule"] == rule)
        .unwrap_or_else(|| panic!("no verdict for {rule}"))["outcome"]
        .as_str()
        .unwrap()
}

#[test]
fn violating_overtake_exits_one_and_compliant_exits_zero() {
    let dir = TempDir::new().unwrap();
    let bad = example(dir.path(), "overtake-parked", "violating");
    let o = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.contains("REC-11")).unwrap();
    assert!(line.contains("VIOLATION"), "{line}");
    assert!(text.contains("Summary: 1 violation,"), "{text}");

    let good = example(dir.path(), "overtake-parked", "compliant");
    let o = run(&["check", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn rec_11_evidence_carries_speed_and_clearance() {
    let dir = TempDir::new().unwrap();
    let bad = example(dir.path(), "overtake-parked", "violating");
    let o = run(&["check", bad.to_str().unwrap(), "--rules", "REC-11", "--format", "machine"]);
    assert_eq!(o.status.code(), Some(1));
    let r = machine(&o);
    let v = &r["verdicts"][0];
    assert_eq!(v["outcome"], "violation");
    let ev = v["evidence"].as_array().unwrap();
    let speed = ev.iter().find(|e| e["measure"].as_str().unwrap().contains("speed")).unwrap();
    assert!((speed["value"].as_f64().unwrap() - 38.0).abs() < 0.5, "{speed}");
}

#[test]
fn slip_road_compliant_passes_its_recommendations() {
    let dir = TempDir::new().unwrap();
    let p = example(dir.path(), "slip-road", "compliant");
    let o = run(&["check", p.to_str().unwrap(), "--format", "machine"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = machine(&o);
    for rule in ["REC-02", "REC-03a", "REC-03b", "REC-05", "TR68-7.9.4", "TR68-7.9.5", "TR68-7.9.6"] {
        assert_eq!(outcome(&r, rule), "pass", "{rule}");
    }
}

#[test]
fn machine_output_round_trips_and_summary_goes_to_stderr() {
    let dir = TempDir::new().unwrap();
    let p = example(dir.path(), "vegetation", "violating");
    let o = run(&["check", p.to_str().unwrap(), "--format", "machine"]);
    let r = machine(&o);
    assert_eq!(r["scenario"], "vegetation-violating");
    assert_eq!(outcome(&r, "REC-18"), "violation");
    assert!(stderr(&o).contains("1 violation"), "{}", stderr(&o));

    let out = dir.path().join("report.json");
    let o2 = run(&["check", p.to_str().unwrap(), "--format", "machine", "--out", out.to_str().unwrap()]);
    assert_eq!(o2.status.code(), Some(1));
    assert!(o2.stdout.is_empty());
    assert_eq!(fs::read_to_string(&out).unwrap(), stdout(&o));
}

#[test]
fn unknown_rule_selection_exits_two() {
    let dir = TempDir::new().unwrap();
    let p = example(dir.path(), "vegetation", "compliant");
    let o = run(&["check", p.to_str().unwrap(), "--rules", "NOPE"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("0 rules evaluated"), "{}", stderr(&o));
}

#[test]
fn strict_promotes_minor_findings() {
    let dir = TempDir::new().unwrap();
    let p = example(dir.path(), "pedestrian-on-road", "compliant");
    assert_eq!(run(&["check", p.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(run(&["check", p.to_str().unwrap(), "--strict"]).status.code(), Some(1));
}

#[test]
fn config_flag_overrides_environment() {
    let dir = TempDir::new().unwrap();
    let p = example(dir.path(), "overtake-parked", "violating");
    // Raising the parked-car speed cap clears REC-11.
    let loose = dir.path().join("loose.conf");
    fs::write(&loose, "parked_pass_speed = 45\n").unwrap();
    let strict = dir.path().join("strict.conf");
    fs::write(&strict, "parked_pass_speed = 20\n").unwrap();
    let args = ["check", p.to_str().unwrap(), "--rules", "REC-11", "--format", "machine"];

    let o = avbc(&args).env("AVBC_CONFIG", &loose).output().unwrap();
    assert_eq!(outcome(&machine(&o), "REC-11"), "pass", "{}", stderr(&o));
    assert_eq!(o.status.code(), Some(0));

    let mut with_flag = args.to_vec();
    with_flag.extend(["--config", strict.to_str().unwrap()]);
    let o = avbc(&with_flag).env("AVBC_CONFIG", &loose).output().unwrap();
    assert_eq!(outcome(&machine(&o), "REC-11"), "violation");
    let r = machine(&o);
    let recorded = r["overrides"]["parked_pass_speed"].as_str().unwrap();
    assert!(recorded.starts_with("20 ") && recorded.contains("strict.conf"), "{recorded}");
}

#[test]
fn bad_config_exits_two() {
    let dir = TempDir::new().unwrap();
    let p = example(dir.path(), "vegetation", "compliant");
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "no_such_threshold = 3\n").unwrap();
    let o = avbc(&["check", p.to_str().unwrap()]).env("AVBC_CONFIG", &conf).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.conf"), "{}", stderr(&o));
    let o = run(&["check", p.to_str().unwrap(), "--config", dir.path().join("missing.conf").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn several_files_report_in_path_order() {
    let dir = TempDir::new().unwrap();
    let b = example(dir.path(), "vegetation", "compliant");
    let a = example(dir.path(), "adjacent-wide-vehicle", "violating");
    let o = run(&["check", b.to_str().unwrap(), a.to_str().unwrap(), "--format", "machine"]);
    assert_eq!(o.status.code(), Some(1));
    let r = machine(&o);
    let names: Vec<&str> = r.as_array().unwrap().iter().map(|x| x["scenario"].as_str().unwrap()).collect();
    assert_eq!(names, ["adjacent-wide-vehicle-violating", "vegetation-compliant"]);
}

#[test]
fn braking_table_row_and_monotone_columns() {
    let o = run(&["braking-table", "--t", "1.0", "--f", "0.7", "--g", "0", "--vmax", "50", "--step", "50"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split_whitespace().collect();
    assert_eq!(row[..4], ["50.0", "27.96", "29.96", "27.78"]);

    let o = run(&["braking-table"]);
    let rows: Vec<Vec<f64>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for w in rows.windows(2) {
        for c in 0..5 {
            assert!(w[1][c] > w[0][c], "{w:?}");
        }
    }
}

#[test]
fn rules_listing_filters_by_category() {
    let o = run(&["rules", "--filter", "infrastructure"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let headers: Vec<&str> = text.lines().filter(|l| !l.starts_with(' ')).collect();
    assert!(!headers.is_empty());
    assert!(headers.iter().all(|l| l.contains("[infrastructure]")), "{text}");
    assert!(text.contains("REC-06"));

    let all = stdout(&run(&["rules"]));
    assert!(all.contains("REC-13") && all.contains("catalog only"));
}

#[test]
fn unknown_example_exits_two() {
    let o = run(&["example", "no-such-example"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("slip-road"));
}

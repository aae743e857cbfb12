//! Numeric thresholds, their defaults, provenance and the flat `key = value` loader.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// A threshold is either a single number or a closed `[lo, hi]` window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThresholdValue {
    Scalar(f64),
    Range(f64, f64),
}

impl fmt::Display for ThresholdValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdValue::Scalar(v) => write!(f, "{v}"),
            ThresholdValue::Range(a, b) => write!(f, "[{a}, {b}]"),
        }
    }
}

/// Which way a threshold moves when it is relaxed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Permissive {
    Increase,
    Decrease,
    /// Ranges: lower bound down, upper bound up.
    Widen,
    /// Detection or model parameters without a monotone relaxation.
    Neither,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "from", rename_all = "snake_case")]
pub enum Origin {
    Default,
    File { path: String, line: usize },
    Override,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => f.write_str("default"),
            Origin::File { path, line } => write!(f, "{path}:{line}"),
            Origin::Override => f.write_str("override"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ThresholdSpec {
    pub key: &'static str,
    pub unit: &'static str,
    pub permissive: Permissive,
    /// Rule ids that read this threshold.
    pub rules: &'static [&'static str],
}

trait Slot {
    fn to_value(&self) -> ThresholdValue;
    fn from_value(v: ThresholdValue) -> Option<Self>
    where
        Self: Sized;
}

impl Slot for f64 {
    fn to_value(&self) -> ThresholdValue {
        ThresholdValue::Scalar(*self)
    }
    fn from_value(v: ThresholdValue) -> Option<Self> {
        match v {
            ThresholdValue::Scalar(x) => Some(x),
            ThresholdValue::Range(..) => None,
        }
    }
}

impl Slot for (f64, f64) {
    fn to_value(&self) -> ThresholdValue {
        ThresholdValue::Range(self.0, self.1)
    }
    fn from_value(v: ThresholdValue) -> Option<Self> {
        match v {
            ThresholdValue::Range(a, b) => Some((a, b)),
            ThresholdValue::Scalar(_) => None,
        }
    }
}

macro_rules! thresholds {
    ($( $key:ident : $ty:ty = $default:expr, $unit:literal, $perm:ident, [$($rule:literal),*]; )*) => {
        /// Every tunable threshold. Field names double as config-file keys.
        #[derive(Debug, Clone, PartialEq)]
        pub struct ThresholdConfig {
            $( pub $key: $ty, )*
            origins: BTreeMap<&'static str, Origin>,
        }

        impl Default for ThresholdConfig {
            fn default() -> Self {
                Self {
                    $( $key: $default, )*
                    origins: BTreeMap::new(),
                }
            }
        }

        pub const THRESHOLD_SPECS: &[ThresholdSpec] = &[
            $( ThresholdSpec {
                key: stringify!($key),
                unit: $unit,
                permissive: Permissive::$perm,
                rules: &[$($rule),*],
            }, )*
        ];

        impl ThresholdConfig {
            pub fn get(&self, key: &str) -> Option<ThresholdValue> {
                match key {
                    $( stringify!($key) => Some(Slot::to_value(&self.$key)), )*
                    _ => None,
                }
            }

            fn assign(&mut self, key: &str, v: ThresholdValue) -> Result<&'static str, SetError> {
                match key {
                    $( stringify!($key) => {
                        self.$key = <$ty as Slot>::from_value(v).ok_or(SetError::Shape)?;
                        Ok(stringify!($key))
                    } )*
                    _ => Err(SetError::Unknown),
                }
            }
        }
    };
}

thresholds! {
    speed_limit_default: f64 = 50.0, "km/h", Increase, ["TR68-6.1.a"];
    stop_line_window: (f64, f64) = (0.0, 1.5), "m", Widen, ["TR68-6.4"];
    signal_lead: f64 = 3.0, "s", Decrease, ["TR68-7.5", "TR68-7.10.2.c"];
    rear_gap_ttc: f64 = 9.0, "s", Decrease, ["REC-03b", "REC-19"];
    car_length_per_16kmh: f64 = 1.0, "car lengths", Decrease, ["REC-03b", "REC-19"];
    car_length: f64 = 4.5, "m", Decrease, ["REC-03b", "REC-19"];
    return_ttc: f64 = 2.0, "s", Decrease, ["REC-03a"];
    turn_completion_ttc: f64 = 2.0, "s", Decrease, ["REC-08"];
    lat_accel_max: f64 = 3.0, "m/s^2", Increase, ["REC-04"];
    lat_jerk_max: f64 = 5.0, "m/s^3", Increase, ["REC-04"];
    jerk_window: f64 = 0.5, "s", Neither, ["REC-04"];
    slip_entry_offset: f64 = 3.0, "m", Increase, ["REC-05"];
    slip_entry_tolerance: f64 = 5.0, "m", Increase, ["REC-05"];
    overtake_junction_lead: f64 = 3.0, "s", Decrease, ["REC-02"];
    ped_clearance_lt30: f64 = 1.0, "m", Decrease, ["TR68-6.3.2", "REC-21"];
    ped_clearance_ge30: f64 = 1.5, "m", Decrease, ["TR68-6.3.2", "REC-21"];
    ped_clearance_away_onroad: f64 = 1.0, "m", Decrease, ["TR68-6.3.2"];
    ped_clearance_away_offroad: f64 = 0.5, "m", Decrease, ["TR68-6.3.2"];
    ped_clearance_exception: f64 = 0.5, "m", Decrease, ["TR68-6.3.2", "REC-21", "REC-22"];
    ped_speed_split: f64 = 30.0, "km/h", Increase, ["TR68-6.3.2", "REC-21"];
    zebra_lateral_stop: f64 = 4.0, "m", Decrease, ["TR68-7.9.4", "REC-09"];
    zebra_lateral_approach: f64 = 7.0, "m", Decrease, ["TR68-7.9.4", "TR68-7.9.5", "REC-09"];
    zebra_traverse_speed: f64 = 30.0, "km/h", Increase, ["TR68-7.9.6"];
    zebra_intent_wait: f64 = 5.0, "s", Increase, ["TR68-7.9.6"];
    zebra_no_line_stop: f64 = 3.0, "m", Neither, ["TR68-7.9.4"];
    zebra_zone_margin: f64 = 0.0, "m", Decrease, ["TR68-7.9.4", "TR68-7.9.5", "TR68-7.9.6", "REC-09"];
    fixed_obstacle_gap: f64 = 0.5, "m", Decrease, ["FTD-226", "REC-17"];
    moving_vehicle_gap: f64 = 1.5, "m", Decrease, ["FTD-227", "REC-11", "REC-15", "REC-16"];
    parked_vehicle_gap: f64 = 1.0, "m", Decrease, ["FTD-221"];
    cyclist_gap: f64 = 1.5, "m", Decrease, ["TR68-7.6.i"];
    parked_pass_speed: f64 = 30.0, "km/h", Increase, ["REC-11"];
    pull_in_lead: (f64, f64) = (1.0, 1.5), "ego lengths", Widen, ["REC-12"];
    overtake_dwell_max: f64 = 20.0, "s", Increase, ["REC-12"];
    adjacent_pass_clearance: f64 = 0.5, "m", Decrease, ["REC-15", "REC-16"];
    adjacent_speed_ratio: f64 = 1.2, "ratio", Increase, ["REC-16"];
    adjacent_stationary_pass_speed: f64 = 30.0, "km/h", Increase, ["REC-16"];
    slow_tsv_threshold: f64 = 25.0, "km/h", Neither, ["REC-15", "REC-16", "FTD-227"];
    straddle_max: f64 = 80.0, "m", Increase, ["REC-18"];
    stuck_alert: f64 = 10.0, "s", Increase, ["REC-22"];
    signal_carry_window: f64 = 10.0, "s", Neither, ["REC-07"];
    follow_stop_margin: f64 = 2.0, "m", Decrease, ["REC-01"];
    system_latency: f64 = 0.5, "s", Decrease, ["REC-01"];
    friction_coefficient: f64 = 0.7, "-", Increase, ["REC-01"];
    road_grade: f64 = 0.0, "-", Increase, ["REC-01"];
    creep_speed_cap: f64 = 10.0, "km/h", Increase, ["REC-06"];
    visibility_threshold: f64 = 0.5, "fraction", Neither, ["REC-06"];
    centering_tolerance: f64 = 0.5, "m", Increase, ["REC-14"];
    edge_margin: f64 = 0.0, "m", Neither, ["REC-14", "REC-17", "REC-20"];
    continuity_reversal: f64 = 0.3, "m", Increase, ["TR68-7.5"];
    weave_amplitude: f64 = 0.5, "m", Increase, ["BTD-160c"];
    weave_window: f64 = 5.0, "s", Decrease, ["BTD-160c"];
    weave_reversals: f64 = 2.0, "count", Increase, ["BTD-160c"];
    lane_change_lateral_speed: f64 = 0.2, "m/s", Neither, [];
    lane_change_sustain: f64 = 0.5, "s", Neither, [];
    stop_speed: f64 = 0.1, "m/s", Neither, [];
    stop_min_duration: f64 = 0.5, "s", Neither, [];
    turn_yaw_rate: f64 = 0.05, "rad/s", Neither, [];
    turn_min_heading: f64 = 0.35, "rad", Neither, [];
    straddle_coverage: f64 = 0.9, "fraction", Neither, [];
    resample_dt: f64 = 0.1, "s", Neither, [];
}

enum SetError {
    Unknown,
    Shape,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown threshold key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: value for '{key}' is not numeric: '{raw}'")]
    NotNumeric { line: usize, key: String, raw: String },
    #[error("line {line}: '{key}' expects a {expected}")]
    WrongShape { line: usize, key: String, expected: &'static str },
    #[error("line {line}: range for '{key}' is out of order ({lo} > {hi})")]
    Ordering { line: usize, key: String, lo: f64, hi: f64 },
    #[error("line {line}: expected 'key = value'")]
    Syntax { line: usize },
    #[error("'{key}' must be {requirement}")]
    Domain { key: String, requirement: &'static str },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct ConfigErrors(pub Vec<ConfigError>);

fn parse_number(raw: &str) -> Option<f64> {
    raw.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_value(raw: &str) -> Result<ThresholdValue, ()> {
    let raw = raw.trim();
    if let Some(inner) = raw.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 2 {
            return Err(());
        }
        let lo = parse_number(parts[0]).ok_or(())?;
        let hi = parse_number(parts[1]).ok_or(())?;
        return Ok(ThresholdValue::Range(lo, hi));
    }
    parse_number(raw).map(ThresholdValue::Scalar).ok_or(())
}

impl ThresholdSpec {
    pub fn default_value(&self) -> ThresholdValue {
        ThresholdConfig::default().get(self.key).expect("spec keys are config fields")
    }
}

impl ThresholdConfig {
    pub fn spec(key: &str) -> Option<&'static ThresholdSpec> {
        THRESHOLD_SPECS.iter().find(|s| s.key == key)
    }

    pub fn origin(&self, key: &str) -> Origin {
        self.origins.get(key).cloned().unwrap_or(Origin::Default)
    }

    /// Programmatic override; the same shape and ordering checks as the loader.
    pub fn set(&mut self, key: &str, value: ThresholdValue) -> Result<(), ConfigError> {
        self.set_with_origin(key, value, Origin::Override, 0)
    }

    fn set_with_origin(
        &mut self,
        key: &str,
        value: ThresholdValue,
        origin: Origin,
        line: usize,
    ) -> Result<(), ConfigError> {
        if let ThresholdValue::Range(lo, hi) = value {
            if lo > hi {
                return Err(ConfigError::Ordering { line, key: key.to_string(), lo, hi });
            }
        }
        match self.assign(key, value) {
            Ok(k) => {
                self.origins.insert(k, origin);
                Ok(())
            }
            Err(SetError::Unknown) => Err(ConfigError::UnknownKey { line, key: key.to_string() }),
            Err(SetError::Shape) => Err(ConfigError::WrongShape {
                line,
                key: key.to_string(),
                expected: match Self::default().get(key) {
                    Some(ThresholdValue::Range(..)) => "[lo, hi] range",
                    _ => "single number",
                },
            }),
        }
    }

    /// Applies `key = value` overrides on top of the defaults.
    pub fn load_str(text: &str, source: &str) -> Result<Self, ConfigErrors> {
        let mut cfg = Self::default();
        let mut errors = Vec::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, raw)) = content.split_once('=') else {
                errors.push(ConfigError::Syntax { line });
                continue;
            };
            let key = key.trim();
            if Self::spec(key).is_none() {
                errors.push(ConfigError::UnknownKey { line, key: key.to_string() });
                continue;
            }
            let value = match parse_value(raw) {
                Ok(v) => v,
                Err(()) => {
                    errors.push(ConfigError::NotNumeric {
                        line,
                        key: key.to_string(),
                        raw: raw.trim().to_string(),
                    });
                    continue;
                }
            };
            let origin = Origin::File { path: source.to_string(), line };
            if let Err(e) = cfg.set_with_origin(key, value, origin, line) {
                errors.push(e);
            }
        }
        errors.extend(cfg.domain_errors());
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigErrors(errors))
        }
    }

    pub fn load_file(path: &std::path::Path) -> Result<Self, ConfigErrors> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigErrors(vec![ConfigError::Domain {
                key: path.display().to_string(),
                requirement: if e.kind() == std::io::ErrorKind::NotFound {
                    "an existing file"
                } else {
                    "a readable file"
                },
            }])
        })?;
        Self::load_str(&text, &path.display().to_string())
    }

    /// Physical sanity checks that do not depend on a single line.
    pub fn domain_errors(&self) -> Vec<ConfigError> {
        let mut out = Vec::new();
        for spec in THRESHOLD_SPECS {
            let bad = match self.get(spec.key).expect("known key") {
                ThresholdValue::Scalar(v) => v < 0.0 && spec.key != "road_grade",
                ThresholdValue::Range(lo, _) => lo < 0.0,
            };
            if bad {
                out.push(ConfigError::Domain { key: spec.key.to_string(), requirement: "non-negative" });
            }
        }
        for key in ["resample_dt", "car_length", "jerk_window", "weave_window"] {
            if let Some(ThresholdValue::Scalar(v)) = self.get(key) {
                if v <= 0.0 {
                    out.push(ConfigError::Domain { key: key.to_string(), requirement: "positive" });
                }
            }
        }
        if self.friction_coefficient + self.road_grade <= 0.0 {
            out.push(ConfigError::Domain {
                key: "friction_coefficient".into(),
                requirement: "such that friction_coefficient + road_grade > 0",
            });
        }
        out
    }

    /// Canonical `key=value` text in key order.
    pub fn canonical_text(&self) -> String {
        let mut keys: Vec<&str> = THRESHOLD_SPECS.iter().map(|s| s.key).collect();
        keys.sort_unstable();
        keys.iter()
            .map(|k| match self.get(k).expect("known key") {
                ThresholdValue::Scalar(v) => format!("{k}={v:?}\n"),
                ThresholdValue::Range(a, b) => format!("{k}=[{a:?},{b:?}]\n"),
            })
            .collect()
    }

    /// Short SHA-256 digest of the resolved values.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&'static ThresholdSpec, ThresholdValue, Origin)> + '_ {
        THRESHOLD_SPECS
            .iter()
            .map(move |s| (s, self.get(s.key).expect("known key"), self.origin(s.key)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_keep_provenance() {
        let cfg = ThresholdConfig::load_str("# tuned\nsignal_lead = 4 # stricter\n", "t.cfg").unwrap();
        assert_eq!(cfg.signal_lead, 4.0);
        assert_eq!(cfg.origin("signal_lead"), Origin::File { path: "t.cfg".into(), line: 2 });
        assert_eq!(cfg.origin("return_ttc"), Origin::Default);
    }

    #[test]
    fn loader_errors() {
        let e = ThresholdConfig::load_str("bogus = 1", "x").unwrap_err();
        assert!(matches!(e.0[0], ConfigError::UnknownKey { line: 1, .. }));
        let e = ThresholdConfig::load_str("signal_lead = fast", "x").unwrap_err();
        assert!(matches!(e.0[0], ConfigError::NotNumeric { .. }));
        let e = ThresholdConfig::load_str("stop_line_window = [2, 1]", "x").unwrap_err();
        assert!(matches!(e.0[0], ConfigError::Ordering { .. }));
        let e = ThresholdConfig::load_str("stop_line_window = 2", "x").unwrap_err();
        assert!(matches!(e.0[0], ConfigError::WrongShape { .. }));
    }

    #[test]
    fn fingerprint_tracks_values_not_origin() {
        let a = ThresholdConfig::default();
        let b = ThresholdConfig::load_str("signal_lead = 3", "x").unwrap();
        let c = ThresholdConfig::load_str("signal_lead = 3.5", "x").unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
        assert_eq!(a.fingerprint().len(), 16);
    }
}

//! Recorded actor traces, scenario validation and uniform resampling.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{angle_diff, normalize_angle, Footprint, Pose2, Vec2};
use crate::road::RoadNetwork;

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_DT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorClass {
    Car,
    Bus,
    Truck,
    Motorcycle,
    Cyclist,
    Pedestrian,
    /// Personal mobility device rider.
    Pmd,
    StaticObstacle,
}

impl ActorClass {
    pub fn is_motor_vehicle(self) -> bool {
        matches!(self, ActorClass::Car | ActorClass::Bus | ActorClass::Truck | ActorClass::Motorcycle)
    }

    pub fn is_vru(self) -> bool {
        matches!(self, ActorClass::Pedestrian | ActorClass::Cyclist | ActorClass::Pmd)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActorClass::Car => "car",
            ActorClass::Bus => "bus",
            ActorClass::Truck => "truck",
            ActorClass::Motorcycle => "motorcycle",
            ActorClass::Cyclist => "cyclist",
            ActorClass::Pedestrian => "pedestrian",
            ActorClass::Pmd => "pmd",
            ActorClass::StaticObstacle => "static_obstacle",
        }
    }
}

impl fmt::Display for ActorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    #[default]
    Off,
    Left,
    Right,
    Hazard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    #[default]
    None,
    Crossing,
    MovingAway,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: Option<f64>,
}

impl Sample {
    pub fn new(t: f64, x: f64, y: f64, heading: f64) -> Self {
        Self {
            t,
            x,
            y,
            heading: normalize_angle(heading),
            speed: None,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Time-stamped piecewise-constant channel entries, sorted by time.
pub type Channel<T> = Vec<(f64, T)>;

#[derive(Debug, Clone, PartialEq)]
pub struct ActorTrace {
    pub id: String,
    pub class: ActorClass,
    pub length: f64,
    pub width: f64,
    pub mirror_extra: f64,
    pub samples: Vec<Sample>,
    /// `None` means the channel was not recorded at all.
    pub signals: Option<Channel<Indicator>>,
    pub intents: Option<Channel<Intent>>,
    pub alerts: Channel<String>,
}

impl ActorTrace {
    pub fn new(id: impl Into<String>, class: ActorClass, length: f64, width: f64) -> Self {
        Self {
            id: id.into(),
            class,
            length,
            width,
            mirror_extra: 0.0,
            samples: Vec::new(),
            signals: None,
            intents: None,
            alerts: Vec::new(),
        }
    }

    pub fn time_span(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.t, self.samples.last()?.t))
    }

    pub fn footprint(&self, pose: Pose2) -> Footprint {
        Footprint::new(pose, self.length, self.width).with_mirrors(self.mirror_extra)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metadata {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub metadata: Metadata,
    pub network: RoadNetwork,
    pub actors: Vec<ActorTrace>,
    pub ego: String,
    /// Posted limit for the whole scenario; the configured default applies when absent.
    pub speed_limit_kmh: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unsupported format_version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("{} semantic error(s): {}", .0.len(), .0.join("; "))]
    Semantic(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResampleError {
    #[error("actor '{0}' has no samples")]
    Empty(String),
    #[error("actor '{0}' has a single sample and is not a static obstacle")]
    SingleSample(String),
    #[error("resampling step must be positive")]
    BadStep,
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario, LoadError> {
    crate::io::ScenarioFile::parse(text)?.into_scenario()
}

impl Scenario {
    pub fn ego_trace(&self) -> &ActorTrace {
        self.actor(&self.ego).expect("validated scenario has an ego")
    }

    pub fn actor(&self, id: &str) -> Option<&ActorTrace> {
        self.actors.iter().find(|a| a.id == id)
    }

    /// Every semantic problem, in a stable order.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if self.actors.is_empty() {
            issues.push("actor list is empty".to_string());
        }
        if self.speed_limit_kmh.is_some_and(|v| !(v > 0.0)) {
            issues.push("speed_limit_kmh must be positive".to_string());
        }
        match self.actor(&self.ego) {
            None if !self.actors.is_empty() => {
                issues.push(format!("ego '{}' is not among the actors", self.ego))
            }
            Some(e) if e.class == ActorClass::StaticObstacle || e.class == ActorClass::Pedestrian => {
                issues.push(format!("ego '{}' must be a vehicle", self.ego))
            }
            Some(e) if e.samples.len() < 2 => {
                issues.push(format!("ego '{}' needs at least 2 samples", self.ego))
            }
            _ => {}
        }
        for (i, a) in self.actors.iter().enumerate() {
            if self.actors[..i].iter().any(|b| b.id == a.id) {
                issues.push(format!("duplicate actor id '{}'", a.id));
            }
            if !(a.length > 0.0 && a.width > 0.0) || !(a.mirror_extra >= 0.0) {
                issues.push(format!("actor '{}' has invalid dimensions", a.id));
            }
            if a.samples.is_empty() {
                issues.push(format!("actor '{}' has no samples", a.id));
            }
            for (k, s) in a.samples.iter().enumerate() {
                let finite = [s.t, s.x, s.y, s.heading].iter().all(|v| v.is_finite())
                    && s.speed.map_or(true, |v| v.is_finite() && v >= 0.0);
                if !finite {
                    issues.push(format!("actor '{}' sample {} is not finite or has negative speed", a.id, k));
                }
                if k > 0 {
                    let prev = a.samples[k - 1].t;
                    if s.t == prev {
                        issues.push(format!("actor '{}' sample {} duplicates timestamp {}", a.id, k, s.t));
                    } else if s.t < prev {
                        issues.push(format!("actor '{}' sample {} goes back in time", a.id, k));
                    }
                }
            }
            let sorted = |ts: &mut dyn Iterator<Item = f64>| {
                let v: Vec<f64> = ts.collect();
                v.windows(2).all(|w| w[0] <= w[1])
            };
            if let Some(sig) = &a.signals {
                if !sorted(&mut sig.iter().map(|e| e.0)) {
                    issues.push(format!("actor '{}' signal entries are not time-ordered", a.id));
                }
            }
            if let Some(int) = &a.intents {
                if !sorted(&mut int.iter().map(|e| e.0)) {
                    issues.push(format!("actor '{}' intent entries are not time-ordered", a.id));
                }
            }
            if !sorted(&mut a.alerts.iter().map(|e| e.0)) {
                issues.push(format!("actor '{}' alert entries are not time-ordered", a.id));
            }
        }
        if let (Some((e0, e1)), true) = (
            self.actor(&self.ego).and_then(ActorTrace::time_span),
            !self.actors.is_empty(),
        ) {
            for a in &self.actors {
                if a.class == ActorClass::StaticObstacle || a.samples.len() == 1 {
                    continue;
                }
                if let Some((a0, a1)) = a.time_span() {
                    if a1 < e0 || a0 > e1 {
                        issues.push(format!("actor '{}' does not overlap the ego time window", a.id));
                    }
                }
            }
        }
        issues
    }
}

/// Value of a piecewise-constant channel at `t`; the default before the first entry.
pub fn channel_state<T: Copy + Default>(channel: &[(f64, T)], t: f64) -> T {
    let k = channel.partition_point(|e| e.0 <= t);
    if k == 0 {
        T::default()
    } else {
        channel[k - 1].1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub t: f64,
    pub pose: Pose2,
    pub speed: f64,
    pub yaw_rate: f64,
}

/// Uniformly sampled states on the grid `t0 + k * dt` for `k` in `k0..k0+len`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSeries {
    pub t0: f64,
    pub dt: f64,
    pub k0: i64,
    pub states: Vec<State>,
    /// Single-sample static obstacles hold their state at every time.
    pub is_static: bool,
}

impl StateSeries {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn at_grid(&self, k: i64) -> Option<&State> {
        if self.is_static {
            return self.states.first();
        }
        let i = k - self.k0;
        if i < 0 {
            return None;
        }
        self.states.get(i as usize)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.t)
    }

    /// Converts back into samples carrying explicit speeds.
    pub fn to_samples(&self) -> Vec<Sample> {
        self.states
            .iter()
            .map(|s| Sample {
                t: s.t,
                x: s.pose.x,
                y: s.pose.y,
                heading: s.pose.heading,
                speed: Some(s.speed),
            })
            .collect()
    }

    pub fn path_length(&self) -> f64 {
        self.states
            .windows(2)
            .map(|w| w[0].pose.position().distance(w[1].pose.position()))
            .sum()
    }
}

/// Resamples a trace on its own grid starting at the first sample time.
pub fn resample(trace: &ActorTrace, dt: f64) -> Result<StateSeries, ResampleError> {
    let t0 = trace.samples.first().ok_or_else(|| ResampleError::Empty(trace.id.clone()))?.t;
    resample_on_grid(trace, t0, dt)
}

/// Resamples onto the grid `t0 + k * dt`, covering only the recorded span.
/// Position is linear, heading follows the shortest arc and missing speeds
/// come from central differences of the resampled positions.
pub fn resample_on_grid(trace: &ActorTrace, t0: f64, dt: f64) -> Result<StateSeries, ResampleError> {
    if !(dt > 0.0) {
        return Err(ResampleError::BadStep);
    }
    let samples = &trace.samples;
    let first = samples.first().ok_or_else(|| ResampleError::Empty(trace.id.clone()))?;
    if samples.len() == 1 {
        if trace.class != ActorClass::StaticObstacle {
            return Err(ResampleError::SingleSample(trace.id.clone()));
        }
        return Ok(StateSeries {
            t0,
            dt,
            k0: 0,
            states: vec![State {
                t: first.t,
                pose: Pose2::new(first.x, first.y, first.heading),
                speed: 0.0,
                yaw_rate: 0.0,
            }],
            is_static: true,
        });
    }
    let last = samples.last().expect("non-empty").t;
    let k_lo = ((first.t - t0) / dt - 1e-9).ceil() as i64;
    let k_hi = ((last - t0) / dt + 1e-9).floor() as i64;
    let have_speed = samples.iter().all(|s| s.speed.is_some());
    let mut states = Vec::with_capacity((k_hi - k_lo + 1).max(0) as usize);
    for k in k_lo..=k_hi {
        let t = t0 + k as f64 * dt;
        let t_c = t.clamp(first.t, last);
        let j = samples.partition_point(|s| s.t <= t_c).clamp(1, samples.len() - 1) - 1;
        let (a, b) = (&samples[j], &samples[j + 1]);
        let alpha = if t_c <= a.t { 0.0 } else { ((t_c - a.t) / (b.t - a.t)).min(1.0) };
        let pos = if alpha == 1.0 {
            b.position()
        } else {
            a.position() + (b.position() - a.position()) * alpha
        };
        let heading = if alpha == 1.0 {
            b.heading
        } else {
            normalize_angle(a.heading + angle_diff(b.heading, a.heading) * alpha)
        };
        let speed = if have_speed {
            let (va, vb) = (a.speed.unwrap_or(0.0), b.speed.unwrap_or(0.0));
            if alpha == 1.0 {
                vb
            } else {
                va + (vb - va) * alpha
            }
        } else {
            f64::NAN
        };
        states.push(State {
            t,
            pose: Pose2::new(pos.x, pos.y, heading),
            speed,
            yaw_rate: 0.0,
        });
    }
    let n = states.len();
    if n >= 2 {
        for i in 0..n {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let span = (hi - lo) as f64 * dt;
            if !have_speed {
                let d = states[hi].pose.position().distance(states[lo].pose.position());
                states[i].speed = d / span;
            }
            states[i].yaw_rate = angle_diff(states[hi].pose.heading, states[lo].pose.heading) / span;
        }
    } else if let Some(s) = states.first_mut() {
        if s.speed.is_nan() {
            s.speed = 0.0;
        }
    }
    Ok(StateSeries {
        t0,
        dt,
        k0: k_lo,
        states,
        is_static: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(samples: Vec<Sample>) -> ActorTrace {
        let mut a = ActorTrace::new("ego", ActorClass::Car, 4.5, 1.8);
        a.samples = samples;
        a
    }

    #[test]
    fn two_samples_give_eleven_states() {
        let t = trace(vec![Sample::new(0.0, 0.0, 0.0, 0.0), Sample::new(1.0, 10.0, 0.0, 0.0)]);
        let s = resample(&t, 0.1).unwrap();
        assert_eq!(s.len(), 11);
        assert!(s.states.iter().all(|st| (st.speed - 10.0).abs() < 1e-9));
        assert!((s.states[5].pose.x - 5.0).abs() < 1e-9);
    }

    #[test]
    fn single_sample_rules() {
        let t = trace(vec![Sample::new(0.0, 0.0, 0.0, 0.0)]);
        assert_eq!(resample(&t, 0.1), Err(ResampleError::SingleSample("ego".into())));
        let mut cone = t.clone();
        cone.class = ActorClass::StaticObstacle;
        let s = resample(&cone, 0.1).unwrap();
        assert!(s.is_static && s.at_grid(1234).is_some());
    }

    #[test]
    fn no_extrapolation_outside_span() {
        let t = trace(vec![Sample::new(0.25, 0.0, 0.0, 0.0), Sample::new(0.95, 7.0, 0.0, 0.0)]);
        let s = resample_on_grid(&t, 0.0, 0.1).unwrap();
        assert_eq!(s.k0, 3);
        assert_eq!(s.len(), 7);
        assert!(s.at_grid(2).is_none() && s.at_grid(10).is_none());
    }

    #[test]
    fn heading_interpolates_across_the_seam() {
        let t = trace(vec![Sample::new(0.0, 0.0, 0.0, 3.1), Sample::new(1.0, 0.0, 0.0, -3.1)]);
        let s = resample(&t, 0.1).unwrap();
        let mid = s.states[5].pose.heading;
        assert!((mid.abs() - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn channel_defaults_before_first_entry() {
        let ch = vec![(2.0, Indicator::Left), (5.0, Indicator::Off)];
        assert_eq!(channel_state(&ch, 1.0), Indicator::Off);
        assert_eq!(channel_state(&ch, 2.0), Indicator::Left);
        assert_eq!(channel_state(&ch, 4.9), Indicator::Left);
        assert_eq!(channel_state(&ch, 7.0), Indicator::Off);
    }
}

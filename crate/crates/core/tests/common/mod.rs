//! Helpers shared by the integration tests: brute-force oracles and
//! randomized scenario generation.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use avbc_core::catalog::{Outcome, Permissive, ThresholdConfig, ThresholdValue, THRESHOLD_SPECS};
use avbc_core::engine::{evaluate_with, Execution, Report, RuleFilter};
use avbc_core::geometry::{frenet_project, Footprint, Polyline, Pose2, Vec2};
use avbc_core::io::{builtin_example, Variant, EXAMPLE_NAMES};
use avbc_core::metrics::Body;
use avbc_core::road::{FeatureGeometry, FeatureKind, Lane, RoadFeature, RoadNetwork, TravelDirection};
use avbc_core::scenario::{ActorClass, ActorTrace, Metadata, Sample, Scenario};

pub const ORACLE_STEP: f64 = 1e-3;

/// Closest a region corner may come to a conflict path (m).
const GRAZE: f64 = 0.05;

// ---------------------------------------------------------------------------
// Lanes and paths

pub fn straight_line(len: f64) -> Polyline {
    Polyline::new(vec![Vec2::new(0.0, 0.0), Vec2::new(len, 0.0)]).unwrap()
}

/// Left-bending arc from the origin heading +x, one vertex every 0.5 m.
pub fn arc_line(radius: f64, len: f64) -> Polyline {
    let n = (len / 0.5).ceil() as usize;
    let pts = (0..=n)
        .map(|k| {
            let a = len * k as f64 / n as f64 / radius;
            Vec2::new(radius * a.sin(), radius * (1.0 - a.cos()))
        })
        .collect();
    Polyline::new(pts).unwrap()
}

pub fn random_line(rng: &mut ChaCha8Rng, len: f64) -> Polyline {
    if rng.gen_bool(0.5) {
        straight_line(len)
    } else {
        arc_line(rng.gen_range(60.0..300.0), len)
    }
}

// ---------------------------------------------------------------------------
// Longitudinal TTC

pub struct FollowCase {
    pub lane: Lane,
    pub rear: Body,
    pub front: Body,
    /// Arc positions and along-lane speeds the bodies were placed with.
    pub s_rear: f64,
    pub s_front: f64,
}

fn body_on(line: &Polyline, s: f64, d: f64, speed: f64, length: f64) -> Body {
    let p = line.from_frenet(s, d);
    Body { pose: Pose2::new(p.x, p.y, line.heading_at(s)), speed, length, width: 1.8 }
}

pub fn random_follow_case(rng: &mut ChaCha8Rng) -> FollowCase {
    let line = random_line(rng, 800.0);
    let (lr, lf) = (rng.gen_range(3.5..6.0), rng.gen_range(3.5..12.0));
    let s_rear = rng.gen_range(20.0..100.0);
    let s_front = s_rear + (lr + lf) / 2.0 + rng.gen_range(0.5..80.0);
    let (vr, vf) = (rng.gen_range(0.0..30.0), rng.gen_range(0.0..30.0));
    let lane = Lane::new("L", line.clone(), 3.5, TravelDirection::Forward);
    FollowCase {
        rear: body_on(&line, s_rear, 0.0, vr, lr),
        front: body_on(&line, s_front, 0.0, vf, lf),
        lane,
        s_rear,
        s_front,
    }
}

/// Advances both bodies along the lane in 1 ms steps until their bumpers meet.
pub fn follow_oracle(c: &FollowCase, horizon: f64) -> Option<f64> {
    let reach = (c.rear.length + c.front.length) / 2.0;
    let steps = (horizon / ORACLE_STEP) as u64;
    (0..=steps).map(|k| k as f64 * ORACLE_STEP).find(|&t| {
        let gap = (c.s_front + c.front.speed * t) - (c.s_rear + c.rear.speed * t) - reach;
        gap <= 0.0
    })
}

// ---------------------------------------------------------------------------
// Conflict-region TTC

pub struct ConflictCase {
    pub path: Polyline,
    pub region: Vec<Vec<Vec2>>,
    pub s_front: f64,
    pub speed: f64,
}

fn rect(centre: Vec2, heading: f64, length: f64, width: f64) -> Vec<Vec2> {
    let (c, s) = (heading.cos(), heading.sin());
    [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (a * length, b * width);
            Vec2::new(centre.x + c * x - s * y, centre.y + s * x + c * y)
        })
        .collect()
}

pub fn random_conflict_case(rng: &mut ChaCha8Rng) -> ConflictCase {
    let path = random_line(rng, 300.0);
    let n = rng.gen_range(1..6);
    let mut region = Vec::with_capacity(n);
    while region.len() < n {
        let s = rng.gen_range(30.0..250.0);
        let centre = path.from_frenet(s, rng.gen_range(-4.0..4.0));
        let poly = rect(centre, rng.gen_range(-3.2..3.2), rng.gen_range(3.5..6.0), rng.gen_range(1.6..2.6));
        // A path grazing a corner clips it for less than one oracle step; such
        // hits flip with millimetre perturbations, so they are not generated.
        if poly.iter().all(|&p| frenet_project(&path, p).d.abs() > GRAZE) {
            region.push(poly);
        }
    }
    ConflictCase { path, region, s_front: rng.gen_range(0.0..30.0), speed: rng.gen_range(1.0..20.0) }
}

fn inside_convex(poly: &[Vec2], p: Vec2) -> bool {
    let n = poly.len();
    let sign = |i: usize| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
    };
    let first = sign(0);
    (0..n).all(|i| sign(i) * first >= 0.0)
}

/// Walks the front point along the path in 1 ms steps until it lies inside the region.
pub fn conflict_oracle(c: &ConflictCase) -> Option<f64> {
    let mut t = 0.0;
    loop {
        let s = c.s_front + c.speed * t;
        if s > c.path.length() {
            return None;
        }
        let p = c.path.point_at(s);
        if c.region.iter().any(|poly| inside_convex(poly, p)) {
            return Some(t);
        }
        t += ORACLE_STEP;
    }
}

// ---------------------------------------------------------------------------
// Lateral clearance

pub fn random_footprint_pair(rng: &mut ChaCha8Rng) -> (Footprint, Vec<Vec2>) {
    let pose = Pose2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-3.2..3.2));
    let ego = Footprint::new(pose, rng.gen_range(3.5..6.0), rng.gen_range(1.5..2.2)).with_mirrors(rng.gen_range(0.0..0.3));
    let offset = Vec2::new(rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
    let other = rect(pose.position() + offset, rng.gen_range(-3.2..3.2), rng.gen_range(0.4..12.0), rng.gen_range(0.4..2.6));
    (ego, other)
}

/// Points every `step` metres along a closed outline, offset half a step from each vertex.
fn sample_outline(poly: &[Vec2], step: f64) -> Vec<Vec2> {
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
        let n = (len / step).ceil().max(1.0) as usize;
        for k in 0..n {
            let u = (k as f64 + 0.5) / n as f64;
            out.push(Vec2::new(a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u));
        }
    }
    out
}

/// Gap across the ego's left axis between 1 cm samples of both outlines.
pub fn clearance_oracle(ego: &Footprint, other: &[Vec2]) -> f64 {
    let h = ego.pose.heading;
    let (hl, hw) = (ego.length / 2.0, (ego.width + ego.mirror_extra) / 2.0);
    let (c, s) = (h.cos(), h.sin());
    let corners: Vec<Vec2> = [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)]
        .iter()
        .map(|&(x, y)| Vec2::new(ego.pose.x + c * x - s * y, ego.pose.y + s * x + c * y))
        .collect();
    let lateral = |p: &Vec2| -s * p.x + c * p.y;
    let span = |pts: Vec<Vec2>| {
        pts.iter().map(lateral).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (elo, ehi) = span(sample_outline(&corners, 0.01));
    let (olo, ohi) = span(sample_outline(other, 0.01));
    (olo - ehi).max(elo - ohi).max(0.0)
}

// ---------------------------------------------------------------------------
// Scenarios and verdict sets

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// A built-in example with its clock stretched and the ego shifted sideways.
pub fn perturbed_example(rng: &mut ChaCha8Rng) -> Scenario {
    let name = EXAMPLE_NAMES[rng.gen_range(0..EXAMPLE_NAMES.len())];
    let variant = if rng.gen_bool(0.5) { Variant::Compliant } else { Variant::Violating };
    let mut s = builtin_example(name, variant).unwrap();
    let k: f64 = rng.gen_range(0.85..1.2);
    let shift: f64 = rng.gen_range(-0.25..0.25);
    s.metadata.name = format!("{name}-{variant}-x{k:.3}-d{shift:+.3}");
    for a in &mut s.actors {
        let is_ego = a.id == s.ego;
        for smp in &mut a.samples {
            smp.t *= k;
            smp.speed = smp.speed.map(|v| v / k);
            if is_ego {
                smp.x -= shift * smp.heading.sin();
                smp.y += shift * smp.heading.cos();
            }
        }
        if let Some(ch) = &mut a.signals {
            ch.iter_mut().for_each(|e| e.0 *= k);
        }
        if let Some(ch) = &mut a.intents {
            ch.iter_mut().for_each(|e| e.0 *= k);
        }
        a.alerts.iter_mut().for_each(|e| e.0 *= k);
    }
    s
}

pub fn run(s: &Scenario, cfg: &ThresholdConfig) -> Report {
    evaluate_with(s, cfg, &RuleFilter::all(), Execution::Sequential)
}

pub fn violations(r: &Report) -> BTreeSet<String> {
    r.with_outcome(Outcome::Violation).map(|v| v.rule.clone()).collect()
}

/// A threshold value moved `amount` (a fraction) in its permissive direction,
/// or against it for negative amounts. `None` when the key has no direction or
/// the moved value is out of domain.
pub fn moved(base: &ThresholdConfig, key: &str, amount: f64) -> Option<ThresholdConfig> {
    let spec = THRESHOLD_SPECS.iter().find(|s| s.key == key)?;
    let value = base.get(key)?;
    let nudge = |v: f64, up: bool| {
        let delta = v.abs().max(1.0) * amount.abs();
        if up == (amount > 0.0) {
            v + delta
        } else {
            v - delta
        }
    };
    let new = match (spec.permissive, value) {
        (Permissive::Increase, ThresholdValue::Scalar(v)) => ThresholdValue::Scalar(nudge(v, true)),
        (Permissive::Decrease, ThresholdValue::Scalar(v)) => ThresholdValue::Scalar(nudge(v, false)),
        (Permissive::Widen, ThresholdValue::Range(lo, hi)) => {
            let w = (hi - lo).max(1.0) * amount;
            ThresholdValue::Range(lo - w, hi + w)
        }
        _ => return None,
    };
    let mut cfg = base.clone();
    cfg.set(key, new).ok()?;
    cfg.domain_errors().is_empty().then_some(cfg)
}

// ---------------------------------------------------------------------------
// Synthetic scenarios

pub const DT: f64 = 0.1;
pub const EGO: &str = "ego";

/// Eastbound straight lanes from `x0` to `x1`. Lane `Lk` is centred at
/// `y = -k * width`, so `L0` is leftmost and `L(k+1)` lies to the right of `Lk`.
pub fn straight_lanes(n: usize, width: f64, x0: f64, x1: f64) -> Vec<Lane> {
    (0..n)
        .map(|k| {
            let y = -(k as f64) * width;
            let line = Polyline::new(vec![Vec2::new(x0, y), Vec2::new(x1, y)]).unwrap();
            let left = (k > 0).then(|| format!("L{}", k - 1));
            let right = (k + 1 < n).then(|| format!("L{}", k + 1));
            Lane::new(format!("L{k}"), line, width, TravelDirection::Forward)
                .with_neighbours(left.as_deref(), right.as_deref())
        })
        .collect()
}

/// Trace sampled every 0.1 s up to `t_end` from `f(t) = (x, y, heading, speed)`.
pub fn sampled(
    id: &str,
    class: ActorClass,
    (length, width): (f64, f64),
    t_end: f64,
    f: impl Fn(f64) -> (f64, f64, f64, f64),
) -> ActorTrace {
    let mut a = ActorTrace::new(id, class, length, width);
    let n = (t_end / DT).round() as usize;
    a.samples = (0..=n)
        .map(|k| {
            let t = k as f64 * DT;
            let (x, y, h, v) = f(t);
            let mut s = Sample::new(t, x, y, h);
            s.speed = Some(v);
            s
        })
        .collect();
    a
}

/// 4.6 x 1.8 ego car without mirrors.
pub fn ego(t_end: f64, f: impl Fn(f64) -> (f64, f64, f64, f64)) -> ActorTrace {
    sampled(EGO, ActorClass::Car, (4.6, 1.8), t_end, f)
}

pub fn feature(id: &str, kind: FeatureKind, geometry: FeatureGeometry, lanes: &[&str]) -> RoadFeature {
    RoadFeature {
        id: id.to_string(),
        kind,
        geometry,
        lanes: lanes.iter().map(|s| s.to_string()).collect(),
        attributes: BTreeMap::new(),
    }
}

/// Line across an eastbound road at `x`, spanning `y0..y1`.
pub fn across(x: f64, y0: f64, y1: f64) -> FeatureGeometry {
    FeatureGeometry::Polyline(vec![Vec2::new(x, y0), Vec2::new(x, y1)])
}

pub fn synthetic(name: &str, lanes: Vec<Lane>, features: Vec<RoadFeature>, actors: Vec<ActorTrace>) -> Scenario {
    let s = Scenario {
        metadata: Metadata { name: name.to_string(), ..Metadata::default() },
        network: RoadNetwork::new(lanes, features).unwrap(),
        actors,
        ego: EGO.to_string(),
        speed_limit_kmh: None,
    };
    let problems = s.validate();
    assert!(problems.is_empty(), "{name}: {problems:?}");
    s
}

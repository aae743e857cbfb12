//! Built-in scenarios, generated from parametric traces so that both variants
//! stay consistent with the default thresholds.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use thiserror::Error;

use crate::geometry::{frenet_project, Polyline, Vec2};
use crate::road::{AttrValue, FeatureGeometry, FeatureKind, Lane, RoadFeature, RoadNetwork, TravelDirection};
use crate::scenario::{ActorClass, ActorTrace, Channel, Indicator, Intent, Metadata, Sample, Scenario};

pub const EXAMPLE_NAMES: [&str; 6] = [
    "slip-road",
    "discretionary-right-turn",
    "overtake-parked",
    "adjacent-wide-vehicle",
    "vegetation",
    "pedestrian-on-road",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Compliant,
    Violating,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Compliant, Variant::Violating];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Compliant => "compliant",
            Variant::Violating => "violating",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Variant::ALL.into_iter().find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown example '{0}' (expected one of: {names})", names = EXAMPLE_NAMES.join(", "))]
pub struct UnknownExample(pub String);

pub fn builtin_example(name: &str, variant: Variant) -> Result<Scenario, UnknownExample> {
    let violating = variant == Variant::Violating;
    let (description, network, actors) = match name {
        "slip-road" => slip_road(violating),
        "discretionary-right-turn" => right_turn(violating),
        "overtake-parked" => overtake_parked(violating),
        "adjacent-wide-vehicle" => adjacent_wide(violating),
        "vegetation" => vegetation(violating),
        "pedestrian-on-road" => pedestrian_on_road(violating),
        other => return Err(UnknownExample(other.to_string())),
    };
    Ok(Scenario {
        metadata: Metadata {
            name: format!("{name}-{variant}"),
            source: Some("built-in".to_string()),
            description: Some(description.to_string()),
        },
        network: RoadNetwork::new(network.0, network.1).expect("built-in network is valid"),
        actors,
        ego: EGO.to_string(),
        speed_limit_kmh: None,
    })
}

const EGO: &str = "ego";
const DT: f64 = 0.1;
const EGO_LENGTH: f64 = 4.6;
const EGO_WIDTH: f64 = 1.8;
const EGO_MIRRORS: f64 = 0.2;

fn kmh(v: f64) -> f64 {
    v / 3.6
}

fn v2(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

// ---------------------------------------------------------------------------
// Trace building blocks

/// Piecewise-linear speed over time, integrated exactly to distance.
#[derive(Debug, Clone)]
struct Profile {
    /// (t, s, v) knots.
    knots: Vec<(f64, f64, f64)>,
}

impl Profile {
    fn new(v0: f64) -> Self {
        Profile { knots: vec![(0.0, 0.0, v0)] }
    }

    fn last(&self) -> (f64, f64, f64) {
        *self.knots.last().expect("profile has a start knot")
    }

    /// Keeps the current speed until arc length `s_to`.
    fn cruise_to(mut self, s_to: f64) -> Self {
        let (t, s, v) = self.last();
        if s_to > s {
            self.knots.push((t + (s_to - s) / v, s_to, v));
        }
        self
    }

    /// Changes speed linearly in time, reaching `v1` at arc length `s_to`.
    fn ramp_to(mut self, v1: f64, s_to: f64) -> Self {
        let (t, s, v) = self.last();
        let d = s_to - s;
        self.knots.push((t + 2.0 * d / (v + v1), s_to, v1));
        self
    }

    /// Keeps the current speed for `secs`.
    fn hold(mut self, secs: f64) -> Self {
        let (t, s, v) = self.last();
        self.knots.push((t + secs, s + v * secs, v));
        self
    }

    fn end(&self) -> f64 {
        self.last().0
    }

    /// Arc length and speed at time `t`; past the last knot the final speed is kept.
    fn at(&self, t: f64) -> (f64, f64) {
        let k = self.knots.partition_point(|kn| kn.0 <= t);
        if k == 0 {
            let (_, s, v) = self.knots[0];
            return (s, v);
        }
        if k == self.knots.len() {
            let (t0, s0, v0) = self.last();
            return (s0 + v0 * (t - t0), v0);
        }
        let (t0, s0, v0) = self.knots[k - 1];
        let (t1, _, v1) = self.knots[k];
        let tau = t - t0;
        let a = (v1 - v0) / (t1 - t0);
        (s0 + v0 * tau + 0.5 * a * tau * tau, v0 + a * tau)
    }

    /// First time the trace reaches arc length `s`.
    fn time_at(&self, s: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, self.end() + 600.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.at(mid).0 < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// Dense path that a trace follows.
struct Path {
    line: Polyline,
}

impl Path {
    fn new(mut pts: Vec<Vec2>) -> Self {
        pts.dedup_by(|a, b| a.distance(*b) < 1e-6);
        Path { line: Polyline::new(pts).expect("generated path is valid") }
    }

    /// Arc length of the path point nearest to `p`.
    fn s_of(&self, p: Vec2) -> f64 {
        frenet_project(&self.line, p).s
    }

    fn pose(&self, s: f64) -> (Vec2, f64) {
        let a = self.line.point_at(s - 0.25);
        let b = self.line.point_at(s + 0.25);
        let dir = b - a;
        (self.line.point_at(s), dir.y.atan2(dir.x))
    }

    fn samples(&self, profile: &Profile, t_end: f64) -> Vec<Sample> {
        let n = (t_end / DT).round() as usize;
        (0..=n)
            .map(|k| {
                let t = k as f64 * DT;
                let (s, v) = profile.at(t);
                let (p, h) = self.pose(s);
                let mut smp = Sample::new(t, p.x, p.y, h);
                smp.speed = Some(v.max(0.0));
                smp
            })
            .collect()
    }
}

/// Cosine blend from `d0` to `d1` over `[s0, s1]`.
fn ease(s: f64, s0: f64, s1: f64, d0: f64, d1: f64) -> f64 {
    if s <= s0 {
        d0
    } else if s >= s1 {
        d1
    } else {
        let u = (s - s0) / (s1 - s0);
        d0 + (d1 - d0) * 0.5 * (1.0 - (PI * u).cos())
    }
}

/// Points along the line `y = y0` for `x0..=x1`, offset sideways by `d(x)`.
fn offset_points(x0: f64, x1: f64, y0: f64, d: impl Fn(f64) -> f64) -> Vec<Vec2> {
    let n = ((x1 - x0) / 0.5).ceil() as usize;
    (0..=n)
        .map(|k| {
            let x = x0 + (x1 - x0) * k as f64 / n as f64;
            v2(x, y0 + d(x))
        })
        .collect()
}

/// Circular arc starting at `start` with `heading`; positive `turn` bends left.
fn arc_points(start: Vec2, heading: f64, radius: f64, turn: f64) -> Vec<Vec2> {
    let side = turn.signum();
    let centre = start + Vec2::from_angle(heading + side * FRAC_PI_2) * radius;
    let n = ((radius * turn.abs()) / 0.25).ceil() as usize;
    (1..=n)
        .map(|k| {
            let a = heading - side * FRAC_PI_2 + turn * k as f64 / n as f64;
            centre + Vec2::from_angle(a) * radius
        })
        .collect()
}

fn ray_points(from: Vec2, heading: f64, length: f64) -> Vec<Vec2> {
    let n = (length / 0.5).ceil() as usize;
    (1..=n).map(|k| from + Vec2::from_angle(heading) * (length * k as f64 / n as f64)).collect()
}

fn ego_trace(samples: Vec<Sample>, signals: Channel<Indicator>) -> ActorTrace {
    let mut a = ActorTrace::new(EGO, ActorClass::Car, EGO_LENGTH, EGO_WIDTH);
    a.mirror_extra = EGO_MIRRORS;
    a.samples = samples;
    a.signals = Some(signals);
    a
}

fn moving(id: &str, class: ActorClass, size: (f64, f64), samples: Vec<Sample>) -> ActorTrace {
    let mut a = ActorTrace::new(id, class, size.0, size.1);
    a.samples = samples;
    if class.is_motor_vehicle() {
        a.signals = Some(vec![(0.0, Indicator::Off)]);
    }
    a
}

/// A road user that does not move for the whole recording.
fn standing(id: &str, class: ActorClass, size: (f64, f64), at: Vec2, heading: f64, t_end: f64) -> ActorTrace {
    let sample = |t: f64| {
        let mut s = Sample::new(t, at.x, at.y, heading);
        s.speed = Some(0.0);
        s
    };
    let mut a = ActorTrace::new(id, class, size.0, size.1);
    a.samples = if class == ActorClass::StaticObstacle { vec![sample(0.0)] } else { vec![sample(0.0), sample(t_end)] };
    a
}

fn lane(id: &str, pts: &[(f64, f64)], width: f64) -> Lane {
    let line = Polyline::new(pts.iter().map(|&(x, y)| v2(x, y)).collect()).expect("lane centerline is valid");
    Lane::new(id, line, width, TravelDirection::Forward)
}

fn feature(id: &str, kind: FeatureKind, geometry: FeatureGeometry, lanes: &[&str]) -> RoadFeature {
    RoadFeature {
        id: id.to_string(),
        kind,
        geometry,
        lanes: lanes.iter().map(|s| s.to_string()).collect(),
        attributes: BTreeMap::new(),
    }
}

fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> FeatureGeometry {
    FeatureGeometry::Polygon(vec![v2(x0, y0), v2(x1, y0), v2(x1, y1), v2(x0, y1)])
}

type Built = (&'static str, (Vec<Lane>, Vec<RoadFeature>), Vec<ActorTrace>);

// ---------------------------------------------------------------------------
// slip-road

/// Eastbound two-lane road with a left slip road at x = 0. The ego follows a
/// cyclist, overtakes it, returns to the kerbside lane and turns into the slip
/// road, where it stops for a pedestrian at a zebra crossing and then creeps
/// up to the give-way line behind an occluding truck.
fn slip_road(violating: bool) -> Built {
    let (c, s) = (FRAC_PI_4.cos(), FRAC_PI_4.sin());
    let (e1, e2) = (v2(c, s), v2(-s, c));
    // Slip-road lane leaves the kerbside lane centreline at 45 degrees.
    let corner = v2(17.77, 0.0);
    let sp = |u: f64, v: f64| corner + e1 * u + e2 * v;
    let (stop_u, zebra_u, give_way_u) = (45.0, (46.0, 50.0), 52.5);

    let lanes = vec![
        lane("A", &[(-300.0, 0.0), (58.0, 0.0)], 3.5).with_neighbours(None, Some("B")).with_kerb(0.0),
        lane("B", &[(-300.0, -3.5), (58.0, -3.5)], 3.5).with_neighbours(Some("A"), None),
        {
            let (a, b) = (sp(0.0, 0.0), sp(58.0, 0.0));
            lane("S", &[(a.x, a.y), (b.x, b.y)], 3.5).with_kerb(0.0)
        },
        lane("M", &[(61.5, -40.0), (61.5, 120.0)], 3.5).with_kerb(0.0),
    ];
    let across = |u: f64| FeatureGeometry::Polyline(vec![sp(u, -1.75), sp(u, 1.75)]);
    let mut give_way = feature("give-way-S", FeatureKind::GiveWayLine, across(give_way_u), &["S"]);
    give_way.attributes.insert(
        "approach_region".to_string(),
        AttrValue::Points(vec![[59.75, 5.0], [63.25, 5.0], [63.25, 20.0], [59.75, 20.0]]),
    );
    let features = vec![
        feature("slip-entry", FeatureKind::SlipRoadEntry, FeatureGeometry::Point(v2(0.0, 1.75)), &["A"]),
        feature("stop-S", FeatureKind::StopLine, across(stop_u), &["S"]),
        feature(
            "zebra-S",
            FeatureKind::ZebraCrossing,
            FeatureGeometry::Polygon(vec![
                sp(zebra_u.0, -4.0),
                sp(zebra_u.1, -4.0),
                sp(zebra_u.1, 4.0),
                sp(zebra_u.0, 4.0),
            ]),
            &["S"],
        ),
        give_way,
    ];

    // Ego path: overtake through B, return to A, then the slip-road turn.
    let (x1, lc) = (-213.0, 40.0);
    let x2 = if violating { -29.0 } else { -75.0 };
    let turn_x = if violating { 12.7 } else { 1.2 };
    let radius = (corner.x - turn_x) / (FRAC_PI_4 / 2.0).tan();
    let mut pts = offset_points(-260.0, turn_x, 0.0, |x| {
        ease(x, x1, x1 + lc, 0.0, -3.5) + ease(x, x2, x2 + lc, 0.0, 3.5)
    });
    pts.extend(arc_points(v2(turn_x, 0.0), 0.0, radius, FRAC_PI_4));
    let arc_end = *pts.last().unwrap();
    pts.extend(ray_points(arc_end, FRAC_PI_4, 70.0));
    let path = Path::new(pts);

    let s_x = |x: f64| path.s_of(v2(x, 0.0));
    let stop_centre = path.s_of(sp(stop_u - 0.8 - EGO_LENGTH / 2.0, 0.0));
    let give_way_centre = path.s_of(sp(give_way_u - 0.5 - EGO_LENGTH / 2.0, 0.0));
    let creep_mid = 0.5 * (stop_centre + give_way_centre);
    let wait = 6.5;
    let profile = Profile::new(kmh(30.0))
        .cruise_to(s_x(-70.0))
        .ramp_to(kmh(18.0), s_x(-20.0))
        .cruise_to(stop_centre - 12.0)
        .ramp_to(0.0, stop_centre)
        .hold(wait)
        .ramp_to(kmh(9.0), creep_mid)
        .ramp_to(0.0, give_way_centre)
        .hold(4.0);
    let t_end = profile.end();
    let t_stop = profile.time_at(stop_centre);
    let t_turn_end = profile.time_at(path.s_of(arc_end));
    let signals = vec![
        (0.0, Indicator::Off),
        (1.0, Indicator::Right),
        (profile.time_at(s_x(x1 + lc)) + 1.0, Indicator::Off),
        (profile.time_at(s_x(x2)) - 4.5, Indicator::Left),
        (t_turn_end + 1.0, Indicator::Off),
    ];
    let ego = ego_trace(path.samples(&profile, t_end), signals);

    let cyclist_path = Path::new(vec![v2(-220.0, 0.5), v2(200.0, 0.5)]);
    let cyclist = moving(
        "cyclist",
        ActorClass::Cyclist,
        (1.8, 0.6),
        cyclist_path.samples(&Profile::new(kmh(15.0)), t_end),
    );

    // Pedestrian steps off the far kerb a few seconds before the ego stops.
    let ped_path = Path::new(vec![sp(48.0, -8.0), sp(48.0, 9.0)]);
    let t_walk = t_stop - 4.0;
    let ped_profile = Profile::new(0.0)
        .hold(t_walk)
        .ramp_to(1.4, 0.7)
        .cruise_to(16.3)
        .ramp_to(0.0, 17.0);
    let t_across = ped_profile.time_at(12.3);
    let mut ped = moving("pedestrian", ActorClass::Pedestrian, (0.5, 0.5), ped_path.samples(&ped_profile, t_end));
    ped.intents = Some(vec![
        (0.0, Intent::None),
        (t_walk - 1.0, Intent::Crossing),
        (t_across, Intent::MovingAway),
    ]);
    let mut cyclist = cyclist;
    cyclist.intents = Some(vec![(0.0, Intent::None)]);

    let truck = standing("truck", ActorClass::Truck, (8.0, 2.5), v2(54.6, 22.8), FRAC_PI_2, t_end);
    (
        "Kerbside lane with a left slip road: cyclist ahead, pedestrian at the zebra, truck blocking the view of the main road",
        (lanes, features),
        vec![ego, cyclist, ped, truck],
    )
}

// ---------------------------------------------------------------------------
// discretionary-right-turn

/// Dual right-turn pocket; the ego waits in the yellow box from the outer
/// pocket lane and turns across oncoming traffic into the matching lane.
fn right_turn(violating: bool) -> Built {
    let lanes = vec![
        lane("E", &[(-200.0, 3.5), (10.0, 3.5)], 3.5).with_neighbours(None, Some("P2")).with_kerb(0.0),
        lane("P2", &[(-200.0, 0.0), (10.0, 0.0)], 3.5).with_neighbours(Some("E"), Some("P1")),
        lane("P1", &[(-200.0, -3.5), (10.0, -3.5)], 3.5).with_neighbours(Some("P2"), None),
        lane("W1", &[(150.0, -7.0), (28.0, -7.0)], 3.5).with_neighbours(Some("W2"), None),
        lane("W2", &[(150.0, -10.5), (28.0, -10.5)], 3.5).with_neighbours(None, Some("W1")).with_kerb(0.0),
        lane("D1", &[(15.0, -12.25), (15.0, -200.0)], 3.5).with_neighbours(Some("D2"), None),
        lane("D2", &[(18.5, -12.25), (18.5, -200.0)], 3.5).with_neighbours(None, Some("D1")).with_kerb(0.0),
    ];
    let mut crossing = feature("crossing-D", FeatureKind::ZebraCrossing, rect(13.25, 20.25, -26.0, -22.0), &["D1", "D2"]);
    crossing.attributes.insert("signalized".to_string(), AttrValue::Bool(true));
    let features = vec![
        feature(
            "stop-east",
            FeatureKind::StopLine,
            FeatureGeometry::Polyline(vec![v2(0.0, 5.25), v2(0.0, -5.25)]),
            &["E", "P2", "P1"],
        ),
        feature("pocket", FeatureKind::RightTurnPocket, rect(-60.0, 0.0, -5.25, 1.75), &["P1", "P2"]),
        feature("yellow-box", FeatureKind::YellowBox, rect(1.0, 28.0, -12.25, 5.25), &["E", "P2", "P1"]),
        crossing,
    ];

    let (wait_x, radius) = (6.5, 12.0);
    let mut pts = offset_points(-120.0, wait_x, 0.0, |_| 0.0);
    pts.extend(arc_points(v2(wait_x, 0.0), 0.0, radius, -FRAC_PI_2));
    let arc_end = *pts.last().unwrap();
    pts.extend(ray_points(arc_end, -FRAC_PI_2, 80.0));
    let path = Path::new(pts);
    let s_wait = path.s_of(v2(wait_x, 0.0));
    let s_turn_end = path.s_of(arc_end);
    let wait = 5.0;
    let profile = Profile::new(kmh(40.0))
        .cruise_to(path.s_of(v2(-40.0, 0.0)))
        .ramp_to(0.0, s_wait)
        .hold(wait)
        .ramp_to(kmh(18.0), s_wait + 12.0)
        .cruise_to(s_turn_end + 10.0)
        .ramp_to(kmh(30.0), s_turn_end + 40.0)
        .hold(2.0);
    let t_end = profile.end();
    let t_go = profile.time_at(s_wait) + wait;
    let t_turn_end = profile.time_at(s_turn_end);
    let signals = vec![(0.0, Indicator::Right), (t_turn_end + 1.0, Indicator::Off)];
    let ego = ego_trace(path.samples(&profile, t_end), signals);

    // Oncoming traffic at 50 km/h in the median-side lane. The first car
    // clears the junction while the ego waits; the ego turns ahead of the second.
    let v = kmh(50.0);
    let oncoming = |id: &str, x_at: f64, t_at: f64| {
        let x0 = x_at + v * t_at;
        let p = Path::new(vec![v2(x0, -7.0), v2(x0 - 2000.0, -7.0)]);
        moving(id, ActorClass::Car, (4.6, 1.8), p.samples(&Profile::new(v), t_end))
    };
    let first = oncoming("oncoming-1", 19.0, t_go - 1.5);
    let margin = if violating { 1.4 } else { 2.6 };
    // Front of the second car this far from the swept turn area when the turn ends.
    let second = oncoming("oncoming-2", 19.6 + 2.3 + margin * v, t_turn_end);
    (
        "Right turn from the outer lane of a dual right-turn pocket, waiting in the yellow box for a gap in oncoming traffic",
        (lanes, features),
        vec![ego, first, second],
    )
}

// ---------------------------------------------------------------------------
// overtake-parked

/// Two-way road; the ego passes a car parked in its kerbside lane without
/// leaving the lane, at 1.0 m clearance.
fn overtake_parked(violating: bool) -> Built {
    let lanes = vec![
        lane("A", &[(-200.0, 0.0), (200.0, 0.0)], 4.5).with_neighbours(None, Some("B")).with_kerb(1.0),
        lane("B", &[(200.0, -4.0), (-200.0, -4.0)], 3.5).with_neighbours(None, Some("A")).with_kerb(0.0),
    ];
    let path = Path::new(offset_points(-120.0, 120.0, 0.0, |x| {
        ease(x, -35.0, -15.0, -0.5, -1.3) + ease(x, 15.0, 35.0, 0.0, 0.8)
    }));
    let s_x = |x: f64| path.s_of(v2(x, 0.0));
    let profile = if violating {
        Profile::new(kmh(38.0))
    } else {
        Profile::new(kmh(40.0))
            .cruise_to(s_x(-60.0))
            .ramp_to(kmh(25.0), s_x(-25.0))
            .cruise_to(s_x(20.0))
            .ramp_to(kmh(40.0), s_x(60.0))
    };
    let t_end = profile.time_at(s_x(110.0));
    let ego = ego_trace(path.samples(&profile, t_end), vec![(0.0, Indicator::Off)]);
    let parked = standing("parked-car", ActorClass::Car, (4.6, 1.8), v2(0.0, 1.6), 0.0, t_end);
    ("Car parked in the kerbside lane of a two-way road, passed within the lane", (lanes, vec![]), vec![ego, parked])
}

// ---------------------------------------------------------------------------
// adjacent-wide-vehicle

/// A slow wide bus hugs the lane line; the ego passes it in the kerbside lane.
fn adjacent_wide(violating: bool) -> Built {
    let lanes = vec![
        lane("A", &[(-100.0, 0.0), (300.0, 0.0)], 3.5).with_neighbours(None, Some("B")).with_kerb(0.0),
        lane("B", &[(-100.0, -3.5), (300.0, -3.5)], 3.5).with_neighbours(Some("A"), None),
    ];
    let (bus_len, bus_v) = (12.0, kmh(20.0));
    let ego_v = kmh(if violating { 30.0 } else { 23.0 });
    let x0 = -bus_len / 2.0 - 3.0 - EGO_LENGTH / 2.0;
    let t_end = (bus_len + EGO_LENGTH + 6.0) / (ego_v - bus_v);
    let path = Path::new(vec![v2(x0, -0.3), v2(x0 + 1000.0, -0.3)]);
    let ego = ego_trace(path.samples(&Profile::new(ego_v), t_end), vec![(0.0, Indicator::Off)]);
    let bus_path = Path::new(vec![v2(0.0, -3.2), v2(1000.0, -3.2)]);
    let bus = moving("bus", ActorClass::Bus, (bus_len, 2.6), bus_path.samples(&Profile::new(bus_v), t_end));
    ("Slow wide bus close to the lane line in the adjacent lane", (lanes, vec![]), vec![ego, bus])
}

// ---------------------------------------------------------------------------
// vegetation

/// Overgrown vegetation intrudes into the kerbside lane; the ego straddles
/// the lane line to keep clear of it.
fn vegetation(violating: bool) -> Built {
    let lanes = vec![
        lane("A", &[(-150.0, 0.0), (250.0, 0.0)], 3.5).with_neighbours(None, Some("B")).with_kerb(0.0),
        lane("B", &[(-150.0, -3.5), (250.0, -3.5)], 3.5).with_neighbours(Some("A"), None),
    ];
    let features = vec![feature("hedge", FeatureKind::VegetationStrip, rect(0.0, 40.0, 0.35, 3.0), &["A"])];
    let (out_at, back_at) = if violating { (-45.0, 65.0) } else { (-25.0, 45.0) };
    let path = Path::new(offset_points(-120.0, 160.0, 0.0, |x| {
        ease(x, out_at, out_at + 20.0, 0.0, -1.2) + ease(x, back_at, back_at + 20.0, 0.0, 1.2)
    }));
    let profile = Profile::new(kmh(30.0));
    let t_end = profile.time_at(path.s_of(v2(150.0, 0.0)));
    let ego = ego_trace(path.samples(&profile, t_end), vec![(0.0, Indicator::Off)]);
    ("Vegetation intruding into the kerbside lane", (lanes, features), vec![ego])
}

// ---------------------------------------------------------------------------
// pedestrian-on-road

/// A pedestrian waits on the centre line halfway across; a cone at the kerb
/// leaves the ego no room to move further away.
fn pedestrian_on_road(violating: bool) -> Built {
    let lanes = vec![
        lane("A", &[(-150.0, 0.0), (150.0, 0.0)], 3.5).with_neighbours(None, Some("B")).with_kerb(0.0),
        lane("B", &[(150.0, -3.5), (-150.0, -3.5)], 3.5).with_neighbours(None, Some("A")).with_kerb(0.0),
    ];
    let profile = Profile::new(kmh(if violating { 35.0 } else { 20.0 }));
    let path = Path::new(vec![v2(-100.0, -0.05), v2(200.0, -0.05)]);
    let t_end = profile.time_at(path.s_of(v2(80.0, -0.05)));
    let ego = ego_trace(path.samples(&profile, t_end), vec![(0.0, Indicator::Off)]);
    let mut ped = standing("pedestrian", ActorClass::Pedestrian, (0.5, 0.5), v2(0.0, -1.95), -FRAC_PI_2, t_end);
    ped.intents = Some(vec![(0.0, Intent::Crossing)]);
    let cone = standing("cone", ActorClass::StaticObstacle, (0.5, 0.4), v2(0.0, 1.7), 0.0, t_end);
    ("Pedestrian standing on the centre line with a cone at the kerb", (lanes, vec![]), vec![ego, ped, cone])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_integrates_ramps() {
        let p = Profile::new(10.0).cruise_to(100.0).ramp_to(0.0, 150.0).hold(2.0);
        assert!((p.at(10.0).0 - 100.0).abs() < 1e-9);
        assert!((p.at(20.0).0 - 150.0).abs() < 1e-9);
        assert_eq!(p.at(21.0), (150.0, 0.0));
        assert!((p.time_at(125.0) - p.knots[1].0 - 2.9289).abs() < 1e-3);
    }

    #[test]
    fn unknown_name_is_rejected() {
        assert_eq!(builtin_example("roundabout", Variant::Compliant).unwrap_err(), UnknownExample("roundabout".into()));
        assert_eq!(Variant::parse("Violating"), Some(Variant::Violating));
        assert_eq!(Variant::parse("bad"), None);
    }

    #[test]
    fn every_example_validates() {
        for name in EXAMPLE_NAMES {
            for v in Variant::ALL {
                let s = builtin_example(name, v).unwrap();
                assert!(s.validate().is_empty(), "{name} {v}: {:?}", s.validate());
            }
        }
    }
}

//! Maneuver segmentation over the ego trace.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::ThresholdConfig;
use crate::geometry::{angle_diff, lateral_clearance_along, Polyline, Vec2};
use crate::metrics::distance::car_length_rule;
use crate::metrics::tracks::Tracks;
use crate::metrics::ttc::ttc_conflict_point;
use crate::road::{feature_near_edge, FeatureKind};
use crate::scenario::{ActorClass, Indicator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManeuverKind {
    LaneChange,
    Overtake,
    SlipRoadEntry,
    RightTurn,
    LeftTurn,
    StopAtLine,
    Straddle,
    Weave,
    PassAdjacent,
    PassParked,
    Stuck,
}

impl ManeuverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ManeuverKind::LaneChange => "lane_change",
            ManeuverKind::Overtake => "overtake",
            ManeuverKind::SlipRoadEntry => "slip_road_entry",
            ManeuverKind::RightTurn => "right_turn",
            ManeuverKind::LeftTurn => "left_turn",
            ManeuverKind::StopAtLine => "stop_at_line",
            ManeuverKind::Straddle => "straddle",
            ManeuverKind::Weave => "weave",
            ManeuverKind::PassAdjacent => "pass_adjacent",
            ManeuverKind::PassParked => "pass_parked",
            ManeuverKind::Stuck => "stuck",
        }
    }

    pub fn is_turn(self) -> bool {
        matches!(self, ManeuverKind::SlipRoadEntry | ManeuverKind::RightTurn | ManeuverKind::LeftTurn)
    }
}

impl fmt::Display for ManeuverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A detected maneuver. Numeric measurements live in `attributes`
/// (flags are 0/1), identifiers in `tags`. An absent attribute means the
/// quantity could not be measured.
///
/// Attributes by kind:
/// - lane_change: `crossing_t`, `signal_lead_s`, `continuous`, `max_reversal_m`,
///   `peak_lat_accel`, `peak_lat_jerk`, `rear_gap_m`, `rear_speed_kmh`,
///   `rear_closure_ms`, `rear_ttc_s`; tags `from_lane`, `to_lane`, `side`, `signal`
/// - overtake: `parked`, `open`, `dwell_s`, `pull_in_lead_lengths`, `min_clearance_m`,
///   `return_ttc_s`, `junction_lead_s`; tags `passed_actor`
/// - slip_road_entry / left_turn / right_turn: `entry_offset_m`, `signal_lead_s`,
///   `completion_ttc_s`, `origin_index`, `target_index`; tags `from_lane`, `to_lane`
/// - stop_at_line: `line_distance_m`; tags `feature`, `feature_kind`, `lane`
/// - straddle: `path_length_m`, `adjacent_occupied`; tags `primary_lane`, `secondary_lane`
/// - weave: `reversals`, `max_swing_m`
/// - pass_adjacent / pass_parked: `min_clearance_m`, `ego_max_speed_kmh`,
///   `ego_mean_speed_kmh`, `actor_mean_speed_kmh`, `speed_ratio`
/// - stuck: `stuck_s`, `alert_present`, `alert_delay_s`; tags `blocker`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManeuverEvent {
    pub kind: ManeuverKind,
    pub start: f64,
    pub end: f64,
    #[serde(default)]
    pub actors: Vec<String>,
    #[serde(default)]
    pub attributes: BTreeMap<String, f64>,
    #[serde(default)]
    pub tags: BTreeMap<String, String>,
}

impl ManeuverEvent {
    fn new(kind: ManeuverKind, start: f64, end: f64) -> Self {
        ManeuverEvent { kind, start, end, actors: Vec::new(), attributes: BTreeMap::new(), tags: BTreeMap::new() }
    }

    fn set(&mut self, key: &str, v: f64) {
        self.attributes.insert(key.to_string(), v);
    }

    fn tag(&mut self, key: &str, v: impl Into<String>) {
        self.tags.insert(key.to_string(), v.into());
    }

    pub fn attr(&self, key: &str) -> Option<f64> {
        self.attributes.get(key).copied()
    }

    pub fn flag(&self, key: &str) -> bool {
        self.attr(key).is_some_and(|v| v != 0.0)
    }

    pub fn tag_value(&self, key: &str) -> Option<&str> {
        self.tags.get(key).map(String::as_str)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.start, self.end)
    }
}

/// Lateral acceleration limits are stated for this speed band (km/h).
pub const LAT_ACCEL_SPEED_BAND: (f64, f64) = (10.0, 60.0);

/// Coverage at which the footprint counts as fully inside the target lane.
const ENCLOSED: f64 = 0.999;

/// Two same-direction yaw runs separated by less than this merge into one turn.
const TURN_MERGE_GAP: f64 = 1.0;

/// Stops farther than this before a line are not attributed to it.
const LINE_APPROACH: f64 = 10.0;

/// Blockers farther ahead than this do not make the ego stuck.
const STUCK_LOOKAHEAD: f64 = 15.0;

/// Oncoming traffic is assumed to keep straight on this far past the end of its lane (m).
const JUNCTION_CARRY: f64 = 60.0;

/// Time an alert may trail the stuck threshold.
const ALERT_GRACE: f64 = 1.0;

fn side_of(sign: f64) -> Indicator {
    if sign > 0.0 {
        Indicator::Left
    } else {
        Indicator::Right
    }
}

/// Time at which `side` was switched on if it is active at `t`.
pub fn indicator_activation(ch: &[(f64, Indicator)], side: Indicator, t: f64) -> Option<f64> {
    let mut since = None;
    let mut state = Indicator::Off;
    for &(ti, v) in ch.iter().take_while(|(ti, _)| *ti <= t) {
        if v == side && state != side {
            since = Some(ti);
        } else if v != side {
            since = None;
        }
        state = v;
    }
    (state == side).then_some(since).flatten()
}

/// First time in `(t0, t1]` at which `side` is switched on.
pub fn first_activation_in(ch: &[(f64, Indicator)], side: Indicator, t0: f64, t1: f64) -> Option<f64> {
    let mut state = Indicator::Off;
    for &(ti, v) in ch {
        if ti > t1 {
            break;
        }
        if ti > t0 && v == side && state != side {
            return Some(ti);
        }
        state = v;
    }
    None
}

/// Seconds between indicator activation and `t_ref`; negative when the
/// indicator came on after `t_ref` but before `t_limit`.
pub fn signal_lead(ch: &[(f64, Indicator)], side: Indicator, t_ref: f64, t_limit: f64) -> Option<f64> {
    indicator_activation(ch, side, t_ref)
        .or_else(|| first_activation_in(ch, side, t_ref, t_limit))
        .map(|a| t_ref - a)
}

/// Maximal inclusive index runs where `pred` holds.
pub fn runs(n: usize, pred: impl Fn(usize) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for i in 0..n {
        match (pred(i), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, n - 1));
    }
    out
}

fn is_road_user(c: ActorClass) -> bool {
    c != ActorClass::Pedestrian && c != ActorClass::StaticObstacle
}

struct LaneChange {
    onset: usize,
    crossing: usize,
    end: usize,
    from: usize,
    to: usize,
    sign: f64,
}

pub struct Detector<'t, 'a> {
    tr: &'t Tracks<'a>,
    cfg: &'t ThresholdConfig,
}

impl<'t, 'a> Detector<'t, 'a> {
    pub fn new(tr: &'t Tracks<'a>, cfg: &'t ThresholdConfig) -> Self {
        Detector { tr, cfg }
    }

    /// Runs every detector; events are ordered by (start, kind).
    pub fn detect_all(&self) -> Vec<ManeuverEvent> {
        let changes = self.lane_change_spans();
        let mut events: Vec<ManeuverEvent> = changes.iter().map(|c| self.lane_change_event(c)).collect();
        events.extend(self.overtakes(&changes));
        let turns = self.turn_spans();
        events.extend(turns.iter().filter_map(|&t| self.turn_event(t)));
        let stops = self.stops();
        let busy: Vec<(usize, usize)> = changes
            .iter()
            .map(|c| (c.onset, c.end))
            .chain(turns.iter().map(|t| (t.0, t.1)))
            .collect();
        events.extend(self.straddles(&busy));
        events.extend(self.weaves(&busy));
        events.extend(self.passes());
        events.extend(self.stuck(&stops));
        events.extend(stops);
        sort_events(&mut events);
        events
    }

    fn lateral(&self, lane: usize) -> Vec<f64> {
        (0..self.tr.len()).map(|i| self.tr.frenet(lane, i).1).collect()
    }

    fn lane_change_spans(&self) -> Vec<LaneChange> {
        let tr = self.tr;
        let net = tr.network();
        let n = tr.len();
        let dt = tr.dt();
        let thr = self.cfg.lane_change_lateral_speed;
        let crossings: Vec<usize> = (1..n)
            .filter(|&i| match (tr.lane[i - 1], tr.lane[i]) {
                (Some(a), Some(b)) => a != b && net.are_adjacent(a, b),
                _ => false,
            })
            .collect();
        let mut out: Vec<LaneChange> = Vec::new();
        for (ci, &c) in crossings.iter().enumerate() {
            let (from, to) = (tr.lane[c - 1].unwrap(), tr.lane[c].unwrap());
            let d = self.lateral(from);
            let sign = if d[c] >= 0.0 { 1.0 } else { -1.0 };
            let v = |k: usize| {
                let (lo, hi) = (k.saturating_sub(1), (k + 1).min(n - 1));
                sign * (d[hi] - d[lo]) / ((hi - lo).max(1) as f64 * dt)
            };
            let floor = out.last().map_or(0, |p| p.end + 1);
            let mut onset = c;
            while onset > floor && v(onset - 1) > thr {
                onset -= 1;
            }
            let limit = crossings.get(ci + 1).map_or(n - 1, |&nx| nx - 1);
            let settle = (c..=limit).find(|&k| v(k) <= thr).unwrap_or(limit);
            let enclosed = (c..=limit).find(|&k| tr.coverage[k][to] >= ENCLOSED);
            let end = enclosed.map_or(settle, |e| e.max(settle)).min(limit);
            // A crossing without sustained sideways motion is boundary jitter.
            if tr.time(settle) - tr.time(onset.min(c)) < self.cfg.lane_change_sustain - 1e-9 {
                continue;
            }
            out.push(LaneChange { onset: onset.min(c), crossing: c, end, from, to, sign });
        }
        out
    }

    fn lane_change_event(&self, lc: &LaneChange) -> ManeuverEvent {
        let tr = self.tr;
        let net = tr.network();
        let mut ev = ManeuverEvent::new(ManeuverKind::LaneChange, tr.time(lc.onset), tr.time(lc.end));
        ev.tag("from_lane", net.lanes[lc.from].id.clone());
        ev.tag("to_lane", net.lanes[lc.to].id.clone());
        let side = side_of(lc.sign);
        ev.tag("side", if lc.sign > 0.0 { "left" } else { "right" });
        ev.set("crossing_t", tr.time(lc.crossing));
        match &tr.ego.signals {
            None => ev.tag("signal", "unavailable"),
            Some(ch) => {
                if let Some(lead) = signal_lead(ch, side, ev.start, ev.end) {
                    ev.set("signal_lead_s", lead);
                }
            }
        }
        // Largest retreat from the furthest progress towards the target lane.
        let d = self.lateral(lc.from);
        let mut best = f64::NEG_INFINITY;
        let mut reversal: f64 = 0.0;
        for k in lc.onset..=lc.end {
            let p = lc.sign * d[k];
            best = best.max(p);
            reversal = reversal.max(best - p);
        }
        ev.set("max_reversal_m", reversal);
        ev.set("continuous", if reversal > self.cfg.continuity_reversal { 0.0 } else { 1.0 });
        let in_band = |k: usize| {
            let v = tr.speed_kmh(k);
            v >= LAT_ACCEL_SPEED_BAND.0 && v <= LAT_ACCEL_SPEED_BAND.1
        };
        let accel = (lc.onset..=lc.end).filter(|&k| in_band(k)).map(|k| tr.kin.lat_accel[k].abs()).reduce(f64::max);
        let jerk = (lc.onset..=lc.end)
            .filter(|&k| in_band(k))
            .filter_map(|k| tr.kin.lat_jerk[k].map(f64::abs))
            .reduce(f64::max);
        if let Some(a) = accel {
            ev.set("peak_lat_accel", a);
        }
        if let Some(j) = jerk {
            ev.set("peak_lat_jerk", j);
        }
        // Rear traffic in the target lane when the body first enters it.
        let entry = (lc.onset..=lc.end).find(|&k| tr.coverage[k][lc.to] > 0.0).unwrap_or(lc.crossing);
        let ego = tr.state(entry);
        let mut rear: Option<(usize, f64)> = None;
        for (j, a) in tr.actors.iter().enumerate() {
            if a.parked || !is_road_user(a.class()) || tr.actor_lane(j, entry) != Some(lc.to) {
                continue;
            }
            let (Some(st), Some((ahead, _))) = (tr.actor_state(j, entry), tr.relative(j, entry)) else { continue };
            if ahead >= 0.0 || st.pose.forward().dot(ego.pose.forward()) <= 0.0 {
                continue;
            }
            if rear.map_or(true, |(_, best)| ahead > best) {
                rear = Some((j, ahead));
            }
        }
        if let Some((j, ahead)) = rear {
            let a = &tr.actors[j];
            let st = tr.actor_state(j, entry).unwrap();
            let gap = -ahead - (tr.ego.length + a.trace.length) / 2.0;
            let closure = st.speed * st.pose.forward().dot(ego.pose.forward()) - ego.speed;
            ev.set("rear_gap_m", gap);
            ev.set("rear_speed_kmh", st.speed * 3.6);
            ev.set("rear_closure_ms", closure);
            if closure > 0.0 {
                ev.set("rear_ttc_s", gap.max(0.0) / closure);
            }
            ev.actors.push(a.id().to_string());
            ev.tag("rear_actor", a.id());
        }
        ev
    }

    fn overtakes(&self, changes: &[LaneChange]) -> Vec<ManeuverEvent> {
        let tr = self.tr;
        let net = tr.network();
        let n = tr.len();
        let mut out = Vec::new();
        let mut used = vec![false; changes.len()];
        for (xi, x) in changes.iter().enumerate() {
            if used[xi] {
                continue;
            }
            let ret = changes.iter().enumerate().skip(xi + 1).find(|(_, y)| y.from == x.to && y.to == x.from);
            let done = ret.map_or(n - 1, |(_, y)| y.end);
            // Nearest actor ahead in the original lane that ends up behind the ego.
            let passed = tr
                .actors
                .iter()
                .enumerate()
                .filter(|(j, a)| a.class() != ActorClass::Pedestrian && tr.actor_lane(*j, x.onset) == Some(x.from))
                .filter_map(|(j, _)| {
                    let (ahead0, _) = tr.relative(j, x.onset)?;
                    let (ahead1, _) = tr.relative(j, done)?;
                    (ahead0 > 0.0 && ahead1 < 0.0).then_some((j, ahead0))
                })
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let Some((j, _)) = passed else { continue };
            let a = &tr.actors[j];
            let mut ev = ManeuverEvent::new(ManeuverKind::Overtake, tr.time(x.onset), tr.time(done));
            ev.actors.push(a.id().to_string());
            ev.tag("passed_actor", a.id());
            ev.tag("from_lane", net.lanes[x.from].id.clone());
            ev.tag("via_lane", net.lanes[x.to].id.clone());
            ev.set("parked", if a.parked { 1.0 } else { 0.0 });
            if let Some(c) = (x.onset..=done).filter_map(|k| tr.alongside(j, k)).reduce(f64::min) {
                ev.set("min_clearance_m", c);
            }
            match ret {
                None => ev.set("open", 1.0),
                Some((yi, y)) => {
                    used[yi] = true;
                    ev.set("open", 0.0);
                    ev.set("dwell_s", tr.time(y.crossing) - tr.time(x.crossing));
                    if let Some((ahead, _)) = tr.relative(j, y.onset) {
                        let lead = -ahead - (tr.ego.length + a.trace.length) / 2.0;
                        ev.set("pull_in_lead_lengths", lead / tr.ego.length);
                    }
                    let exit = (y.crossing..=y.end).find(|&k| tr.coverage[k][x.to] <= 0.0).unwrap_or(y.end);
                    if let Some(t) = self.oncoming_ttc(exit, x.to) {
                        ev.set("return_ttc_s", t);
                    }
                    if let Some(t) = self.junction_lead(x.from, x.onset, y.end) {
                        ev.set("junction_lead_s", t);
                    }
                }
            }
            out.push(ev);
        }
        out
    }

    /// Smallest head-on TTC to actors travelling against the ego in `lane`.
    fn oncoming_ttc(&self, i: usize, lane: usize) -> Option<f64> {
        let tr = self.tr;
        let ego = tr.state(i);
        tr.actors
            .iter()
            .enumerate()
            .filter(|(j, a)| !a.parked && is_road_user(a.class()) && tr.actor_lane(*j, i) == Some(lane))
            .filter_map(|(j, a)| {
                let st = tr.actor_state(j, i)?;
                let (ahead, _) = tr.relative(j, i)?;
                let along = st.speed * st.pose.forward().dot(ego.pose.forward());
                if ahead <= 0.0 || st.pose.forward().dot(ego.pose.forward()) >= 0.0 {
                    return None;
                }
                let gap = ahead - (tr.ego.length + a.trace.length) / 2.0;
                let closure = ego.speed - along;
                (closure > 0.0).then(|| gap.max(0.0) / closure)
            })
            .reduce(f64::min)
    }

    /// Seconds from `done` until the ego front reaches the next slip-road or
    /// junction entry on `lane` that lay ahead at `from`.
    fn junction_lead(&self, lane: usize, from: usize, done: usize) -> Option<f64> {
        let tr = self.tr;
        let l = &tr.network().lanes[lane];
        let front0 = tr.front_s(lane, from);
        let target = tr
            .network()
            .features
            .iter()
            .filter(|f| matches!(f.kind, FeatureKind::SlipRoadEntry | FeatureKind::JunctionEntry) && f.attached_to(&l.id))
            .map(|f| feature_near_edge(l, f))
            .filter(|&s| s > front0)
            .reduce(f64::min)?;
        let reach = (from..tr.len()).find(|&k| tr.front_s(lane, k) >= target)?;
        Some(tr.time(reach) - tr.time(done))
    }

    fn turn_spans(&self) -> Vec<(usize, usize, f64)> {
        let tr = self.tr;
        let n = tr.len();
        let thr = self.cfg.turn_yaw_rate;
        let yaw = |i: usize| tr.state(i).yaw_rate;
        let mut spans: Vec<(usize, usize, f64)> = Vec::new();
        for sign in [1.0, -1.0] {
            let mut rs = runs(n, |i| sign * yaw(i) > thr);
            let mut merged: Vec<(usize, usize)> = Vec::new();
            for r in rs.drain(..) {
                if let Some(last) = merged.last_mut() {
                    let gap_ok = (r.0 - last.1) as f64 * tr.dt() <= TURN_MERGE_GAP
                        || (last.1 + 1..r.0).all(|k| tr.state(k).speed < self.cfg.stop_speed);
                    if gap_ok {
                        last.1 = r.1;
                        continue;
                    }
                }
                merged.push(r);
            }
            for (s, e) in merged {
                let dh = angle_diff(tr.state(e).pose.heading, tr.state(s).pose.heading);
                if sign * dh >= self.cfg.turn_min_heading {
                    spans.push((s, e, sign));
                }
            }
        }
        spans.sort_by_key(|s| s.0);
        spans
    }

    fn turn_event(&self, (s, e, sign): (usize, usize, f64)) -> Option<ManeuverEvent> {
        let tr = self.tr;
        let net = tr.network();
        let from = tr.lane[s]?;
        let settle = (tr.len() - 1).min(e + (3.0 / tr.dt()) as usize);
        let to = (e..=settle).filter_map(|k| tr.lane[k]).find(|&l| l != from)?;
        let l_from = &net.lanes[from];
        let slip = (sign > 0.0)
            .then(|| {
                net.features_of(FeatureKind::SlipRoadEntry)
                    .filter(|f| f.attached_to(&l_from.id))
                    .map(|f| tr.front_s(from, s) - feature_near_edge(l_from, f))
                    .filter(|off| off.abs() <= 30.0)
                    .min_by(|a, b| a.abs().total_cmp(&b.abs()))
            })
            .flatten();
        let kind = match (slip, sign > 0.0) {
            (Some(_), _) => ManeuverKind::SlipRoadEntry,
            (None, true) => ManeuverKind::LeftTurn,
            (None, false) => ManeuverKind::RightTurn,
        };
        let mut ev = ManeuverEvent::new(kind, tr.time(s), tr.time(e));
        ev.tag("from_lane", l_from.id.clone());
        ev.tag("to_lane", net.lanes[to].id.clone());
        ev.set("origin_index", net.index_from_median(from) as f64);
        ev.set("target_index", net.index_from_median(to) as f64);
        if let Some(off) = slip {
            ev.set("entry_offset_m", off);
        }
        match &tr.ego.signals {
            None => ev.tag("signal", "unavailable"),
            Some(ch) => {
                if let Some(lead) = signal_lead(ch, side_of(sign), ev.start, ev.end) {
                    ev.set("signal_lead_s", lead);
                }
            }
        }
        let region: Vec<Vec<Vec2>> = (s..=e).map(|k| tr.footprints[k].polygon()).collect();
        let heading0 = tr.state(s).pose.forward();
        let mut best: Option<(f64, &str)> = None;
        for (j, a) in tr.actors.iter().enumerate() {
            if a.parked || !is_road_user(a.class()) {
                continue;
            }
            let (Some(st), Some(l)) = (tr.actor_state(j, e), tr.actor_lane(j, e)) else { continue };
            if st.pose.forward().dot(heading0) > -0.5 {
                continue;
            }
            let lane = &net.lanes[l];
            let front = a.trace.footprint(st.pose).front_center();
            let (sf, _) = lane.frenet(front);
            let (s_mid, _) = lane.frenet(st.pose.position());
            let v = st.speed * st.pose.forward().dot(lane.travel.tangent_at(s_mid.clamp(0.0, lane.length())));
            let mut pts = lane.travel.points().to_vec();
            let end = lane.travel.length();
            pts.push(lane.travel.point_at(end) + lane.travel.tangent_at(end) * JUNCTION_CARRY);
            let Ok(path) = Polyline::new(pts) else { continue };
            if let Some(t) = ttc_conflict_point(&region, &path, sf, v) {
                if best.map_or(true, |(b, _)| t < b) {
                    best = Some((t, a.id()));
                }
            }
        }
        if let Some((t, id)) = best {
            ev.set("completion_ttc_s", t);
            ev.actors.push(id.to_string());
            ev.tag("oncoming_actor", id);
        }
        Some(ev)
    }

    fn stops(&self) -> Vec<ManeuverEvent> {
        let tr = self.tr;
        let net = tr.network();
        let mut out = Vec::new();
        for &(i0, i1) in &tr.stationary {
            let mut best: Option<(f64, &str, FeatureKind, &str)> = None;
            for f in net.features.iter().filter(|f| matches!(f.kind, FeatureKind::StopLine | FeatureKind::GiveWayLine)) {
                for lid in &f.lanes {
                    let Some(l) = net.lane_index(lid) else { continue };
                    let lane = &net.lanes[l];
                    let (_, d) = tr.frenet(l, i0);
                    if d.abs() > lane.width / 2.0 {
                        continue;
                    }
                    let dist = feature_near_edge(lane, f) - tr.front_s(l, i0);
                    if dist < -tr.ego.length || dist > LINE_APPROACH {
                        continue;
                    }
                    if best.map_or(true, |b| dist.abs() < b.0.abs()) {
                        best = Some((dist, &f.id, f.kind, &lane.id));
                    }
                }
            }
            if let Some((dist, id, kind, lane)) = best {
                let mut ev = ManeuverEvent::new(ManeuverKind::StopAtLine, tr.time(i0), tr.time(i1));
                ev.set("line_distance_m", dist);
                ev.tag("feature", id);
                ev.tag("feature_kind", kind.as_str());
                ev.tag("lane", lane);
                out.push(ev);
            }
        }
        out
    }

    fn straddles(&self, busy: &[(usize, usize)]) -> Vec<ManeuverEvent> {
        let tr = self.tr;
        let net = tr.network();
        let cut = self.cfg.straddle_coverage;
        let min_len = (self.cfg.stop_min_duration / tr.dt()).ceil() as usize;
        let straddling = |i: usize| {
            let c = &tr.coverage[i];
            let max = c.iter().copied().fold(0.0, f64::max);
            let sum: f64 = c.iter().sum();
            !busy.iter().any(|&(a, b)| (a..=b).contains(&i))
                && max < cut
                && sum >= cut
                && c.iter().filter(|&&v| v > 0.05).count() >= 2
        };
        let mut out = Vec::new();
        for (i0, i1) in runs(tr.len(), straddling) {
            if i1 - i0 < min_len {
                continue;
            }
            let ranked = |i: usize| {
                let mut idx: Vec<usize> = (0..net.lanes.len()).collect();
                idx.sort_by(|&a, &b| tr.coverage[i][b].total_cmp(&tr.coverage[i][a]));
                (idx[0], idx[1])
            };
            let deepest = (i0..=i1)
                .max_by(|&a, &b| {
                    let (_, sa) = ranked(a);
                    let (_, sb) = ranked(b);
                    tr.coverage[a][sa].total_cmp(&tr.coverage[b][sb])
                })
                .unwrap_or(i0);
            let (primary, secondary) = ranked(deepest);
            let mut ev = ManeuverEvent::new(ManeuverKind::Straddle, tr.time(i0), tr.time(i1));
            ev.set("path_length_m", tr.path_length(i0, i1));
            ev.tag("primary_lane", net.lanes[primary].id.clone());
            ev.tag("secondary_lane", net.lanes[secondary].id.clone());
            let mut occupied = Vec::new();
            for (j, a) in tr.actors.iter().enumerate() {
                if a.parked || !is_road_user(a.class()) {
                    continue;
                }
                let near = (i0..=i1).any(|i| {
                    if tr.actor_lane(j, i) != Some(secondary) {
                        return false;
                    }
                    let (Some(st), Some((ahead, _))) = (tr.actor_state(j, i), tr.relative(j, i)) else { return false };
                    let ego = tr.state(i);
                    let closure = (st.speed - ego.speed).max(0.0);
                    let reach = car_length_rule(st.speed * 3.6, self.cfg.car_length_per_16kmh, self.cfg.car_length)
                        .max(self.cfg.rear_gap_ttc * closure)
                        .max(2.0 * ego.speed);
                    ahead.abs() < reach
                });
                if near {
                    occupied.push(a.id().to_string());
                }
            }
            ev.set("adjacent_occupied", if occupied.is_empty() { 0.0 } else { 1.0 });
            ev.actors = occupied;
            out.push(ev);
        }
        out
    }

    fn weaves(&self, busy: &[(usize, usize)]) -> Vec<ManeuverEvent> {
        let tr = self.tr;
        let h = self.cfg.weave_amplitude;
        let need = (self.cfg.weave_reversals.ceil() as usize).max(1);
        let free = |i: usize| tr.lane[i].is_some() && !busy.iter().any(|&(a, b)| (a..=b).contains(&i));
        let mut out: Vec<ManeuverEvent> = Vec::new();
        for (r0, r1) in runs(tr.len(), free) {
            // Split further wherever the reference lane changes.
            for (s0, s1) in runs(r1 - r0 + 1, |k| tr.lane[r0 + k] == tr.lane[r0]).into_iter().map(|(a, b)| (a + r0, b + r0)) {
                let l = tr.lane[s0].unwrap();
                let d: Vec<f64> = (s0..=s1).map(|i| tr.frenet(l, i).1).collect();
                let (pivots, swings) = zigzag(&d, h);
                let rev: Vec<(usize, f64)> = pivots.iter().skip(1).copied().zip(swings.iter().skip(1).copied()).collect();
                if rev.len() < need {
                    continue;
                }
                for w in rev.windows(need) {
                    let (a, b) = (s0 + w[0].0, s0 + w[need - 1].0);
                    if tr.time(b) - tr.time(a) > self.cfg.weave_window + 1e-9 {
                        continue;
                    }
                    let swing = w.iter().map(|x| x.1).fold(0.0, f64::max);
                    if let Some(last) = out.last_mut() {
                        if last.end >= tr.time(a) {
                            last.end = last.end.max(tr.time(b));
                            let r = last.attr("reversals").unwrap_or(0.0);
                            last.set("reversals", r.max(need as f64));
                            let m = last.attr("max_swing_m").unwrap_or(0.0);
                            last.set("max_swing_m", m.max(swing));
                            continue;
                        }
                    }
                    let mut ev = ManeuverEvent::new(ManeuverKind::Weave, tr.time(a), tr.time(b));
                    ev.set("reversals", need as f64);
                    ev.set("max_swing_m", swing);
                    out.push(ev);
                }
            }
        }
        out
    }

    fn passes(&self) -> Vec<ManeuverEvent> {
        let tr = self.tr;
        let net = tr.network();
        let mut out = Vec::new();
        for (j, a) in tr.actors.iter().enumerate() {
            if !a.class().is_motor_vehicle() {
                continue;
            }
            let kind = if a.parked { ManeuverKind::PassParked } else { ManeuverKind::PassAdjacent };
            let pred = |i: usize| {
                if tr.alongside(j, i).is_none() {
                    return false;
                }
                if a.parked {
                    return true;
                }
                match (tr.actor_lane(j, i), tr.lane[i]) {
                    (Some(la), Some(le)) => {
                        la != le && net.are_adjacent(la, le) && net.lanes[la].direction_matches(&net.lanes[le])
                    }
                    _ => false,
                }
            };
            for (i0, i1) in runs(tr.len(), pred) {
                let mut ev = ManeuverEvent::new(kind, tr.time(i0), tr.time(i1));
                ev.actors.push(a.id().to_string());
                let k = (i1 - i0 + 1) as f64;
                let min_c = (i0..=i1).filter_map(|i| tr.alongside(j, i)).fold(f64::INFINITY, f64::min);
                let ego_mean = (i0..=i1).map(|i| tr.state(i).speed).sum::<f64>() / k;
                let act_mean = (i0..=i1).filter_map(|i| tr.actor_state(j, i)).map(|s| s.speed).sum::<f64>() / k;
                ev.set("min_clearance_m", min_c);
                ev.set("ego_max_speed_kmh", (i0..=i1).map(|i| tr.speed_kmh(i)).fold(0.0, f64::max));
                ev.set("ego_mean_speed_kmh", ego_mean * 3.6);
                ev.set("actor_mean_speed_kmh", act_mean * 3.6);
                if act_mean > self.cfg.stop_speed {
                    ev.set("speed_ratio", ego_mean / act_mean);
                }
                out.push(ev);
            }
        }
        out
    }

    fn stuck(&self, stops: &[ManeuverEvent]) -> Vec<ManeuverEvent> {
        let tr = self.tr;
        let mut out = Vec::new();
        for &(i0, i1) in &tr.stationary {
            let dur = tr.time(i1) - tr.time(i0);
            if dur < self.cfg.stuck_alert {
                continue;
            }
            if stops.iter().any(|s| s.start <= tr.time(i0) && s.end >= tr.time(i0)) {
                continue;
            }
            let fp = &tr.footprints[i0];
            let profile = fp.profile_polygon();
            let blocker = tr.actors.iter().enumerate().find(|(j, a)| {
                let Some(poly) = tr.actor_polygon(*j, i0) else { return false };
                let Some((ahead, _)) = tr.relative(*j, i0) else { return false };
                let need = if a.class() == ActorClass::Pedestrian {
                    self.cfg.ped_clearance_exception
                } else {
                    self.cfg.fixed_obstacle_gap
                };
                ahead > 0.0
                    && ahead - tr.ego.length / 2.0 <= STUCK_LOOKAHEAD
                    && lateral_clearance_along(fp.pose.left(), &profile, poly) < need
            });
            let Some((_, a)) = blocker else { continue };
            let mut ev = ManeuverEvent::new(ManeuverKind::Stuck, tr.time(i0), tr.time(i1));
            ev.actors.push(a.id().to_string());
            ev.tag("blocker", a.id());
            ev.set("stuck_s", dur);
            let deadline = tr.time(i0) + self.cfg.stuck_alert + ALERT_GRACE;
            let alert = tr.ego.alerts.iter().map(|(t, _)| *t).find(|&t| t >= tr.time(i0) && t <= deadline);
            ev.set("alert_present", if alert.is_some() { 1.0 } else { 0.0 });
            if let Some(t) = alert {
                ev.set("alert_delay_s", t - tr.time(i0));
            }
            out.push(ev);
        }
        out
    }
}

/// Zigzag pivots of `d` with reversal threshold `h`: indices of confirmed
/// extremes and the swing leading into each.
fn zigzag(d: &[f64], h: f64) -> (Vec<usize>, Vec<f64>) {
    let mut pivots = Vec::new();
    let mut swings = Vec::new();
    if d.is_empty() {
        return (pivots, swings);
    }
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut dir = 0i8;
    let mut ext = 0usize;
    let mut last_pivot_val = d[0];
    for k in 1..d.len() {
        match dir {
            0 => {
                if d[k] < d[lo] {
                    lo = k;
                }
                if d[k] > d[hi] {
                    hi = k;
                }
                if d[k] - d[lo] > h {
                    pivots.push(lo);
                    swings.push(0.0);
                    last_pivot_val = d[lo];
                    dir = 1;
                    ext = k;
                } else if d[hi] - d[k] > h {
                    pivots.push(hi);
                    swings.push(0.0);
                    last_pivot_val = d[hi];
                    dir = -1;
                    ext = k;
                }
            }
            1 => {
                if d[k] > d[ext] {
                    ext = k;
                } else if d[ext] - d[k] > h {
                    pivots.push(ext);
                    swings.push(d[ext] - last_pivot_val);
                    last_pivot_val = d[ext];
                    dir = -1;
                    ext = k;
                }
            }
            _ => {
                if d[k] < d[ext] {
                    ext = k;
                } else if d[k] - d[ext] > h {
                    pivots.push(ext);
                    swings.push(last_pivot_val - d[ext]);
                    last_pivot_val = d[ext];
                    dir = 1;
                    ext = k;
                }
            }
        }
    }
    (pivots, swings)
}

pub fn sort_events(events: &mut [ManeuverEvent]) {
    events.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.kind.cmp(&b.kind)).then(a.end.total_cmp(&b.end)));
}

/// Convenience wrapper over [`Detector::detect_all`].
pub fn detect_maneuvers(tr: &Tracks<'_>, cfg: &ThresholdConfig) -> Vec<ManeuverEvent> {
    Detector::new(tr, cfg).detect_all()
}

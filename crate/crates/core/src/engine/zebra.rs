//! Zebra and signalized pedestrian crossings.

use crate::catalog::{ThresholdConfig, Verdict};
use crate::geometry::{lateral_clearance_along, line_of_sight, polygon_contains, polygons_intersect, Vec2, LOS_SAMPLES};
use crate::metrics::maneuvers::runs;
use crate::road::{feature_far_edge, feature_near_edge, FeatureKind, RoadFeature};
use crate::scenario::{channel_state, Intent};

use super::context::{evidence, Ctx, Finding, EPS, LATERAL_MOTION};

/// Distance ahead of the stripes (m) over which the ego is approaching a crossing.
const APPROACH: f64 = 30.0;

/// A stationary episode ending this far (m) before the stripes counts as stopping for the crossing.
const STOP_REACH: f64 = 10.0;

/// Look-back (s) when attributing a stop to a road user at the crossing.
const STOP_CAUSE_WINDOW: f64 = 2.0;

/// What the ego can observe about one vulnerable road user at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VruObservation {
    pub in_zone: bool,
    /// Gap between the ego footprint and the road user, across the ego heading.
    pub lateral_m: f64,
    pub on_road: bool,
    /// Positive when moving away from the ego path.
    pub lateral_speed_away: f64,
    /// `None` when the trace carries no intent channel.
    pub intent: Option<Intent>,
}

impl VruObservation {
    pub fn moving_away(&self) -> bool {
        self.lateral_speed_away > LATERAL_MOTION
    }

    pub fn moving_towards(&self) -> bool {
        self.lateral_speed_away < -LATERAL_MOTION
    }
}

/// Whether the ego must stop for this road user; `None` when the answer
/// hinges on an intent channel that is missing.
pub fn stop_required(v: &VruObservation, cfg: &ThresholdConfig) -> Option<bool> {
    if !v.in_zone {
        return Some(false);
    }
    let near = v.lateral_m < cfg.zebra_lateral_approach;
    if v.on_road && v.lateral_m < cfg.zebra_lateral_stop {
        return Some(true);
    }
    if v.moving_towards() && near {
        return Some(true);
    }
    match v.intent {
        Some(Intent::Crossing) => Some(near),
        Some(_) => Some(false),
        None if near => None,
        None => Some(false),
    }
}

pub(crate) struct Crossing<'a> {
    pub feature: &'a RoadFeature,
    /// Attached lane the ego drove on while approaching, if any.
    pub lane: Option<usize>,
    pub zone: Vec<Vec2>,
    pub stripes: Vec<Vec2>,
    /// Ego footprint meets the zone.
    pub inside: Vec<bool>,
}

impl Crossing<'_> {
    fn near(&self, c: &Ctx) -> Option<f64> {
        self.lane.map(|l| feature_near_edge(&c.tr.network().lanes[l], self.feature))
    }

    fn far(&self, c: &Ctx) -> Option<f64> {
        self.lane.map(|l| feature_far_edge(&c.tr.network().lanes[l], self.feature))
    }

    /// Metres from the ego front to the stripes at step `i`.
    fn distance_ahead(&self, c: &Ctx, i: usize) -> Option<f64> {
        let l = self.lane?;
        Some(self.near(c)? - c.tr.front_s(l, i))
    }

    fn approaching(&self, c: &Ctx, i: usize) -> bool {
        !self.inside[i]
            && self.lane.is_some_and(|l| c.tr.lane[i] == Some(l))
            && self.distance_ahead(c, i).is_some_and(|d| (-EPS..=APPROACH).contains(&d))
    }
}

pub(crate) fn crossings<'a>(c: &Ctx<'_, 'a>, signalized: bool) -> Vec<Crossing<'a>> {
    let tr = c.tr;
    let net = tr.network();
    let mut out = Vec::new();
    for f in net.features_of(FeatureKind::ZebraCrossing).filter(|f| f.flag("signalized") == signalized) {
        let zone = net.zebra_zone(f, c.cfg.zebra_zone_margin);
        let stripes = net.zebra_zone(f, 0.0);
        let inside: Vec<bool> = (0..tr.len()).map(|i| polygons_intersect(&tr.footprints[i].polygon(), &zone)).collect();
        let attached: Vec<usize> = f.lanes.iter().filter_map(|id| net.lane_index(id)).collect();
        let lane = attached.iter().copied().find(|&l| {
            (0..tr.len()).any(|i| {
                tr.lane[i] == Some(l) && {
                    let d = feature_near_edge(&net.lanes[l], f) - tr.front_s(l, i);
                    (-EPS..=APPROACH).contains(&d) || inside[i]
                }
            })
        });
        if lane.is_none() && !inside.iter().any(|&b| b) {
            continue;
        }
        out.push(Crossing { feature: f, lane, zone, stripes, inside });
    }
    out
}

fn observe(c: &Ctx, x: &Crossing, j: usize, i: usize) -> Option<VruObservation> {
    let tr = c.tr;
    let poly = tr.actor_polygon(j, i)?;
    let st = tr.actor_state(j, i)?;
    let fp = &tr.footprints[i];
    let in_zone = polygons_intersect(poly, &x.zone) || polygon_contains(&x.zone, st.pose.position());
    Some(VruObservation {
        in_zone,
        lateral_m: lateral_clearance_along(fp.pose.left(), &fp.polygon(), poly),
        on_road: c.on_road(st.pose.position()),
        lateral_speed_away: tr.lateral_speed_away(j, i).unwrap_or(0.0),
        intent: tr.actors[j].trace.intents.as_ref().map(|ch| channel_state(ch, tr.time(i))),
    })
}

fn vrus(c: &Ctx) -> Vec<usize> {
    c.actors_of(|k| k.is_vru())
}

enum Need {
    Clear,
    Stop { lateral: f64, who: usize },
    Unknown,
}

fn need_at(c: &Ctx, x: &Crossing, i: usize) -> Need {
    let mut unknown = false;
    for j in vrus(c) {
        let Some(o) = observe(c, x, j, i) else { continue };
        match stop_required(&o, c.cfg) {
            Some(true) => return Need::Stop { lateral: o.lateral_m, who: j },
            None => unknown = true,
            Some(false) => {}
        }
    }
    if unknown {
        Need::Unknown
    } else {
        Need::Clear
    }
}

/// Shared clause check: entering or crossing the zone while a stop is required.
fn check_passage(c: &Ctx, x: &Crossing, f: &mut Finding) {
    let tr = c.tr;
    let needs: Vec<Need> = (0..tr.len())
        .map(|i| if x.inside[i] && c.moving(i) { need_at(c, x, i) } else { Need::Clear })
        .collect();
    for (i0, i1) in runs(tr.len(), |i| matches!(needs[i], Need::Stop { .. })) {
        if let Need::Stop { lateral, who } = needs[i0] {
            f.violation(
                format!("drove through {} while {} required a stop", x.feature.id, tr.actors[who].id()),
                evidence(tr.interval(i0, i1), "vru_lateral_m", lateral, c.cfg.zebra_lateral_approach),
            );
        }
    }
    if needs.iter().any(|n| matches!(n, Need::Unknown)) {
        f.inconclusive(format!("no intent channel for a road user at {}", x.feature.id));
    }
}

fn vru_near_zone(c: &Ctx, x: &Crossing, i: usize) -> bool {
    vrus(c).into_iter().any(|j| {
        c.tr.actor_state(j, i).is_some_and(|s| distance_to_polygon(s.pose.position(), &x.zone) <= c.cfg.zebra_lateral_approach)
    })
}

fn distance_to_polygon(p: Vec2, poly: &[Vec2]) -> f64 {
    if polygon_contains(poly, p) {
        return 0.0;
    }
    let n = poly.len();
    (0..n)
        .map(|k| {
            let (a, b) = (poly[k], poly[(k + 1) % n]);
            let ab = b - a;
            let t = if ab.norm_sq() > 0.0 { ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0) } else { 0.0 };
            p.distance(a + ab * t)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Give-way line downstream of the crossing on its lane, with the gap (m) from the stripes.
fn give_way_after<'a>(c: &Ctx<'_, 'a>, x: &Crossing) -> Option<(&'a RoadFeature, f64)> {
    let l = x.lane?;
    let lane = &c.tr.network().lanes[l];
    let far = x.far(c)?;
    c.tr
        .network()
        .features_of(FeatureKind::GiveWayLine)
        .filter(|g| g.attached_to(&lane.id))
        .map(|g| (g, feature_near_edge(lane, g) - far))
        .filter(|(_, gap)| *gap >= -EPS)
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

fn too_short_for_ego(c: &Ctx, x: &Crossing) -> bool {
    give_way_after(c, x).is_some_and(|(_, gap)| c.tr.ego.length > gap + EPS)
}

/// Stationary episodes with the ego front within reach before the stripes.
fn stops_before<'x>(c: &'x Ctx, x: &'x Crossing) -> impl Iterator<Item = (usize, usize)> + 'x {
    c.tr.stationary.iter().copied().filter(move |&(s0, _)| {
        !x.inside[s0] && x.distance_ahead(c, s0).is_some_and(|d| (-EPS..=STOP_REACH).contains(&d))
    })
}

fn line_before<'a>(c: &Ctx<'_, 'a>, x: &Crossing) -> bool {
    let (Some(l), Some(near)) = (x.lane, x.near(c)) else { return false };
    let lane = &c.tr.network().lanes[l];
    c.tr.network().features.iter().any(|f| {
        matches!(f.kind, FeatureKind::StopLine | FeatureKind::GiveWayLine)
            && f.attached_to(&lane.id)
            && (near - STOP_REACH..=near + EPS).contains(&feature_near_edge(lane, f))
    })
}

pub(crate) fn tr68_7_9_4(c: &Ctx) -> Verdict {
    const ID: &str = "TR68-7.9.4";
    let xs = crossings(c, false);
    if xs.is_empty() {
        return Verdict::not_applicable(ID, "no zebra crossing on the ego path");
    }
    let tr = c.tr;
    let cfg = c.cfg;
    let mut f = Finding::new();
    for x in &xs {
        check_passage(c, x, &mut f);
        for (s0, s1) in stops_before(c, x) {
            let from = tr.index_at(tr.time(s0) - STOP_CAUSE_WINDOW);
            let cause = (from..=s1).any(|i| !matches!(need_at(c, x, i), Need::Clear));
            let dist = x.distance_ahead(c, s0).unwrap_or(0.0);
            if cause {
                if line_before(c, x) {
                    continue;
                }
                let (lo, hi) = (cfg.zebra_no_line_stop + cfg.stop_line_window.0, cfg.zebra_no_line_stop + cfg.stop_line_window.1);
                if dist < lo - EPS || dist > hi + EPS {
                    let thr = if dist < lo { lo } else { hi };
                    f.violation(
                        format!("stopped {dist:.2} m before {} with no stop line", x.feature.id),
                        evidence(tr.interval(s0, s1), "stripe_distance_m", dist, thr),
                    );
                } else {
                    f.measured(evidence(tr.interval(s0, s1), "stripe_distance_m", dist, cfg.zebra_no_line_stop));
                }
                continue;
            }
            let nobody = !(from..=s1).any(|i| vru_near_zone(c, x, i));
            let queued = (s0..=s1).any(|i| c.leader(i).is_some_and(|(_, g)| g < STOP_REACH))
                || tr.actors.iter().enumerate().any(|(j, a)| {
                    !a.is_vru() && tr.relative(j, s0).is_some_and(|(ahead, left)| ahead > 0.0 && ahead < STOP_REACH + tr.ego.length && left.abs() < 2.0)
                });
            if nobody && !queued && !too_short_for_ego(c, x) {
                f.minor(
                    format!("stopped at {} with no road user at the crossing", x.feature.id),
                    evidence(tr.interval(s0, s1), "stationary_s", tr.time(s1) - tr.time(s0), 0.0),
                );
            }
        }
    }
    f.finish(ID, "stopped for every road user entitled to cross")
}

pub(crate) fn tr68_7_9_5(c: &Ctx) -> Verdict {
    const ID: &str = "TR68-7.9.5";
    let xs = crossings(c, false);
    if xs.is_empty() {
        return Verdict::not_applicable(ID, "no zebra crossing on the ego path");
    }
    let tr = c.tr;
    let mut f = Finding::new();
    for x in &xs {
        let stopped_by = |i: usize| {
            tr.stationary.iter().any(|&(s0, s1)| s1 < i && (x.inside[s0] || x.approaching(c, s0)))
        };
        let assumed = |i: usize| -> Option<(usize, f64)> {
            if !x.inside[i] || !c.moving(i) || stopped_by(i) {
                return None;
            }
            vrus(c).into_iter().find_map(|j| {
                let o = observe(c, x, j, i)?;
                (o.in_zone && !o.moving_away() && o.lateral_m < c.cfg.zebra_lateral_approach).then_some((j, o.lateral_m))
            })
        };
        let hits: Vec<Option<(usize, f64)>> = (0..tr.len()).map(assumed).collect();
        for (i0, i1) in runs(tr.len(), |i| hits[i].is_some()) {
            let (j, lat) = hits[i0].unwrap();
            f.violation(
                format!("entered {} without first stopping for {}", x.feature.id, tr.actors[j].id()),
                evidence(tr.interval(i0, i1), "vru_lateral_m", lat, c.cfg.zebra_lateral_approach),
            );
        }
    }
    f.finish(ID, "no road user in the zone was passed before a stop")
}

pub(crate) fn tr68_7_9_6(c: &Ctx) -> Verdict {
    const ID: &str = "TR68-7.9.6";
    let xs = crossings(c, false);
    if xs.is_empty() {
        return Verdict::not_applicable(ID, "no zebra crossing on the ego path");
    }
    let tr = c.tr;
    let cfg = c.cfg;
    let mut f = Finding::new();
    for x in &xs {
        let mut flagged = vec![false; tr.len()];
        let mut missing = false;
        for i in (0..tr.len()).filter(|&i| x.inside[i] && c.moving(i)) {
            let t0 = tr.time(i) - cfg.zebra_intent_wait;
            if t0 < tr.time(0) - EPS {
                continue;
            }
            let k0 = tr.index_at(t0);
            for j in vrus(c) {
                let waited = (k0..=i).all(|k| observe(c, x, j, k).is_some_and(|o| o.in_zone));
                if !waited {
                    continue;
                }
                match &tr.actors[j].trace.intents {
                    None => missing = true,
                    Some(ch) => {
                        let shown = (k0..=i).any(|k| channel_state(ch, tr.time(k)) == Intent::Crossing);
                        if !shown && tr.speed_kmh(i) > cfg.zebra_traverse_speed + EPS {
                            flagged[i] = true;
                        }
                    }
                }
            }
        }
        for (i0, i1) in runs(tr.len(), |i| flagged[i]) {
            let v = (i0..=i1).map(|i| tr.speed_kmh(i)).fold(0.0, f64::max);
            f.violation(
                format!("crossed occupied {} above the traverse speed", x.feature.id),
                evidence(tr.interval(i0, i1), "speed_kmh", v, cfg.zebra_traverse_speed),
            );
        }
        if missing {
            f.inconclusive(format!("no intent channel for a road user waiting at {}", x.feature.id));
        }
    }
    f.finish(ID, "occupied zebra zones were crossed slowly or not at all")
}

pub(crate) fn rec_09(c: &Ctx) -> Verdict {
    const ID: &str = "REC-09";
    let xs: Vec<Crossing> = crossings(c, true).into_iter().filter(|x| x.inside.iter().any(|&b| b)).collect();
    if xs.is_empty() {
        return Verdict::not_applicable(ID, "no signalized pedestrian crossing on the ego path");
    }
    let mut f = Finding::new();
    for x in &xs {
        check_passage(c, x, &mut f);
    }
    f.finish(ID, "no pedestrian crossing was entered while a stop was required")
}

pub(crate) fn rec_06(c: &Ctx) -> Verdict {
    const ID: &str = "REC-06";
    let tr = c.tr;
    let cfg = c.cfg;
    let mut applicable = false;
    let mut f = Finding::new();
    for x in crossings(c, false) {
        let Some((give_way, gap)) = give_way_after(c, &x) else { continue };
        if tr.ego.length <= gap + EPS {
            continue;
        }
        let Some(l) = x.lane else { continue };
        applicable = true;
        let near = x.near(c).unwrap_or(0.0);
        let on_stripes: Vec<(usize, usize)> = tr
            .stationary
            .iter()
            .copied()
            .filter(|&(s0, _)| polygons_intersect(&tr.footprints[s0].polygon(), &x.stripes))
            .collect();
        if on_stripes.is_empty() {
            f.measured(evidence((tr.time(0), tr.time(tr.len() - 1)), "give_way_gap_m", gap, tr.ego.length));
            continue;
        }
        for (s0, s1) in on_stripes {
            let prior = tr.stationary.iter().copied().filter(|&(p0, p1)| {
                p1 < s0 && !polygons_intersect(&tr.footprints[p0].polygon(), &x.stripes) && tr.front_s(l, p0) <= near + EPS
            });
            let Some((p0, p1)) = prior.last() else {
                f.violation(
                    format!("waited on {} without first stopping before it", x.feature.id),
                    evidence(tr.interval(s0, s1), "give_way_gap_m", gap, tr.ego.length),
                );
                continue;
            };
            let Some(region) = give_way.points_attr("approach_region") else {
                f.inconclusive(format!("{} has no approach_region to judge visibility", give_way.id));
                continue;
            };
            let origin = tr.footprints[p1].front_center();
            let blockers: Vec<Vec<Vec2>> =
                (0..tr.actors.len()).filter_map(|j| tr.actor_polygon(j, p1).map(<[Vec2]>::to_vec)).collect();
            let los = line_of_sight(origin, &region, &blockers, LOS_SAMPLES, cfg.visibility_threshold);
            if los.visible {
                f.violation(
                    format!("crept onto {} although the approach was visible", x.feature.id),
                    evidence(tr.interval(p1, s0), "visible_fraction", los.fraction, cfg.visibility_threshold),
                );
            } else {
                f.measured(evidence(tr.interval(p0, p1), "visible_fraction", los.fraction, cfg.visibility_threshold));
            }
            let creep = (p1..=s0).map(|i| tr.speed_kmh(i)).fold(0.0, f64::max);
            if creep > cfg.creep_speed_cap + EPS {
                f.violation(
                    format!("crept onto {} too fast", x.feature.id),
                    evidence(tr.interval(p1, s0), "creep_speed_kmh", creep, cfg.creep_speed_cap),
                );
            } else {
                f.measured(evidence(tr.interval(p1, s0), "creep_speed_kmh", creep, cfg.creep_speed_cap));
            }
            let occupied = (p1..=s1).find(|&i| {
                vrus(c).into_iter().any(|j| observe(c, &x, j, i).is_some_and(|o| o.in_zone))
            });
            if let Some(i) = occupied {
                f.violation(
                    format!("occupied {} while a road user was in the zone", x.feature.id),
                    evidence(tr.interval(i, s1), "vru_in_zone", 1.0, 0.0),
                );
            }
        }
    }
    if !applicable {
        return Verdict::not_applicable(ID, "no zebra crossing too close to a following give-way line");
    }
    f.finish(ID, "waited before the zebra or crept only while the view was blocked")
}

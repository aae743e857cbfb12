//! One evaluator per evaluable rule. Each returns `not_applicable` itself
//! when the triggering feature, actor or maneuver is absent.

use crate::catalog::{Outcome, Verdict};
use crate::geometry::polygons_intersect;
use crate::metrics::maneuvers::runs;
use crate::metrics::{car_length_rule, ManeuverEvent, ManeuverKind};
use crate::road::FeatureKind;
use crate::scenario::{channel_state, ActorClass, Indicator};

use super::context::{evidence, Ctx, Finding, EPS, FREE_LATERAL, FREE_LONGITUDINAL, PED_STATIONARY, SLACK_MIN};
use super::zebra;

pub(crate) type Evaluator = fn(&Ctx) -> Verdict;

/// Off-centre driving shorter than this (s) is not reported.
const OFF_CENTRE_MIN: f64 = 1.0;

/// Slow adjacent vehicles this far ahead (m) already make the stay-behind rule relevant.
const SLOW_AHEAD: f64 = 30.0;

pub(crate) fn evaluator(id: &str) -> Option<Evaluator> {
    Some(match id {
        "REC-01" => rec_01,
        "REC-02" => rec_02,
        "REC-03a" => rec_03a,
        "REC-03b" => rec_03b,
        "REC-04" => rec_04,
        "REC-05" => rec_05,
        "REC-06" => zebra::rec_06,
        "REC-07" => rec_07,
        "REC-08" => rec_08,
        "REC-09" => zebra::rec_09,
        "REC-10" => rec_10,
        "REC-11" => rec_11,
        "REC-12" => rec_12,
        "REC-14" => rec_14,
        "REC-15" => rec_15,
        "REC-16" => rec_16,
        "REC-17" => rec_17,
        "REC-18" => rec_18,
        "REC-19" => rec_19,
        "REC-20" => rec_20,
        "REC-21" => rec_21,
        "REC-22" => rec_22,
        "TR68-6.1.a" => tr68_6_1_a,
        "TR68-6.3.2" => tr68_6_3_2,
        "TR68-6.4" => tr68_6_4,
        "TR68-7.5" => tr68_7_5,
        "TR68-7.6.i" => tr68_7_6_i,
        "TR68-7.9.4" => zebra::tr68_7_9_4,
        "TR68-7.9.5" => zebra::tr68_7_9_5,
        "TR68-7.9.6" => zebra::tr68_7_9_6,
        "TR68-7.10.2.c" => tr68_7_10_2_c,
        "BTD-93" => btd_93,
        "BTD-160c" => btd_160c,
        "FTD-221" => ftd_221,
        "FTD-226" => ftd_226,
        "FTD-227" => ftd_227,
        _ => return None,
    })
}

fn side_indicator(e: &ManeuverEvent) -> Indicator {
    match e.kind {
        ManeuverKind::LaneChange => match e.tag_value("side") {
            Some("left") => Indicator::Left,
            _ => Indicator::Right,
        },
        ManeuverKind::SlipRoadEntry | ManeuverKind::LeftTurn => Indicator::Left,
        _ => Indicator::Right,
    }
}

/// Runs of steps where `clear` yields a clearance, with the smallest value in each.
fn clearance_runs(n: usize, clear: impl Fn(usize) -> Option<f64>) -> Vec<((usize, usize), f64)> {
    runs(n, |i| clear(i).is_some())
        .into_iter()
        .map(|(a, b)| ((a, b), (a..=b).filter_map(&clear).fold(f64::INFINITY, f64::min)))
        .collect()
}

/// Minimum-gap check shared by the fixed clearance rules; false when nothing was passed.
fn gap_checks(c: &Ctx, f: &mut Finding, what: &str, required: f64, clear: &dyn Fn(usize, usize) -> Option<f64>, subjects: &[usize]) -> bool {
    let mut seen = false;
    for &j in subjects {
        for ((i0, i1), min) in clearance_runs(c.n(), |i| c.moving(i).then(|| clear(j, i)).flatten()) {
            seen = true;
            let ev = evidence(c.tr.interval(i0, i1), "clearance_m", min, required);
            if min < required - EPS {
                f.violation(format!("passed {what} {} at {min:.2} m", c.tr.actors[j].id()), ev);
            } else {
                f.measured(ev);
            }
        }
    }
    seen
}

fn gap_rule(c: &Ctx, id: &str, what: &str, required: f64, clear: &dyn Fn(usize, usize) -> Option<f64>, subjects: &[usize], none: &str) -> Verdict {
    let mut f = Finding::new();
    if !gap_checks(c, &mut f, what, required, clear, subjects) {
        return Verdict::not_applicable(id, none);
    }
    f.finish(id, format!("kept at least {required} m from every {what}"))
}

fn signal_check(c: &Ctx, f: &mut Finding, e: &ManeuverEvent, what: &str) {
    if e.tag_value("signal") == Some("unavailable") {
        f.inconclusive("indicator channel missing");
        return;
    }
    let need = c.cfg.signal_lead;
    match e.attr("signal_lead_s") {
        None => f.violation(format!("{what} without indicator"), evidence(e.interval(), "signal_lead_s", 0.0, need)),
        Some(l) if l < need - EPS => {
            f.violation(format!("indicator only {l:.1} s before the {what}"), evidence(e.interval(), "signal_lead_s", l, need))
        }
        Some(l) => f.measured(evidence(e.interval(), "signal_lead_s", l, need)),
    }
}

fn tr68_6_1_a(c: &Ctx) -> Verdict {
    const ID: &str = "TR68-6.1.a";
    let tr = c.tr;
    let net = tr.network();
    let limit = |i: usize| {
        net.speed_limit_at(tr.state(i).pose.position())
            .or(tr.scenario.speed_limit_kmh)
            .unwrap_or(c.cfg.speed_limit_default)
    };
    let mut f = Finding::new();
    for (i0, i1) in runs(c.n(), |i| tr.speed_kmh(i) > limit(i) + EPS) {
        let k = (i0..=i1).max_by(|&a, &b| (tr.speed_kmh(a) - limit(a)).total_cmp(&(tr.speed_kmh(b) - limit(b)))).unwrap_or(i0);
        f.violation(
            format!("above the {} km/h limit for {:.1} s", limit(k), tr.time(i1) - tr.time(i0)),
            evidence(tr.interval(i0, i1), "speed_kmh", tr.speed_kmh(k), limit(k)),
        );
    }
    if f.outcome() == Outcome::Pass {
        let k = (0..c.n()).max_by(|&a, &b| tr.speed_kmh(a).total_cmp(&tr.speed_kmh(b))).unwrap_or(0);
        f.measured(evidence(tr.interval(k, k), "speed_kmh", tr.speed_kmh(k), limit(k)));
    }
    f.finish(ID, "speed stayed within the posted limit")
}

fn tr68_6_4(c: &Ctx) -> Verdict {
    const ID: &str = "TR68-6.4";
    let stops: Vec<&ManeuverEvent> = c.events_of(ManeuverKind::StopAtLine).collect();
    if stops.is_empty() {
        return Verdict::not_applicable(ID, "no stop at a stop or give-way line");
    }
    let (lo, hi) = c.cfg.stop_line_window;
    let mut f = Finding::new();
    for e in stops {
        let d = e.attr("line_distance_m").unwrap_or(0.0);
        let line = e.tag_value("feature").unwrap_or("line");
        if d < lo - EPS {
            f.violation(format!("front {:.2} m past {line}", -d), evidence(e.interval(), "line_distance_m", d, lo));
        } else if d > hi + EPS {
            f.violation(format!("stopped {d:.2} m short of {line}"), evidence(e.interval(), "line_distance_m", d, hi));
        } else {
            f.measured(evidence(e.interval(), "line_distance_m", d, hi));
        }
    }
    f.finish(ID, "every stop was within the window before the line")
}

fn tr68_7_5(c: &Ctx) -> Verdict {
    const ID: &str = "TR68-7.5";
    let changes: Vec<&ManeuverEvent> = c.events_of(ManeuverKind::LaneChange).collect();
    if changes.is_empty() {
        return Verdict::not_applicable(ID, "no lane change detected");
    }
    let mut f = Finding::new();
    for e in changes {
        signal_check(c, &mut f, e, "lane change");
        let rev = e.attr("max_reversal_m").unwrap_or(0.0);
        if rev > c.cfg.continuity_reversal + EPS {
            f.violation("lane change was not continuous", evidence(e.interval(), "max_reversal_m", rev, c.cfg.continuity_reversal));
        }
    }
    f.finish(ID, "every lane change was signalled in time and carried through")
}

fn tr68_7_10_2_c(c: &Ctx) -> Verdict {
    const ID: &str = "TR68-7.10.2.c";
    let turns: Vec<&ManeuverEvent> = c.events.iter().filter(|e| e.kind.is_turn()).collect();
    if turns.is_empty() {
        return Verdict::not_applicable(ID, "no turn detected");
    }
    let mut f = Finding::new();
    for e in turns {
        signal_check(c, &mut f, e, &e.kind.as_str().replace('_', " "));
    }
    f.finish(ID, "every turn was signalled in time")
}

fn tr68_7_6_i(c: &Ctx) -> Verdict {
    const ID: &str = "TR68-7.6.i";
    let riders = c.actors_of(|k| matches!(k, ActorClass::Cyclist | ActorClass::Pmd));
    gap_rule(c, ID, "cyclist", c.cfg.cyclist_gap, &|j, i| c.tr.alongside(j, i), &riders, "no cyclist passed")
}

fn ftd_221(c: &Ctx) -> Verdict {
    const ID: &str = "FTD-221";
    let parked: Vec<usize> = (0..c.tr.actors.len())
        .filter(|&j| c.tr.actors[j].parked && c.tr.actors[j].class().is_motor_vehicle())
        .collect();
    gap_rule(c, ID, "parked vehicle", c.cfg.parked_vehicle_gap, &|j, i| c.tr.alongside(j, i), &parked, "no parked vehicle passed")
}

fn ftd_227(c: &Ctx) -> Verdict {
    const ID: &str = "FTD-227";
    let moving: Vec<usize> = (0..c.tr.actors.len())
        .filter(|&j| !c.tr.actors[j].parked && c.tr.actors[j].class().is_motor_vehicle())
        .collect();
    let clear = |j: usize, i: usize| {
        let fast = c.actor_speed(j, i).is_some_and(|v| v * 3.6 >= c.cfg.slow_tsv_threshold);
        fast.then(|| c.tr.alongside(j, i)).flatten()
    };
    gap_rule(c, ID, "moving vehicle", c.cfg.moving_vehicle_gap, &clear, &moving, "no moving vehicle passed")
}

fn ftd_226(c: &Ctx) -> Verdict {
    const ID: &str = "FTD-226";
    let tr = c.tr;
    let need = c.cfg.fixed_obstacle_gap;
    let obstacles = c.actors_of(|k| k == ActorClass::StaticObstacle);
    let mut f = Finding::new();
    let mut seen = gap_checks(c, &mut f, "obstacle", need, &|j, i| tr.alongside(j, i), &obstacles);
    for feat in c.fixed_features() {
        let shape = feat.geometry.shape();
        for ((i0, i1), min) in clearance_runs(c.n(), |i| c.moving(i).then(|| c.shape_alongside(i, &shape)).flatten()) {
            seen = true;
            let ev = evidence(tr.interval(i0, i1), "clearance_m", min, need);
            if min < need - EPS {
                f.violation(format!("passed {} {} at {min:.2} m", feat.kind, feat.id), ev);
            } else {
                f.measured(ev);
            }
        }
    }
    if !seen {
        return Verdict::not_applicable(ID, "no fixed obstacle passed");
    }
    f.finish(ID, format!("kept at least {need} m from every fixed obstacle"))
}

fn rec_01(c: &Ctx) -> Verdict {
    const ID: &str = "REC-01";
    let tr = c.tr;
    let cfg = c.cfg;
    let fg = cfg.friction_coefficient + cfg.road_grade;
    if !(fg > 0.0) {
        return Verdict::new(ID, Outcome::Inconclusive, "friction plus grade must be positive");
    }
    let busy = |i: usize| c.in_event(i, |k| matches!(k, ManeuverKind::LaneChange));
    let need = |i: usize, j: usize| {
        let ve = tr.speed_kmh(i);
        let vl = c.actor_speed(j, i).unwrap_or(0.0) * 3.6;
        0.278 * cfg.system_latency * ve + (ve * ve - vl * vl).max(0.0) / (254.0 * fg) + cfg.follow_stop_margin
    };
    let sample: Vec<Option<(usize, f64)>> =
        (0..c.n()).map(|i| if c.moving(i) && !busy(i) { c.leader(i) } else { None }).collect();
    if sample.iter().all(Option::is_none) {
        return Verdict::not_applicable(ID, "no leading vehicle");
    }
    let mut f = Finding::new();
    let short = |i: usize| sample[i].is_some_and(|(j, gap)| gap < need(i, j) - EPS);
    for (i0, i1) in runs(c.n(), short) {
        let k = (i0..=i1)
            .min_by(|&a, &b| {
                let m = |i: usize| sample[i].map_or(0.0, |(j, g)| g - need(i, j));
                m(a).total_cmp(&m(b))
            })
            .unwrap_or(i0);
        let (j, gap) = sample[k].unwrap();
        f.violation(
            format!("followed {} too closely", tr.actors[j].id()),
            evidence(tr.interval(i0, i1), "gap_m", gap, need(k, j)),
        );
    }
    if f.outcome() == Outcome::Pass {
        let (k, (j, gap)) = sample
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (i, s)))
            .min_by(|a, b| (a.1 .1 - need(a.0, a.1 .0)).total_cmp(&(b.1 .1 - need(b.0, b.1 .0))))
            .unwrap();
        f.measured(evidence(tr.interval(k, k), "gap_m", gap, need(k, j)));
    }
    f.finish(ID, "following gap always allowed a stop short of the leader")
}

fn rec_02(c: &Ctx) -> Verdict {
    const ID: &str = "REC-02";
    let ovs: Vec<&ManeuverEvent> =
        c.events_of(ManeuverKind::Overtake).filter(|e| e.attr("junction_lead_s").is_some()).collect();
    if ovs.is_empty() {
        return Verdict::not_applicable(ID, "no overtake ahead of a slip road or junction");
    }
    let need = c.cfg.overtake_junction_lead;
    let mut f = Finding::new();
    for e in ovs {
        let lead = e.attr("junction_lead_s").unwrap_or(0.0);
        let ev = evidence(e.interval(), "junction_lead_s", lead, need);
        if lead < need - EPS {
            f.violation(format!("overtake finished {lead:.1} s before the junction"), ev);
        } else {
            f.measured(ev);
        }
    }
    f.finish(ID, "overtakes finished well before the junction")
}

fn rec_03a(c: &Ctx) -> Verdict {
    const ID: &str = "REC-03a";
    let ovs: Vec<&ManeuverEvent> = c.events_of(ManeuverKind::Overtake).collect();
    if ovs.is_empty() {
        return Verdict::not_applicable(ID, "no overtake detected");
    }
    let need = c.cfg.return_ttc;
    let mut f = Finding::new();
    for e in ovs {
        if e.flag("open") {
            f.inconclusive("overtake still in progress when the trace ends");
            continue;
        }
        if let Some(t) = e.attr("return_ttc_s") {
            let ev = evidence(e.interval(), "return_ttc_s", t, need);
            if t < need - EPS {
                f.violation(format!("returned {t:.1} s ahead of oncoming traffic"), ev);
            } else {
                f.measured(ev);
            }
        }
    }
    f.finish(ID, "returned with enough time before oncoming traffic")
}

fn rec_03b(c: &Ctx) -> Verdict {
    const ID: &str = "REC-03b";
    let changes: Vec<&ManeuverEvent> = c.events_of(ManeuverKind::LaneChange).collect();
    if changes.is_empty() {
        return Verdict::not_applicable(ID, "no lane change detected");
    }
    let cfg = c.cfg;
    let mut f = Finding::new();
    for e in changes {
        let Some(gap) = e.attr("rear_gap_m") else { continue };
        let v = e.attr("rear_speed_kmh").unwrap_or(0.0);
        let closure = e.attr("rear_closure_ms").unwrap_or(0.0).max(0.0);
        let need = car_length_rule(v, cfg.car_length_per_16kmh, cfg.car_length).max(cfg.rear_gap_ttc * closure);
        let ev = evidence(e.interval(), "rear_gap_m", gap, need);
        if gap < need - EPS {
            f.violation(format!("moved in {gap:.1} m ahead of {}", e.tag_value("rear_actor").unwrap_or("rear traffic")), ev);
        } else {
            f.measured(ev);
        }
    }
    f.finish(ID, "rear gaps were sufficient at every lane change")
}

fn rec_04(c: &Ctx) -> Verdict {
    const ID: &str = "REC-04";
    let changes: Vec<&ManeuverEvent> = c.events_of(ManeuverKind::LaneChange).collect();
    if changes.is_empty() {
        return Verdict::not_applicable(ID, "no lane change detected");
    }
    let cfg = c.cfg;
    let mut f = Finding::new();
    for e in changes {
        for (key, limit, what) in [
            ("peak_lat_accel", cfg.lat_accel_max, "lateral acceleration"),
            ("peak_lat_jerk", cfg.lat_jerk_max, "lateral jerk"),
        ] {
            let Some(v) = e.attr(key) else { continue };
            let ev = evidence(e.interval(), key, v, limit);
            if v > limit + EPS {
                f.violation(format!("{what} {v:.2} above {limit}"), ev);
            } else {
                f.measured(ev);
            }
        }
    }
    f.finish(ID, "lane changes stayed within the comfort limits")
}

fn rec_05(c: &Ctx) -> Verdict {
    const ID: &str = "REC-05";
    let entries: Vec<&ManeuverEvent> = c.events_of(ManeuverKind::SlipRoadEntry).collect();
    if entries.is_empty() {
        return Verdict::not_applicable(ID, "no slip-road entry detected");
    }
    let hi = c.cfg.slip_entry_offset + c.cfg.slip_entry_tolerance;
    let mut f = Finding::new();
    for e in entries {
        let off = e.attr("entry_offset_m").unwrap_or(0.0);
        if off < -EPS {
            f.violation(format!("turn began {:.1} m before the slip road", -off), evidence(e.interval(), "entry_offset_m", off, 0.0));
        } else if off > hi + EPS {
            f.violation(format!("turn began {off:.1} m into the slip road"), evidence(e.interval(), "entry_offset_m", off, hi));
        } else {
            f.measured(evidence(e.interval(), "entry_offset_m", off, c.cfg.slip_entry_offset));
        }
    }
    f.finish(ID, "slip-road turns began at the start of the slip road")
}

fn rec_07(c: &Ctx) -> Verdict {
    const ID: &str = "REC-07";
    let tr = c.tr;
    let changes: Vec<&ManeuverEvent> = c.events_of(ManeuverKind::LaneChange).collect();
    if changes.is_empty() {
        return Verdict::not_applicable(ID, "no lane change detected");
    }
    let Some(ch) = &tr.ego.signals else {
        return Verdict::new(ID, Outcome::Inconclusive, "indicator channel missing");
    };
    let window = c.cfg.signal_carry_window;
    let t_last = tr.time(c.n() - 1);
    let mut f = Finding::new();
    for e in changes {
        let side = side_indicator(e);
        let next = c
            .events
            .iter()
            .filter(|n| n.kind == ManeuverKind::LaneChange || n.kind.is_turn())
            .filter(|n| n.start > e.end + EPS)
            .min_by(|a, b| a.start.total_cmp(&b.start));
        let (i0, _) = c.span(e);
        let i_end = tr.index_at(e.end).max(i0);
        match next {
            Some(n) if side_indicator(n) == side && n.start - e.end <= window + EPS => {
                let i_next = tr.index_at(n.start);
                if let Some(k) = (i_end..=i_next).find(|&k| channel_state(ch, tr.time(k)) != side) {
                    f.violation(
                        "indicator cancelled between two actions to the same side",
                        evidence((tr.time(k), n.start), "gap_to_next_action_s", n.start - e.end, window),
                    );
                }
            }
            _ => {
                let deadline = e.end + window;
                let off = (i_end..c.n()).take_while(|&k| tr.time(k) <= deadline + EPS).any(|k| channel_state(ch, tr.time(k)) != side);
                if off {
                    continue;
                }
                if deadline > t_last {
                    f.inconclusive("trace ends before the indicator could be cancelled");
                } else {
                    f.violation(
                        "indicator left on after the lane change",
                        evidence((e.end, deadline), "indicator_on_s", window, window),
                    );
                }
            }
        }
    }
    f.finish(ID, "indicators were cancelled or carried as the next action required")
}

/// Lane carries junction furniture, so a right turn from it is a junction turn.
fn at_junction(c: &Ctx, lane_id: &str) -> bool {
    c.tr.network().features.iter().any(|f| {
        matches!(
            f.kind,
            FeatureKind::RightTurnPocket | FeatureKind::JunctionEntry | FeatureKind::YellowBox | FeatureKind::StopLine
        ) && f.attached_to(lane_id)
    })
}

fn rec_08(c: &Ctx) -> Verdict {
    const ID: &str = "REC-08";
    let turns: Vec<&ManeuverEvent> = c
        .events_of(ManeuverKind::RightTurn)
        .filter(|e| e.tag_value("from_lane").is_some_and(|l| at_junction(c, l)))
        .collect();
    if turns.is_empty() {
        return Verdict::not_applicable(ID, "no right turn at a junction");
    }
    let need = c.cfg.turn_completion_ttc;
    let mut f = Finding::new();
    for e in turns {
        let Some(t) = e.attr("completion_ttc_s") else { continue };
        let ev = evidence(e.interval(), "completion_ttc_s", t, need);
        if t < need - EPS {
            f.violation(
                format!("completed the turn {t:.1} s ahead of {}", e.tag_value("oncoming_actor").unwrap_or("oncoming traffic")),
                ev,
            );
        } else {
            f.measured(ev);
        }
    }
    f.finish(ID, "right turns left enough time to oncoming traffic")
}

fn rec_10(c: &Ctx) -> Verdict {
    const ID: &str = "REC-10";
    let net = c.tr.network();
    let multi_pocket = |lane: &str| {
        net.features_of(FeatureKind::RightTurnPocket).any(|p| p.attached_to(lane) && p.lanes.len() >= 2)
    };
    let turns: Vec<&ManeuverEvent> = c
        .events_of(ManeuverKind::RightTurn)
        .filter(|e| e.tag_value("from_lane").is_some_and(multi_pocket))
        .filter(|e| e.attr("origin_index").is_some_and(|o| o >= 2.0))
        .collect();
    if turns.is_empty() {
        return Verdict::not_applicable(ID, "no turn from the outer lane of a multi-lane right-turn pocket");
    }
    let mut f = Finding::new();
    for e in turns {
        let origin = e.attr("origin_index").unwrap_or(0.0);
        let target = e.attr("target_index").unwrap_or(0.0);
        let ev = evidence(e.interval(), "target_index", target, origin);
        if (target - origin).abs() > EPS {
            f.violation(format!("turned from lane {origin} into lane {target}"), ev);
        } else {
            f.measured(ev);
        }
    }
    f.finish(ID, "dual right turns kept to the matching target lane")
}

fn rec_11(c: &Ctx) -> Verdict {
    const ID: &str = "REC-11";
    let tr = c.tr;
    let cfg = c.cfg;
    let passes: Vec<&ManeuverEvent> = c.events_of(ManeuverKind::PassParked).collect();
    if passes.is_empty() {
        return Verdict::not_applicable(ID, "no parked vehicle passed");
    }
    let mut f = Finding::new();
    for e in passes {
        let Some(j) = e.actors.first().and_then(|id| tr.actor_index(id)) else { continue };
        let (a, b) = c.span(e);
        let tight = |i: usize| (a..=b).contains(&i) && tr.alongside(j, i).is_some_and(|g| g < cfg.moving_vehicle_gap - EPS);
        for (i0, i1) in runs(c.n(), |i| tight(i) && tr.speed_kmh(i) > cfg.parked_pass_speed + EPS) {
            let k = (i0..=i1).max_by(|&x, &y| tr.speed_kmh(x).total_cmp(&tr.speed_kmh(y))).unwrap_or(i0);
            f.violation(
                format!("passed {} at {:.0} km/h with {:.2} m clearance", tr.actors[j].id(), tr.speed_kmh(k), tr.alongside(j, k).unwrap_or(0.0)),
                evidence(tr.interval(i0, i1), "speed_kmh", tr.speed_kmh(k), cfg.parked_pass_speed),
            );
        }
        if let Some(k) = (a..=b).filter(|&i| tight(i)).max_by(|&x, &y| tr.speed_kmh(x).total_cmp(&tr.speed_kmh(y))) {
            f.measured(evidence(tr.interval(k, k), "speed_kmh", tr.speed_kmh(k), cfg.parked_pass_speed));
        }
    }
    f.finish(ID, "reduced-clearance passes of parked vehicles were slow enough")
}

fn rec_12(c: &Ctx) -> Verdict {
    const ID: &str = "REC-12";
    let ovs: Vec<&ManeuverEvent> = c.events_of(ManeuverKind::Overtake).filter(|e| e.flag("parked")).collect();
    if ovs.is_empty() {
        return Verdict::not_applicable(ID, "no overtake of a parked vehicle");
    }
    let cfg = c.cfg;
    let mut f = Finding::new();
    for e in ovs {
        if e.flag("open") {
            f.inconclusive("overtake still in progress when the trace ends");
            continue;
        }
        if let Some(lead) = e.attr("pull_in_lead_lengths") {
            let ev = evidence(e.interval(), "pull_in_lead_lengths", lead, cfg.pull_in_lead.0);
            if lead < cfg.pull_in_lead.0 - EPS {
                f.violation(format!("pulled back in {lead:.2} car lengths ahead of the parked vehicle"), ev);
            } else {
                f.measured(ev);
            }
        }
        if let Some(dwell) = e.attr("dwell_s") {
            let ev = evidence(e.interval(), "dwell_s", dwell, cfg.overtake_dwell_max);
            if dwell > cfg.overtake_dwell_max + EPS {
                f.violation(format!("stayed {dwell:.1} s in the adjacent lane"), ev);
            } else {
                f.measured(ev);
            }
        }
    }
    f.finish(ID, "overtakes of parked vehicles returned promptly with room to spare")
}

fn rec_14(c: &Ctx) -> Verdict {
    const ID: &str = "REC-14";
    let tr = c.tr;
    let net = tr.network();
    let ego_half = tr.ego.length / 2.0;
    let crowded = |i: usize| {
        (0..tr.actors.len()).any(|j| {
            let Some((ahead, left)) = tr.relative(j, i) else { return false };
            let reach = ego_half + tr.actors[j].trace.length / 2.0 + FREE_LONGITUDINAL;
            if tr.actors[j].is_vru() {
                return ahead.hypot(left) < FREE_LONGITUDINAL;
            }
            ahead.abs() < reach && left.abs() < FREE_LATERAL
        })
    };
    let shapes: Vec<Vec<crate::geometry::Vec2>> = c.fixed_features().map(|f| f.geometry.shape()).collect();
    let near_fixed = |i: usize| {
        let pose = tr.state(i).pose;
        shapes.iter().any(|s| {
            s.iter().any(|&p| {
                let r = p - pose.position();
                r.dot(pose.forward()).abs() < ego_half + FREE_LONGITUDINAL && r.dot(pose.left()).abs() < FREE_LONGITUDINAL
            })
        })
    };
    let free: Vec<bool> = (0..c.n())
        .map(|i| c.moving(i) && tr.lane[i].is_some() && !c.in_event(i, |_| true) && !crowded(i) && !near_fixed(i))
        .collect();
    if !free.iter().any(|&b| b) {
        return Verdict::not_applicable(ID, "no free-driving segment");
    }
    let offset = |i: usize| {
        let l = tr.lane[i].unwrap_or(0);
        let band = net.drivable_area(l, c.cfg.edge_margin);
        (tr.frenet(l, i).1 - band.centre()).abs()
    };
    let tol = c.cfg.centering_tolerance;
    let mut f = Finding::new();
    for (i0, i1) in runs(c.n(), |i| free[i] && offset(i) > tol + EPS) {
        if tr.time(i1) - tr.time(i0) + tr.dt() < OFF_CENTRE_MIN - EPS {
            continue;
        }
        let worst = (i0..=i1).map(offset).fold(0.0, f64::max);
        f.minor("drove off the centre of the drivable area", evidence(tr.interval(i0, i1), "centre_offset_m", worst, tol));
    }
    f.finish(ID, "stayed centred while driving freely")
}

fn slow_tsv(c: &Ctx, j: usize, i: usize) -> bool {
    let a = &c.tr.actors[j];
    a.class().is_motor_vehicle()
        && !a.parked
        && c.actor_speed(j, i).is_some_and(|v| v * 3.6 < c.cfg.slow_tsv_threshold)
}

fn in_adjacent_lane(c: &Ctx, j: usize, i: usize) -> bool {
    let net = c.tr.network();
    match (c.tr.actor_lane(j, i), c.tr.lane[i]) {
        (Some(a), Some(e)) => a != e && net.are_adjacent(a, e) && net.lanes[a].direction_matches(&net.lanes[e]),
        _ => false,
    }
}

fn rec_15(c: &Ctx) -> Verdict {
    const ID: &str = "REC-15";
    let tr = c.tr;
    let need = c.cfg.adjacent_pass_clearance;
    let mut seen = false;
    let mut f = Finding::new();
    for j in 0..tr.actors.len() {
        let relevant = |i: usize| {
            c.moving(i)
                && slow_tsv(c, j, i)
                && in_adjacent_lane(c, j, i)
                && (tr.alongside(j, i).is_some() || tr.relative(j, i).is_some_and(|(ahead, _)| ahead > 0.0 && ahead < SLOW_AHEAD))
        };
        seen |= (0..c.n()).any(relevant);
        for ((i0, i1), min) in clearance_runs(c.n(), |i| relevant(i).then(|| tr.alongside(j, i)).flatten()) {
            let ev = evidence(tr.interval(i0, i1), "clearance_m", min, need);
            if min < need - EPS {
                f.violation(format!("passed slow {} at {min:.2} m instead of staying behind", tr.actors[j].id()), ev);
            } else {
                f.measured(ev);
            }
        }
    }
    if !seen {
        return Verdict::not_applicable(ID, "no slow vehicle in an adjacent lane");
    }
    f.finish(ID, "stayed behind slow adjacent vehicles when the gap was too small")
}

fn rec_16(c: &Ctx) -> Verdict {
    const ID: &str = "REC-16";
    let tr = c.tr;
    let cfg = c.cfg;
    let net = tr.network();
    let mut seen = false;
    let mut f = Finding::new();
    for j in 0..tr.actors.len() {
        let tight = |i: usize| {
            c.moving(i)
                && slow_tsv(c, j, i)
                && in_adjacent_lane(c, j, i)
                && tr.alongside(j, i).is_some_and(|g| g < cfg.moving_vehicle_gap - EPS)
        };
        let steps: Vec<usize> = (0..c.n()).filter(|&i| tight(i)).collect();
        if steps.is_empty() {
            continue;
        }
        seen = true;
        let id = tr.actors[j].id();
        let tsv = |i: usize| c.actor_speed(j, i).unwrap_or(0.0);
        let ratio_bad = |i: usize| tight(i) && tsv(i) >= cfg.stop_speed && tr.state(i).speed / tsv(i) > cfg.adjacent_speed_ratio + EPS;
        for (i0, i1) in runs(c.n(), ratio_bad) {
            let r = (i0..=i1).map(|i| tr.state(i).speed / tsv(i)).fold(0.0, f64::max);
            f.violation(format!("passed {id} {r:.2} times its speed"), evidence(tr.interval(i0, i1), "speed_ratio", r, cfg.adjacent_speed_ratio));
        }
        let still_bad = |i: usize| tight(i) && tsv(i) < cfg.stop_speed && tr.speed_kmh(i) > cfg.adjacent_stationary_pass_speed + EPS;
        for (i0, i1) in runs(c.n(), still_bad) {
            let v = (i0..=i1).map(|i| tr.speed_kmh(i)).fold(0.0, f64::max);
            f.violation(
                format!("passed stationary {id} at {v:.0} km/h"),
                evidence(tr.interval(i0, i1), "speed_kmh", v, cfg.adjacent_stationary_pass_speed),
            );
        }
        let overhang = |i: usize| {
            let l = tr.lane[i]?;
            let lane = &net.lanes[l];
            if !lane.kerbside {
                return None;
            }
            let dmax = tr.footprints[i].profile_polygon().iter().map(|&p| lane.frenet(p).1).fold(f64::NEG_INFINITY, f64::max);
            Some(dmax - lane.width / 2.0)
        };
        for (i0, i1) in runs(c.n(), |i| tight(i) && overhang(i).is_some_and(|o| o > EPS)) {
            let o = (i0..=i1).filter_map(overhang).fold(0.0, f64::max);
            f.violation(format!("mirrors beyond the kerb while passing {id}"), evidence(tr.interval(i0, i1), "kerb_overhang_m", o, 0.0));
        }
        let worst = steps.iter().copied().filter(|&i| tsv(i) >= cfg.stop_speed).map(|i| tr.state(i).speed / tsv(i)).fold(0.0, f64::max);
        f.measured(evidence(tr.interval(steps[0], *steps.last().unwrap()), "speed_ratio", worst, cfg.adjacent_speed_ratio));
    }
    if !seen {
        return Verdict::not_applicable(ID, "no reduced-clearance pass of a slow vehicle");
    }
    f.finish(ID, "reduced-clearance passes were slow and inside the kerb")
}

fn rec_17(c: &Ctx) -> Verdict {
    const ID: &str = "REC-17";
    let tr = c.tr;
    let need = c.cfg.fixed_obstacle_gap;
    let mut seen = false;
    let mut f = Finding::new();
    for feat in c.tr.network().features_of(FeatureKind::VegetationStrip) {
        let shape = feat.geometry.shape();
        let gap = |i: usize| c.moving(i).then(|| c.shape_alongside(i, &shape)).flatten();
        seen |= (0..c.n()).any(|i| gap(i).is_some());
        let slack = |i: usize| c.lateral_slack(i, c.is_left(i, &shape));
        let idle = |i: usize| gap(i).is_some_and(|g| g < need - EPS) && slack(i) > SLACK_MIN;
        for (i0, i1) in runs(c.n(), idle) {
            let g = (i0..=i1).filter_map(gap).fold(f64::INFINITY, f64::min);
            let s = (i0..=i1).map(slack).fold(0.0, f64::max);
            f.violation(
                format!("stayed {g:.2} m from {} with {s:.2} m of room to move away", feat.id),
                evidence(tr.interval(i0, i1), "clearance_m", g, need),
            );
        }
    }
    if !seen {
        return Verdict::not_applicable(ID, "no vegetation alongside the ego path");
    }
    f.finish(ID, "used the available room to keep away from vegetation")
}

fn rec_18(c: &Ctx) -> Verdict {
    const ID: &str = "REC-18";
    let straddles: Vec<&ManeuverEvent> = c.events_of(ManeuverKind::Straddle).collect();
    if straddles.is_empty() {
        return Verdict::not_applicable(ID, "no straddle detected");
    }
    let max = c.cfg.straddle_max;
    let mut f = Finding::new();
    for e in straddles {
        let len = e.attr("path_length_m").unwrap_or(0.0);
        let ev = evidence(e.interval(), "path_length_m", len, max);
        if len > max + EPS {
            f.violation(format!("straddled lanes for {len:.0} m"), ev);
        } else {
            f.measured(ev);
        }
    }
    f.finish(ID, "straddles were short")
}

fn rec_19(c: &Ctx) -> Verdict {
    const ID: &str = "REC-19";
    let straddles: Vec<&ManeuverEvent> = c.events_of(ManeuverKind::Straddle).collect();
    if straddles.is_empty() {
        return Verdict::not_applicable(ID, "no straddle detected");
    }
    let mut f = Finding::new();
    for e in straddles {
        if e.flag("adjacent_occupied") {
            f.violation(
                format!("straddled into {} while it was occupied", e.tag_value("secondary_lane").unwrap_or("the adjacent lane")),
                evidence(e.interval(), "adjacent_occupied", 1.0, 0.0),
            );
        }
    }
    f.finish(ID, "never straddled into an occupied lane")
}

struct PedStep {
    j: usize,
    i: usize,
    clearance: f64,
    on_road: bool,
    away: bool,
    still: bool,
}

fn ped_steps(c: &Ctx) -> Vec<PedStep> {
    let tr = c.tr;
    let mut out = Vec::new();
    for j in c.actors_of(|k| k == ActorClass::Pedestrian) {
        for i in (0..c.n()).filter(|&i| c.moving(i)) {
            let Some(clearance) = tr.alongside(j, i) else { continue };
            out.push(PedStep {
                j,
                i,
                clearance,
                on_road: c.actor_on_road(j, i),
                away: tr.lateral_speed_away(j, i).is_some_and(|v| v > super::context::LATERAL_MOTION),
                still: c.actor_speed(j, i).is_some_and(|v| v < PED_STATIONARY),
            });
        }
    }
    out
}

/// Clearance owed to a pedestrian at the given ego speed.
fn ped_required(c: &Ctx, p: &PedStep) -> f64 {
    let cfg = c.cfg;
    let v = c.tr.speed_kmh(p.i);
    match (p.away, p.on_road) {
        (true, true) => cfg.ped_clearance_away_onroad,
        (_, false) => cfg.ped_clearance_away_offroad,
        (false, true) if v < cfg.ped_speed_split => cfg.ped_clearance_lt30,
        (false, true) => cfg.ped_clearance_ge30,
    }
}

/// Folds per-step ladder outcomes into runs per pedestrian.
fn ladder(c: &Ctx, f: &mut Finding, steps: &[&PedStep], required: &dyn Fn(&PedStep) -> f64) {
    let tr = c.tr;
    let cfg = c.cfg;
    let mut by_ped: Vec<usize> = steps.iter().map(|p| p.j).collect();
    by_ped.dedup();
    for j in by_ped {
        let mine: Vec<&&PedStep> = steps.iter().filter(|p| p.j == j).collect();
        let idx = |i: usize| mine.iter().find(|p| p.i == i);
        for (i0, i1) in runs(c.n(), |i| idx(i).is_some()) {
            let run: Vec<&&PedStep> = (i0..=i1).filter_map(idx).copied().collect();
            let worst = run.iter().min_by(|a, b| (a.clearance - required(a)).total_cmp(&(b.clearance - required(b)))).unwrap();
            let need = required(worst);
            let ev = evidence(tr.interval(i0, i1), "clearance_m", worst.clearance, need);
            if worst.clearance >= need - EPS {
                f.measured(ev);
                continue;
            }
            let excusable = |p: &PedStep| {
                tr.speed_kmh(p.i) < cfg.ped_speed_split && p.clearance >= cfg.ped_clearance_exception - EPS
            };
            let id = tr.actors[j].id();
            if run.iter().filter(|p| p.clearance < required(p) - EPS).all(|p| excusable(p)) {
                f.minor(format!("used the reduced clearance exception passing {id}"), ev);
            } else {
                f.violation(format!("passed {id} at {:.2} m", worst.clearance), ev);
            }
        }
    }
}

fn tr68_6_3_2(c: &Ctx) -> Verdict {
    const ID: &str = "TR68-6.3.2";
    let steps = ped_steps(c);
    if steps.is_empty() {
        return Verdict::not_applicable(ID, "no pedestrian passed");
    }
    let mut f = Finding::new();
    let refs: Vec<&PedStep> = steps.iter().collect();
    ladder(c, &mut f, &refs, &|p| ped_required(c, p));
    f.finish(ID, "kept the required clearance from every pedestrian")
}

fn rec_21(c: &Ctx) -> Verdict {
    const ID: &str = "REC-21";
    let steps = ped_steps(c);
    let still: Vec<&PedStep> = steps.iter().filter(|p| p.still && p.on_road).collect();
    if still.is_empty() {
        return Verdict::not_applicable(ID, "no stationary pedestrian on the road passed");
    }
    let cfg = c.cfg;
    let need = |p: &PedStep| {
        if c.tr.speed_kmh(p.i) < cfg.ped_speed_split {
            cfg.ped_clearance_lt30
        } else {
            cfg.ped_clearance_ge30
        }
    };
    let mut f = Finding::new();
    ladder(c, &mut f, &still, &need);
    f.finish(ID, "kept the full clearance from stationary pedestrians")
}

fn rec_20(c: &Ctx) -> Verdict {
    const ID: &str = "REC-20";
    let tr = c.tr;
    let steps = ped_steps(c);
    let on_road: Vec<&PedStep> = steps.iter().filter(|p| p.on_road).collect();
    if on_road.is_empty() {
        return Verdict::not_applicable(ID, "no pedestrian on the road passed");
    }
    let mut f = Finding::new();
    for p in on_road {
        let need = ped_required(c, p);
        if p.clearance >= need - EPS {
            continue;
        }
        let Some(poly) = tr.actor_polygon(p.j, p.i) else { continue };
        let slack = c.lateral_slack(p.i, c.is_left(p.i, poly));
        if slack > SLACK_MIN {
            f.minor(
                format!("left {slack:.2} m of drivable area unused while close to {}", tr.actors[p.j].id()),
                evidence(tr.interval(p.i, p.i), "clearance_m", p.clearance, need),
            );
        }
    }
    f.finish(ID, "used the drivable area to keep away from pedestrians")
}

fn rec_22(c: &Ctx) -> Verdict {
    const ID: &str = "REC-22";
    let tr = c.tr;
    let cfg = c.cfg;
    let steps = ped_steps(c);
    let close: Vec<&PedStep> = steps.iter().filter(|p| p.on_road).collect();
    let stuck: Vec<&ManeuverEvent> = c.events_of(ManeuverKind::Stuck).collect();
    if close.is_empty() && stuck.is_empty() {
        return Verdict::not_applicable(ID, "no pedestrian on the road and no stuck episode");
    }
    let mut f = Finding::new();
    for p in close {
        if p.clearance < cfg.ped_clearance_exception - EPS {
            f.violation(
                format!("kept driving past {} instead of stopping", tr.actors[p.j].id()),
                evidence(tr.interval(p.i, p.i), "clearance_m", p.clearance, cfg.ped_clearance_exception),
            );
        }
    }
    for e in stuck {
        let stuck_s = e.attr("stuck_s").unwrap_or(0.0);
        if e.flag("alert_present") {
            f.measured(evidence(e.interval(), "alert_delay_s", e.attr("alert_delay_s").unwrap_or(0.0), cfg.stuck_alert));
        } else {
            f.violation(
                format!("stuck behind {} without alerting", e.tag_value("blocker").unwrap_or("an obstruction")),
                evidence(e.interval(), "stuck_s", stuck_s, cfg.stuck_alert),
            );
        }
    }
    f.finish(ID, "stopped for pedestrians and raised alerts when stuck")
}

fn btd_93(c: &Ctx) -> Verdict {
    const ID: &str = "BTD-93";
    let tr = c.tr;
    let boxes: Vec<_> = tr.network().features_of(FeatureKind::YellowBox).collect();
    if boxes.is_empty() {
        return Verdict::not_applicable(ID, "no yellow box");
    }
    let mut entered = false;
    let mut f = Finding::new();
    for b in boxes {
        let shape = b.geometry.shape();
        let inside = |i: usize| polygons_intersect(&tr.footprints[i].polygon(), &shape);
        entered |= (0..c.n()).any(inside);
        for &(s0, s1) in &tr.stationary {
            if !(s0..=s1).any(inside) {
                continue;
            }
            let (t0, t1) = tr.interval(s0, s1);
            let turning = c
                .events_of(ManeuverKind::RightTurn)
                .any(|e| e.start <= t1 + 1.0 + EPS && e.end >= t0 - EPS);
            let ev = evidence((t0, t1), "stationary_s", t1 - t0, 0.0);
            if turning {
                f.measured(ev);
            } else {
                f.violation(format!("stopped inside {} while not waiting to turn right", b.id), ev);
            }
        }
    }
    if !entered {
        return Verdict::not_applicable(ID, "ego never entered the yellow box");
    }
    f.finish(ID, "only waited in the yellow box to turn right")
}

fn btd_160c(c: &Ctx) -> Verdict {
    const ID: &str = "BTD-160c";
    if c.tr.lane.iter().all(Option::is_none) {
        return Verdict::not_applicable(ID, "ego never on a lane");
    }
    let mut f = Finding::new();
    for e in c.events_of(ManeuverKind::Weave) {
        let r = e.attr("reversals").unwrap_or(0.0);
        f.violation(
            format!("weaved with {:.1} m swings", e.attr("max_swing_m").unwrap_or(0.0)),
            evidence(e.interval(), "reversals", r, c.cfg.weave_reversals),
        );
    }
    f.finish(ID, "no weaving")
}

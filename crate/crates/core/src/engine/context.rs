//! Per-scenario state shared by the rule evaluators.

use crate::catalog::{Evidence, Outcome, ThresholdConfig, Verdict};
use crate::geometry::{lateral_clearance, longitudinal_overlap, Vec2};
use crate::metrics::{ManeuverEvent, ManeuverKind, Tracks};
use crate::road::{FeatureKind, RoadFeature};
use crate::scenario::ActorClass;

/// Tolerance for comparing a measured value with its threshold.
pub const EPS: f64 = 1e-6;

/// Lateral speed (m/s) above which a road user moves towards or away from the ego path.
pub(crate) const LATERAL_MOTION: f64 = 0.2;

/// Pedestrians slower than this (m/s) count as standing still.
pub(crate) const PED_STATIONARY: f64 = 0.2;

/// Free driving needs no other road user within this distance ahead or behind (m).
pub(crate) const FREE_LONGITUDINAL: f64 = 30.0;

/// ... or within this lateral distance (m).
pub(crate) const FREE_LATERAL: f64 = 6.0;

/// Room kept to far-side road users when working out how far the ego could have moved (m).
pub(crate) const FAR_SIDE_RESERVE: f64 = 1.0;

/// Lateral room (m) below which the ego is treated as having had nowhere to go.
pub(crate) const SLACK_MIN: f64 = 0.1;

pub(crate) struct Ctx<'t, 'a> {
    pub tr: &'t Tracks<'a>,
    pub events: &'t [ManeuverEvent],
    pub cfg: &'t ThresholdConfig,
}

impl<'t, 'a> Ctx<'t, 'a> {
    pub fn events_of(&self, kind: ManeuverKind) -> impl Iterator<Item = &'t ManeuverEvent> + '_ {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn n(&self) -> usize {
        self.tr.len()
    }

    pub fn moving(&self, i: usize) -> bool {
        self.tr.state(i).speed >= self.cfg.stop_speed
    }

    /// Grid indices covered by an event.
    pub fn span(&self, e: &ManeuverEvent) -> (usize, usize) {
        (self.tr.index_at(e.start), self.tr.index_at(e.end))
    }

    pub fn in_event(&self, i: usize, pred: impl Fn(ManeuverKind) -> bool) -> bool {
        let t = self.tr.time(i);
        self.events.iter().any(|e| pred(e.kind) && e.start <= t + EPS && t <= e.end + EPS)
    }

    pub fn actors_of(&self, pred: impl Fn(ActorClass) -> bool) -> Vec<usize> {
        (0..self.tr.actors.len()).filter(|&j| pred(self.tr.actors[j].class())).collect()
    }

    pub fn on_road(&self, p: Vec2) -> bool {
        !self.tr.network().locate(p).is_empty()
    }

    pub fn actor_on_road(&self, j: usize, i: usize) -> bool {
        self.tr.actor_state(j, i).is_some_and(|s| self.on_road(s.pose.position()))
    }

    pub fn actor_speed(&self, j: usize, i: usize) -> Option<f64> {
        self.tr.actor_state(j, i).map(|s| s.speed)
    }

    /// Lateral clearance from the ego profile to a fixed shape while the two overlap longitudinally.
    pub fn shape_alongside(&self, i: usize, shape: &[Vec2]) -> Option<f64> {
        let fp = &self.tr.footprints[i];
        let body = fp.polygon();
        (longitudinal_overlap(fp.pose.forward(), &body, shape) >= 0.0).then(|| lateral_clearance(fp, shape))
    }

    /// Whether `shape` lies on the ego's left at step `i`.
    pub fn is_left(&self, i: usize, shape: &[Vec2]) -> bool {
        let pose = self.tr.state(i).pose;
        let rel: Vec<f64> = shape.iter().map(|&p| (p - pose.position()).dot(pose.left())).collect();
        let lo = rel.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        lo + hi > 0.0
    }

    pub fn fixed_features(&self) -> impl Iterator<Item = &'a RoadFeature> + '_ {
        self.tr
            .network()
            .features
            .iter()
            .filter(|f| matches!(f.kind, FeatureKind::VegetationStrip | FeatureKind::Lamppost))
    }

    /// How far the ego could still have moved away from a hazard on the given
    /// side, staying in the drivable band and clear of road users on the other side.
    pub fn lateral_slack(&self, i: usize, hazard_left: bool) -> f64 {
        let Some(l) = self.tr.lane[i] else { return 0.0 };
        let net = self.tr.network();
        let lane = &net.lanes[l];
        let band = net.drivable_area(l, self.cfg.edge_margin);
        let ds: Vec<f64> = self.tr.footprints[i].profile_polygon().iter().map(|&p| lane.frenet(p).1).collect();
        let dmin = ds.iter().copied().fold(f64::INFINITY, f64::min);
        let dmax = ds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut room = if hazard_left { dmin - band.d_min } else { band.d_max - dmax };
        for j in 0..self.tr.actors.len() {
            let (Some(c), Some(poly)) = (self.tr.alongside(j, i), self.tr.actor_polygon(j, i)) else { continue };
            if self.is_left(i, poly) != hazard_left {
                room = room.min(c - FAR_SIDE_RESERVE);
            }
        }
        room.max(0.0)
    }

    /// Nearest moving road user ahead in the ego lane, with its bumper gap.
    pub fn leader(&self, i: usize) -> Option<(usize, f64)> {
        let lane = self.tr.lane[i]?;
        let ego = self.tr.state(i);
        (0..self.tr.actors.len())
            .filter(|&j| {
                let a = &self.tr.actors[j];
                !a.parked && !matches!(a.class(), ActorClass::Pedestrian | ActorClass::StaticObstacle)
            })
            .filter(|&j| self.tr.actor_lane(j, i) == Some(lane))
            .filter_map(|j| {
                let st = self.tr.actor_state(j, i)?;
                if st.pose.forward().dot(ego.pose.forward()) <= 0.0 || st.speed < self.cfg.stop_speed {
                    return None;
                }
                let (ahead, _) = self.tr.relative(j, i)?;
                let gap = ahead - (self.tr.ego.length + self.tr.actors[j].trace.length) / 2.0;
                (ahead > 0.0).then_some((j, gap))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Evidence with non-finite values replaced so reports stay serializable.
pub(crate) fn evidence(interval: (f64, f64), measure: &str, value: f64, threshold: f64) -> Evidence {
    let clean = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(-f64::MAX, f64::MAX) };
    Evidence::new(interval, measure, clean(value), clean(threshold))
}

/// Folds several checks of one rule into a single verdict.
#[derive(Debug, Default)]
pub(crate) struct Finding {
    outcome: Option<Outcome>,
    evidence: Vec<Evidence>,
    notes: Vec<String>,
}

impl Finding {
    pub fn new() -> Self {
        Finding::default()
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome.unwrap_or(Outcome::Pass)
    }

    pub fn raise(&mut self, o: Outcome, note: impl Into<String>, ev: Option<Evidence>) {
        if o.rank() > self.outcome().rank() {
            self.outcome = Some(o);
        }
        let note = note.into();
        if !self.notes.contains(&note) {
            self.notes.push(note);
        }
        self.evidence.extend(ev);
    }

    pub fn violation(&mut self, note: impl Into<String>, ev: Evidence) {
        self.raise(Outcome::Violation, note, Some(ev));
    }

    pub fn minor(&mut self, note: impl Into<String>, ev: Evidence) {
        self.raise(Outcome::MinorNonConformity, note, Some(ev));
    }

    pub fn inconclusive(&mut self, note: impl Into<String>) {
        self.raise(Outcome::Inconclusive, note, None);
    }

    /// Records a measurement that did not breach anything.
    pub fn measured(&mut self, ev: Evidence) {
        self.evidence.push(ev);
    }

    pub fn finish(self, rule: &str, ok: impl Into<String>) -> Verdict {
        let outcome = self.outcome();
        let message = if outcome == Outcome::Pass {
            ok.into()
        } else {
            let shown = self.notes.len().min(3);
            let mut m = self.notes[..shown].join("; ");
            if self.notes.len() > shown {
                m.push_str(&format!(" (+{} more)", self.notes.len() - shown));
            }
            m
        };
        Verdict { rule: rule.to_string(), outcome, evidence: self.evidence, message }
    }
}

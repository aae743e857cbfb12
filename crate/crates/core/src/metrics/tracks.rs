//! Every actor resampled onto the ego grid, plus the per-step lane and
//! proximity data the detectors and rules share.

use crate::catalog::ThresholdConfig;
use crate::geometry::{lateral_clearance, longitudinal_overlap, Footprint, Vec2};
use crate::metrics::kinematics::{kinematics, KinematicSeries};
use crate::metrics::ttc::Body;
use crate::road::RoadNetwork;
use crate::scenario::{resample, resample_on_grid, ActorClass, ActorTrace, ResampleError, Scenario, State, StateSeries};

#[derive(Debug, Clone)]
pub struct ActorTrack<'a> {
    pub trace: &'a ActorTrace,
    pub series: StateSeries,
    /// Never moves faster than the stop speed during the recording.
    pub parked: bool,
    polygons: Vec<Option<Vec<Vec2>>>,
    lanes: Vec<Option<usize>>,
    clearance: Vec<Option<f64>>,
}

impl ActorTrack<'_> {
    pub fn id(&self) -> &str {
        &self.trace.id
    }

    pub fn class(&self) -> ActorClass {
        self.trace.class
    }

    pub fn is_vru(&self) -> bool {
        self.trace.class.is_vru()
    }
}

#[derive(Debug, Clone)]
pub struct Tracks<'a> {
    pub scenario: &'a Scenario,
    pub ego: &'a ActorTrace,
    pub series: StateSeries,
    pub kin: KinematicSeries,
    pub footprints: Vec<Footprint>,
    pub coverage: Vec<Vec<f64>>,
    /// Established lane per step, carried across gaps where no lane holds a majority.
    pub lane: Vec<Option<usize>>,
    pub actors: Vec<ActorTrack<'a>>,
    /// Inclusive index ranges where the ego is stationary for at least the minimum duration.
    pub stationary: Vec<(usize, usize)>,
}

/// Fills `None` entries with the previous value, or the next one at the start.
fn carry(v: &mut [Option<usize>]) {
    let first = v.iter().flatten().next().copied();
    let mut last = first;
    for x in v.iter_mut() {
        match x {
            Some(l) => last = Some(*l),
            None => *x = last,
        }
    }
}

impl<'a> Tracks<'a> {
    pub fn build(scenario: &'a Scenario, cfg: &ThresholdConfig) -> Result<Self, ResampleError> {
        let net = &scenario.network;
        let ego = scenario.ego_trace();
        let series = resample(ego, cfg.resample_dt)?;
        let kin = kinematics(&series, cfg.jerk_window, Some(net));
        let footprints: Vec<Footprint> = series.states.iter().map(|s| ego.footprint(s.pose)).collect();
        let coverage: Vec<Vec<f64>> = footprints.iter().map(|f| net.coverage(f)).collect();
        let mut lane: Vec<Option<usize>> = coverage
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .filter(|(_, &v)| v > 0.5)
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
            })
            .collect();
        carry(&mut lane);

        let mut actors = Vec::new();
        for a in scenario.actors.iter().filter(|a| a.id != ego.id) {
            let s = resample_on_grid(a, series.t0, series.dt)?;
            let parked = s.is_static || s.states.iter().all(|st| st.speed < cfg.stop_speed);
            let mut polygons = Vec::with_capacity(series.len());
            let mut lanes = Vec::with_capacity(series.len());
            let mut clearance = Vec::with_capacity(series.len());
            for (i, fp) in footprints.iter().enumerate() {
                let st = s.at_grid(series.k0 + i as i64);
                let poly = st.map(|st| a.footprint(st.pose).polygon());
                lanes.push(poly.as_ref().and_then(|p| established(net, p)));
                clearance.push(poly.as_ref().and_then(|p| {
                    let body = fp.polygon();
                    (longitudinal_overlap(fp.pose.forward(), &body, p) > 0.0).then(|| lateral_clearance(fp, p))
                }));
                polygons.push(poly);
            }
            actors.push(ActorTrack { trace: a, series: s, parked, polygons, lanes, clearance });
        }

        let min_len = (cfg.stop_min_duration / series.dt - 1e-9).ceil() as usize;
        let mut stationary = Vec::new();
        let mut i = 0;
        let n = series.len();
        while i < n {
            if series.states[i].speed < cfg.stop_speed {
                let j = (i..n).take_while(|&k| series.states[k].speed < cfg.stop_speed).last().unwrap_or(i);
                if j - i >= min_len {
                    stationary.push((i, j));
                }
                i = j + 1;
            } else {
                i += 1;
            }
        }
        Ok(Tracks { scenario, ego, series, kin, footprints, coverage, lane, actors, stationary })
    }

    pub fn network(&self) -> &'a RoadNetwork {
        &self.scenario.network
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.series.dt
    }

    pub fn time(&self, i: usize) -> f64 {
        self.series.states[i].t
    }

    pub fn state(&self, i: usize) -> &State {
        &self.series.states[i]
    }

    pub fn speed_kmh(&self, i: usize) -> f64 {
        self.series.states[i].speed * 3.6
    }

    pub fn interval(&self, i0: usize, i1: usize) -> (f64, f64) {
        (self.time(i0), self.time(i1))
    }

    /// Grid index nearest to `t`, clamped to the series.
    pub fn index_at(&self, t: f64) -> usize {
        let k = ((t - self.time(0)) / self.dt()).round();
        (k.max(0.0) as usize).min(self.len() - 1)
    }

    pub fn ego_body(&self, i: usize) -> Body {
        let s = self.state(i);
        Body { pose: s.pose, speed: s.speed, length: self.ego.length, width: self.ego.width }
    }

    pub fn actor_state(&self, j: usize, i: usize) -> Option<&State> {
        self.actors[j].series.at_grid(self.series.k0 + i as i64)
    }

    pub fn actor_body(&self, j: usize, i: usize) -> Option<Body> {
        let a = &self.actors[j];
        self.actor_state(j, i).map(|s| Body {
            pose: s.pose,
            speed: s.speed,
            length: a.trace.length,
            width: a.trace.width,
        })
    }

    pub fn actor_polygon(&self, j: usize, i: usize) -> Option<&[Vec2]> {
        self.actors[j].polygons[i].as_deref()
    }

    pub fn actor_lane(&self, j: usize, i: usize) -> Option<usize> {
        self.actors[j].lanes[i]
    }

    /// Lateral clearance from the ego profile to actor `j` while the two are
    /// alongside each other; `None` when not alongside or absent.
    pub fn alongside(&self, j: usize, i: usize) -> Option<f64> {
        self.actors[j].clearance[i]
    }

    /// Actor centre in the ego frame: (ahead, left).
    pub fn relative(&self, j: usize, i: usize) -> Option<(f64, f64)> {
        let e = self.state(i).pose;
        self.actor_state(j, i).map(|s| {
            let r = s.pose.position() - e.position();
            (r.dot(e.forward()), r.dot(e.left()))
        })
    }

    /// Lateral speed of actor `j` away from the ego's path (positive = away).
    pub fn lateral_speed_away(&self, j: usize, i: usize) -> Option<f64> {
        let e = self.state(i).pose;
        let s = self.actor_state(j, i)?;
        let side = (s.pose.position() - e.position()).dot(e.left());
        let v = s.pose.forward() * s.speed;
        let lat = v.dot(e.left());
        Some(if side >= 0.0 { lat } else { -lat })
    }

    /// Ego `(s, d)` on lane `l` using the body centre.
    pub fn frenet(&self, l: usize, i: usize) -> (f64, f64) {
        self.network().lanes[l].frenet(self.state(i).pose.position())
    }

    /// Ego front point `s` on lane `l`.
    pub fn front_s(&self, l: usize, i: usize) -> f64 {
        self.network().lanes[l].frenet(self.footprints[i].front_center()).0
    }

    pub fn actor_index(&self, id: &str) -> Option<usize> {
        self.actors.iter().position(|a| a.trace.id == id)
    }

    pub fn path_length(&self, i0: usize, i1: usize) -> f64 {
        (i0..i1)
            .map(|k| self.state(k).pose.position().distance(self.state(k + 1).pose.position()))
            .sum()
    }
}

fn established(net: &RoadNetwork, poly: &[Vec2]) -> Option<usize> {
    net.lanes
        .iter()
        .enumerate()
        .map(|(i, l)| (i, l.coverage_of(poly)))
        .filter(|(_, c)| *c > 0.5)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

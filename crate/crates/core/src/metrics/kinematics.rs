//! Speed, acceleration and lateral jerk over a uniform state series.

use crate::geometry::Vec2;
use crate::road::RoadNetwork;
use crate::scenario::StateSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct KinematicSeries {
    pub dt: f64,
    pub speed: Vec<f64>,
    pub long_accel: Vec<f64>,
    pub lat_accel: Vec<f64>,
    /// Trailing moving average of lateral jerk; `None` until a full window is available.
    pub lat_jerk: Vec<Option<f64>>,
    /// Per step: `(lane index, s, d)` for each lane containing the position.
    pub frenet: Vec<Vec<(usize, f64, f64)>>,
}

impl KinematicSeries {
    pub fn len(&self) -> usize {
        self.speed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speed.is_empty()
    }
}

fn central<T: Copy>(v: &[T], i: usize) -> (T, T, usize) {
    let n = v.len();
    let lo = i.saturating_sub(1);
    let hi = (i + 1).min(n - 1);
    (v[lo], v[hi], hi - lo)
}

/// Computes accelerations by central differences. Lateral acceleration is the
/// component perpendicular to the heading; jerk is its derivative averaged
/// over `jerk_window` seconds.
pub fn kinematics(series: &StateSeries, jerk_window: f64, network: Option<&RoadNetwork>) -> KinematicSeries {
    let n = series.len();
    let dt = series.dt;
    let speed: Vec<f64> = series.states.iter().map(|s| s.speed).collect();
    let pos: Vec<Vec2> = series.states.iter().map(|s| s.pose.position()).collect();
    let mut long_accel = vec![0.0; n];
    let mut lat_accel = vec![0.0; n];
    if n >= 2 {
        for i in 0..n {
            let (a, b, span) = central(&speed, i);
            long_accel[i] = (b - a) / (span as f64 * dt);
        }
    }
    if n >= 3 {
        for i in 1..n - 1 {
            let acc = (pos[i + 1] - pos[i] * 2.0 + pos[i - 1]) * (1.0 / (dt * dt));
            lat_accel[i] = acc.dot(series.states[i].pose.left());
        }
        lat_accel[0] = lat_accel[1];
        lat_accel[n - 1] = lat_accel[n - 2];
    }
    let mut raw_jerk = vec![0.0; n];
    if n >= 2 {
        for i in 0..n {
            let (a, b, span) = central(&lat_accel, i);
            raw_jerk[i] = (b - a) / (span as f64 * dt);
        }
    }
    let w = ((jerk_window / dt).round() as usize).max(1);
    let lat_jerk = (0..n)
        .map(|i| {
            if n < 3 || i + 1 < w {
                None
            } else {
                Some(raw_jerk[i + 1 - w..=i].iter().sum::<f64>() / w as f64)
            }
        })
        .collect();
    let frenet = match network {
        Some(net) => pos.iter().map(|&p| net.locate(p)).collect(),
        None => vec![Vec::new(); n],
    };
    KinematicSeries { dt, speed, long_accel, lat_accel, lat_jerk, frenet }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{resample, ActorClass, ActorTrace, Sample};

    fn trace(f: impl Fn(f64) -> (f64, f64, f64, f64), t_end: f64) -> ActorTrace {
        let mut a = ActorTrace::new("ego", ActorClass::Car, 4.5, 1.8);
        let n = (t_end / 0.1).round() as usize;
        for k in 0..=n {
            let t = k as f64 * 0.1;
            let (x, y, h, v) = f(t);
            let mut s = Sample::new(t, x, y, h);
            s.speed = Some(v);
            a.samples.push(s);
        }
        a
    }

    #[test]
    fn straight_line_has_no_lateral_terms() {
        let s = resample(&trace(|t| (10.0 * t, 0.0, 0.0, 10.0), 5.0), 0.1).unwrap();
        let k = kinematics(&s, 0.5, None);
        assert!(k.lat_accel.iter().all(|a| a.abs() < 1e-9));
        assert!(k.lat_jerk.iter().flatten().all(|j| j.abs() < 1e-9));
        assert!(k.lat_jerk[0].is_none());
    }

    #[test]
    fn circular_motion_matches_v2_over_r() {
        let (r, v) = (50.0, 10.0);
        let w = v / r;
        let s = resample(
            &trace(|t| (r * (w * t).sin(), r - r * (w * t).cos(), w * t, v), 10.0),
            0.1,
        )
        .unwrap();
        let k = kinematics(&s, 0.5, None);
        for a in &k.lat_accel[1..k.len() - 1] {
            assert!((a - v * v / r).abs() < 0.05 * v * v / r, "{a}");
        }
    }
}

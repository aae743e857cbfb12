//! Time-to-collision along a shared lane and to a conflict region.

use thiserror::Error;

use crate::geometry::{polygon_contains, Polyline, Pose2, Vec2};
use crate::road::Lane;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("actors do not share the lane")]
pub struct NotOnLane;

/// Minimal rigid-body state for TTC queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub pose: Pose2,
    pub speed: f64,
    pub length: f64,
    pub width: f64,
}

/// Gap over closure speed; `None` when the gap is not closing.
pub fn ttc_from_gap(gap: f64, closure: f64) -> Option<f64> {
    if !(closure > 0.0) {
        return None;
    }
    Some(gap.max(0.0) / closure)
}

/// Speed component along the lane's travel direction at the body's position.
pub fn along_speed(lane: &Lane, b: &Body) -> f64 {
    let (s, _) = lane.frenet(b.pose.position());
    let u = lane.travel.tangent_at(s.clamp(0.0, lane.length()));
    b.speed * b.pose.forward().dot(u)
}

/// Bumper-to-bumper gap between two bodies measured along `lane`, front minus rear.
pub fn lane_gap(lane: &Lane, rear: &Body, front: &Body) -> f64 {
    let (sr, _) = lane.frenet(rear.pose.position());
    let (sf, _) = lane.frenet(front.pose.position());
    sf - sr - (rear.length + front.length) / 2.0
}

/// Longitudinal TTC between a rear and a front body on the same lane.
pub fn ttc_longitudinal(lane: &Lane, rear: &Body, front: &Body) -> Result<Option<f64>, NotOnLane> {
    for b in [rear, front] {
        let (_, d) = lane.frenet(b.pose.position());
        if d.abs() > (lane.width + b.width) / 2.0 {
            return Err(NotOnLane);
        }
    }
    let closure = along_speed(lane, rear) - along_speed(lane, front);
    Ok(ttc_from_gap(lane_gap(lane, rear, front), closure))
}

/// First parameter in `[0, 1]` at which segment `p -> q` enters `poly`.
fn segment_entry(p: Vec2, q: Vec2, poly: &[Vec2]) -> Option<f64> {
    if polygon_contains(poly, p) {
        return Some(0.0);
    }
    let r = q - p;
    let mut best: Option<f64> = None;
    for i in 0..poly.len() {
        let a = poly[i];
        let e = poly[(i + 1) % poly.len()] - a;
        let den = r.cross(e);
        if den.abs() < 1e-15 {
            continue;
        }
        let t = (a - p).cross(e) / den;
        let u = (a - p).cross(r) / den;
        if (0.0..=1.0).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u) {
            best = Some(best.map_or(t, |b: f64| b.min(t)));
        }
    }
    best
}

/// Arc length of the first point at or after `s_from` on `path` that lies in any region polygon.
pub fn first_hit_along(path: &Polyline, s_from: f64, region: &[Vec<Vec2>]) -> Option<f64> {
    let pts = path.points();
    let mut s0 = 0.0;
    for w in pts.windows(2) {
        let len = w[0].distance(w[1]);
        let s1 = s0 + len;
        if s1 >= s_from {
            let a = if s_from > s0 { path.point_at(s_from) } else { w[0] };
            let sa = s_from.max(s0);
            let hit = region
                .iter()
                .filter_map(|poly| segment_entry(a, w[1], poly))
                .fold(None, |m: Option<f64>, t| Some(m.map_or(t, |b| b.min(t))));
            if let Some(t) = hit {
                return Some(sa + t * (s1 - sa));
            }
        }
        s0 = s1;
    }
    None
}

/// Time for an actor whose front is at `s_front` on `path`, moving at `speed`,
/// to reach the swept region. `None` when stationary, receding or never reaching it.
pub fn ttc_conflict_point(region: &[Vec<Vec2>], path: &Polyline, s_front: f64, speed: f64) -> Option<f64> {
    if !(speed > 0.0) {
        return None;
    }
    first_hit_along(path, s_front, region).map(|s| (s - s_front) / speed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::road::TravelDirection;

    fn lane() -> Lane {
        let line = Polyline::new(vec![Vec2::new(0.0, 0.0), Vec2::new(500.0, 0.0)]).unwrap();
        Lane::new("a", line, 3.5, TravelDirection::Forward)
    }

    fn body(x: f64, v: f64) -> Body {
        Body { pose: Pose2::new(x, 0.0, 0.0), speed: v, length: 4.0, width: 1.8 }
    }

    #[test]
    fn gap_over_closure() {
        let l = lane();
        // 90 m bumper gap, closing at 10 m/s.
        let t = ttc_longitudinal(&l, &body(0.0, 20.0), &body(94.0, 10.0)).unwrap();
        assert!((t.unwrap() - 9.0).abs() < 1e-12);
        assert_eq!(ttc_longitudinal(&l, &body(0.0, 10.0), &body(94.0, 10.0)).unwrap(), None);
        let off = Body { pose: Pose2::new(10.0, 6.0, 0.0), ..body(0.0, 1.0) };
        assert_eq!(ttc_longitudinal(&l, &off, &body(94.0, 1.0)), Err(NotOnLane));
    }

    #[test]
    fn conflict_point_straight() {
        let path = Polyline::new(vec![Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0)]).unwrap();
        let square = vec![Vec2::new(40.0, -2.0), Vec2::new(44.0, -2.0), Vec2::new(44.0, 2.0), Vec2::new(40.0, 2.0)];
        let t = ttc_conflict_point(&[square.clone()], &path, 10.0, 10.0).unwrap();
        assert!((t - 3.0).abs() < 1e-12);
        assert_eq!(ttc_conflict_point(&[square], &path, 10.0, 0.0), None);
    }
}

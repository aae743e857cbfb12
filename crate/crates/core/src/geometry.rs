//! Planar primitives: poses, polylines with Frenet projection, oriented
//! rectangles, lateral clearance and line-of-sight sampling.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("polyline needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("polyline segment {index} has zero length")]
    DegenerateSegment { index: usize },
    #[error("non-finite coordinate in input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(a: f64) -> Self {
        Self::new(a.cos(), a.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product; positive when `o` is to the left.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Left-hand perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn unit(self) -> Vec2 {
        let n = self.norm();
        if n > 0.0 {
            self * (1.0 / n)
        } else {
            self
        }
    }

    pub fn lerp(self, o: Vec2, a: f64) -> Vec2 {
        self + (o - self) * a
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Signed shortest rotation from `from` to `to`.
pub fn angle_diff(to: f64, from: f64) -> f64 {
    normalize_angle(to - from)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    /// Radians, counter-clockwise from +x, kept in (-pi, pi].
    pub heading: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn forward(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }

    pub fn left(&self) -> Vec2 {
        self.forward().perp()
    }

    /// Maps a point from this pose's local frame (x forward, y left) to world.
    pub fn to_world(&self, local: Vec2) -> Vec2 {
        self.position() + self.forward() * local.x + self.left() * local.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetCoord {
    /// Arc length along the reference line.
    pub s: f64,
    /// Signed lateral offset, positive to the left of the direction of travel.
    pub d: f64,
    /// Set when the nearest point is an end of the line and the query lies beyond it.
    pub clamped: bool,
}

/// A validated polyline with cumulative arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Vec2>,
    cum: Vec<f64>,
}

impl Polyline {
    pub fn new(points: Vec<Vec2>) -> Result<Self, GeometryError> {
        if points.len() < 2 {
            return Err(GeometryError::TooFewPoints(points.len()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut cum = Vec::with_capacity(points.len());
        cum.push(0.0);
        for (i, w) in points.windows(2).enumerate() {
            let len = w[0].distance(w[1]);
            if len <= 1e-12 {
                return Err(GeometryError::DegenerateSegment { index: i });
            }
            cum.push(cum[i] + len);
        }
        Ok(Self { points, cum })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cum.last().expect("validated polyline")
    }

    pub fn reversed(&self) -> Polyline {
        let mut pts = self.points.clone();
        pts.reverse();
        Polyline::new(pts).expect("reversal keeps validity")
    }

    fn segment_index(&self, s: f64) -> usize {
        let n = self.points.len() - 1;
        match self.cum.partition_point(|&c| c <= s) {
            0 => 0,
            k => (k - 1).min(n - 1),
        }
    }

    fn segment_dir(&self, i: usize) -> Vec2 {
        (self.points[i + 1] - self.points[i]).unit()
    }

    /// Point at arc length `s`, extrapolating linearly past either end.
    pub fn point_at(&self, s: f64) -> Vec2 {
        let i = self.segment_index(s);
        self.points[i] + self.segment_dir(i) * (s - self.cum[i])
    }

    pub fn tangent_at(&self, s: f64) -> Vec2 {
        self.segment_dir(self.segment_index(s))
    }

    pub fn heading_at(&self, s: f64) -> f64 {
        let t = self.tangent_at(s);
        t.y.atan2(t.x)
    }

    /// Inverse of [`frenet_project`] for unclamped coordinates.
    pub fn from_frenet(&self, s: f64, d: f64) -> Vec2 {
        self.point_at(s) + self.tangent_at(s).perp() * d
    }

    /// Sub-polyline between two arc lengths (clamped to the line).
    pub fn slice(&self, s0: f64, s1: f64) -> Vec<Vec2> {
        let (a, b) = (s0.max(0.0), s1.min(self.length()));
        if b <= a {
            return vec![self.point_at(a)];
        }
        let mut out = vec![self.point_at(a)];
        for (p, &c) in self.points.iter().zip(&self.cum) {
            if c > a && c < b {
                out.push(*p);
            }
        }
        out.push(self.point_at(b));
        out
    }
}

/// Nearest-point projection onto a polyline. Ties resolve to the smallest `s`.
pub fn frenet_project(line: &Polyline, p: Vec2) -> FrenetCoord {
    let pts = &line.points;
    let last = pts.len() - 2;
    let mut best = (f64::INFINITY, 0usize, 0.0f64, 0.0f64);
    for i in 0..=last {
        let a = pts[i];
        let ab = pts[i + 1] - a;
        let raw = (p - a).dot(ab) / ab.norm_sq();
        let t = raw.clamp(0.0, 1.0);
        let dist = (p - (a + ab * t)).norm_sq();
        if dist < best.0 - 1e-18 {
            best = (dist, i, t, raw);
        }
    }
    let (dist_sq, i, t, raw) = best;
    let seg_len = line.cum[i + 1] - line.cum[i];
    let u = line.segment_dir(i);
    let foot = pts[i] + (pts[i + 1] - pts[i]) * t;
    if i == 0 && raw < 0.0 {
        return FrenetCoord {
            s: 0.0,
            d: u.cross(p - pts[0]),
            clamped: true,
        };
    }
    if i == last && raw > 1.0 {
        return FrenetCoord {
            s: line.length(),
            d: u.cross(p - pts[i + 1]),
            clamped: true,
        };
    }
    let s = line.cum[i] + t * seg_len;
    let interior_vertex = (t == 0.0 && i > 0) || (t == 1.0 && i < last);
    let d = if interior_vertex {
        let v = if t == 0.0 { i } else { i + 1 };
        let avg = line.segment_dir(v - 1) + line.segment_dir(v);
        let side = avg.cross(p - pts[v]);
        dist_sq.sqrt() * if side < 0.0 { -1.0 } else { 1.0 }
    } else {
        u.cross(p - foot)
    };
    FrenetCoord {
        s,
        d,
        clamped: false,
    }
}

/// Shoelace area; positive for counter-clockwise winding.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * acc
}

pub fn polygon_area(poly: &[Vec2]) -> f64 {
    signed_area(poly).abs()
}

pub fn centroid(poly: &[Vec2]) -> Vec2 {
    let n = poly.len().max(1) as f64;
    poly.iter().fold(Vec2::ZERO, |acc, &p| acc + p) * (1.0 / n)
}

/// Even-odd point-in-polygon test. Single points and segments contain nothing.
pub fn polygon_contains(poly: &[Vec2], p: Vec2) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) - 1e-12
        && p.x <= a.x.max(b.x) + 1e-12
        && p.y >= a.y.min(b.y) - 1e-12
        && p.y <= a.y.max(b.y) + 1e-12
}

/// Closed segment intersection (touching counts).
pub fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let eps = 1e-12;
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
    {
        return true;
    }
    (d1.abs() <= eps && on_segment(q1, q2, p1))
        || (d2.abs() <= eps && on_segment(q1, q2, p2))
        || (d3.abs() <= eps && on_segment(p1, p2, q1))
        || (d4.abs() <= eps && on_segment(p1, p2, q2))
}

fn edges(poly: &[Vec2]) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
    let n = poly.len();
    (0..n).map(move |i| (poly[i], poly[(i + 1) % n]))
}

/// True when the segment touches or crosses the polygon or lies inside it.
pub fn segment_hits_polygon(a: Vec2, b: Vec2, poly: &[Vec2]) -> bool {
    if poly.len() == 1 {
        return segments_intersect(a, b, poly[0], poly[0]);
    }
    polygon_contains(poly, a)
        || polygon_contains(poly, b)
        || edges(poly).any(|(p, q)| segments_intersect(a, b, p, q))
}

/// Shapes intersect when an edge crosses or either contains a vertex of the other.
pub fn polygons_intersect(a: &[Vec2], b: &[Vec2]) -> bool {
    if a.is_empty() || b.is_empty() {
        return false;
    }
    if b.iter().any(|&p| polygon_contains(a, p)) || a.iter().any(|&p| polygon_contains(b, p)) {
        return true;
    }
    if a.len() == 1 || b.len() == 1 {
        let (pt, other) = if a.len() == 1 { (a[0], b) } else { (b[0], a) };
        return other.len() >= 2 && edges(other).any(|(p, q)| segments_intersect(pt, pt, p, q));
    }
    edges(a).any(|(p, q)| edges(b).any(|(r, s)| segments_intersect(p, q, r, s)))
}

/// Sutherland-Hodgman clip keeping the side where `n . p >= c`.
pub fn clip_halfplane(poly: &[Vec2], n: Vec2, c: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let len = poly.len();
    for i in 0..len {
        let cur = poly[i];
        let nxt = poly[(i + 1) % len];
        let fc = n.dot(cur) - c;
        let fn_ = n.dot(nxt) - c;
        if fc >= 0.0 {
            out.push(cur);
        }
        if (fc >= 0.0) != (fn_ >= 0.0) {
            let t = fc / (fc - fn_);
            out.push(cur.lerp(nxt, t));
        }
    }
    out
}

/// Andrew's monotone chain; counter-clockwise output without collinear points.
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (a.x - b.x).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Vec2> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vec2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 1e-12
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Oriented rectangle for a road user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub pose: Pose2,
    pub length: f64,
    pub width: f64,
    /// Total width added by protruding mirrors; only used for the profile outline.
    pub mirror_extra: f64,
}

impl Footprint {
    pub fn new(pose: Pose2, length: f64, width: f64) -> Self {
        Self {
            pose,
            length,
            width,
            mirror_extra: 0.0,
        }
    }

    pub fn with_mirrors(mut self, extra: f64) -> Self {
        self.mirror_extra = extra;
        self
    }

    fn rect(&self, width: f64) -> Vec<Vec2> {
        let (hl, hw) = (self.length / 2.0, width / 2.0);
        [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)]
            .into_iter()
            .map(|(x, y)| self.pose.to_world(Vec2::new(x, y)))
            .collect()
    }

    /// Body corners, counter-clockwise, starting rear-right.
    pub fn polygon(&self) -> Vec<Vec2> {
        self.rect(self.width)
    }

    /// Body plus mirror protrusion.
    pub fn profile_polygon(&self) -> Vec<Vec2> {
        self.rect(self.width + self.mirror_extra)
    }

    pub fn front_center(&self) -> Vec2 {
        self.pose.to_world(Vec2::new(self.length / 2.0, 0.0))
    }

    pub fn rear_center(&self) -> Vec2 {
        self.pose.to_world(Vec2::new(-self.length / 2.0, 0.0))
    }
}

/// Pointwise footprint polygon, counter-clockwise.
pub fn footprint_polygon(pose: Pose2, length: f64, width: f64) -> Vec<Vec2> {
    Footprint::new(pose, length, width).polygon()
}

fn interval_along(axis: Vec2, shape: &[Vec2]) -> (f64, f64) {
    shape.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let v = axis.dot(*p);
        (lo.min(v), hi.max(v))
    })
}

/// Gap between the projections of two shapes onto `axis`; zero when they overlap.
pub fn lateral_clearance_along(axis: Vec2, a: &[Vec2], b: &[Vec2]) -> f64 {
    let axis = axis.unit();
    let (alo, ahi) = interval_along(axis, a);
    let (blo, bhi) = interval_along(axis, b);
    (blo - ahi).max(alo - bhi).max(0.0)
}

/// Lateral gap measured perpendicular to the ego heading.
pub fn lateral_clearance(ego: &Footprint, other: &[Vec2]) -> f64 {
    lateral_clearance_along(ego.pose.left(), &ego.profile_polygon(), other)
}

/// Overlap of two shapes' projections on `axis` (positive means overlapping).
pub fn longitudinal_overlap(axis: Vec2, a: &[Vec2], b: &[Vec2]) -> f64 {
    let axis = axis.unit();
    let (alo, ahi) = interval_along(axis, a);
    let (blo, bhi) = interval_along(axis, b);
    ahi.min(bhi) - alo.max(blo)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineOfSight {
    pub fraction: f64,
    pub visible: bool,
}

pub const LOS_SAMPLES: usize = 64;

/// Evenly spaced points around a closed boundary (a single point repeats).
pub fn boundary_samples(poly: &[Vec2], n: usize) -> Vec<Vec2> {
    if poly.len() == 1 {
        return vec![poly[0]; n];
    }
    let perim: f64 = edges(poly).map(|(a, b)| a.distance(b)).sum();
    let mut out = Vec::with_capacity(n);
    let mut edge_iter = edges(poly).peekable();
    let (mut a, mut b) = edge_iter.next().expect("non-empty polygon");
    let mut walked = 0.0;
    for k in 0..n {
        let target = (k as f64 + 0.5) * perim / n as f64;
        while walked + a.distance(b) < target {
            walked += a.distance(b);
            match edge_iter.next() {
                Some(e) => (a, b) = e,
                None => break,
            }
        }
        let len = a.distance(b);
        let t = if len > 0.0 { ((target - walked) / len).min(1.0) } else { 0.0 };
        out.push(a.lerp(b, t));
    }
    out
}

/// Fraction of target boundary samples reachable from `origin` without
/// touching any blocker. Visible when the fraction exceeds `threshold`.
pub fn line_of_sight(
    origin: Vec2,
    target: &[Vec2],
    blockers: &[Vec<Vec2>],
    samples: usize,
    threshold: f64,
) -> LineOfSight {
    let pts = boundary_samples(target, samples.max(1));
    let clear = pts
        .iter()
        .filter(|&&q| !blockers.iter().any(|b| segment_hits_polygon(origin, q, b)))
        .count();
    let fraction = clear as f64 / pts.len() as f64;
    LineOfSight {
        fraction,
        visible: fraction > threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(len: f64) -> Polyline {
        Polyline::new(vec![Vec2::new(0.0, 0.0), Vec2::new(len, 0.0)]).unwrap()
    }

    #[test]
    fn projects_left_offset_as_positive() {
        let f = frenet_project(&straight(100.0), Vec2::new(10.0, 1.2));
        assert!((f.s - 10.0).abs() < 1e-12 && (f.d - 1.2).abs() < 1e-12);
        assert!(!f.clamped);
    }

    #[test]
    fn clamps_past_the_end() {
        let f = frenet_project(&straight(100.0), Vec2::new(105.0, 0.0));
        assert_eq!(f.s, 100.0);
        assert!(f.d.abs() < 1e-12);
        assert!(f.clamped);
    }

    #[test]
    fn rejects_degenerate_segment() {
        let e = Polyline::new(vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 0.0)]).unwrap_err();
        assert_eq!(e, GeometryError::DegenerateSegment { index: 0 });
    }

    #[test]
    fn clearance_to_point_and_parked_car() {
        let ego = Footprint::new(Pose2::new(0.0, 0.0, 0.0), 4.0, 2.0);
        assert!((lateral_clearance(&ego, &[Vec2::new(0.0, 2.1)]) - 1.1).abs() < 1e-12);
        let parked = footprint_polygon(Pose2::new(0.0, 3.0, 0.0), 4.0, 2.0);
        assert!((lateral_clearance(&ego, &parked) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirror_extra_narrows_clearance() {
        let ego = Footprint::new(Pose2::new(0.0, 0.0, 0.0), 4.0, 2.0).with_mirrors(0.4);
        assert!((lateral_clearance(&ego, &[Vec2::new(0.0, 2.1)]) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn heading_normalisation_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn half_blocked_target() {
        // Target is a vertical segment-like thin box; blocker hides its lower half.
        let target = vec![
            Vec2::new(10.0, -1.0),
            Vec2::new(10.01, -1.0),
            Vec2::new(10.01, 1.0),
            Vec2::new(10.0, 1.0),
        ];
        let blocker = vec![
            Vec2::new(5.0, -5.0),
            Vec2::new(5.2, -5.0),
            Vec2::new(5.2, 0.0),
            Vec2::new(5.0, 0.0),
        ];
        let los = line_of_sight(Vec2::ZERO, &target, &[blocker], LOS_SAMPLES, 0.5);
        assert!((los.fraction - 0.5).abs() <= 2.0 / LOS_SAMPLES as f64);
    }

    #[test]
    fn enclosing_blocker_hides_everything() {
        let target = footprint_polygon(Pose2::new(5.0, 0.0, 0.0), 1.0, 1.0);
        let blocker = footprint_polygon(Pose2::new(3.0, 0.0, 0.0), 20.0, 20.0);
        let los = line_of_sight(Vec2::ZERO, &target, &[blocker], LOS_SAMPLES, 0.5);
        assert_eq!(los.fraction, 0.0);
        assert!(!los.visible);
    }

    #[test]
    fn hull_and_clip() {
        let sq = footprint_polygon(Pose2::new(0.0, 0.0, 0.0), 2.0, 2.0);
        let mut pts = sq.clone();
        pts.push(Vec2::ZERO);
        assert_eq!(convex_hull(&pts).len(), 4);
        let half = clip_halfplane(&sq, Vec2::new(1.0, 0.0), 0.0);
        assert!((polygon_area(&half) - 2.0).abs() < 1e-12);
    }
}

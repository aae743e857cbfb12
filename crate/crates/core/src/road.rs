//! Lane network, road features and the lane-relative queries built on them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{
    clip_halfplane, convex_hull, polygon_area, polygon_contains, Footprint, Polyline, Vec2,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TravelDirection {
    /// Traffic moves in centerline point order.
    Forward,
    Reverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lane {
    pub id: String,
    /// Centerline as supplied.
    pub centerline: Polyline,
    /// Centerline oriented along the direction of travel.
    pub travel: Polyline,
    pub width: f64,
    pub direction: TravelDirection,
    pub left: Option<String>,
    pub right: Option<String>,
    pub kerbside: bool,
    pub kerbside_marking_offset: f64,
    bbox: (Vec2, Vec2),
}

impl Lane {
    pub fn new(
        id: impl Into<String>,
        centerline: Polyline,
        width: f64,
        direction: TravelDirection,
    ) -> Self {
        let travel = match direction {
            TravelDirection::Forward => centerline.clone(),
            TravelDirection::Reverse => centerline.reversed(),
        };
        let pad = width / 2.0;
        let (lo, hi) = centerline.points().iter().fold(
            (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
            |(lo, hi), p| (Vec2::new(lo.x.min(p.x), lo.y.min(p.y)), Vec2::new(hi.x.max(p.x), hi.y.max(p.y))),
        );
        Self {
            id: id.into(),
            centerline,
            travel,
            width,
            direction,
            left: None,
            right: None,
            kerbside: false,
            kerbside_marking_offset: 0.0,
            bbox: (lo - Vec2::new(pad, pad), hi + Vec2::new(pad, pad)),
        }
    }

    pub fn with_neighbours(mut self, left: Option<&str>, right: Option<&str>) -> Self {
        self.left = left.map(str::to_owned);
        self.right = right.map(str::to_owned);
        self
    }

    pub fn with_kerb(mut self, marking_offset: f64) -> Self {
        self.kerbside = true;
        self.kerbside_marking_offset = marking_offset;
        self
    }

    pub fn length(&self) -> f64 {
        self.travel.length()
    }

    /// Frenet coordinates along the travel direction, extrapolated past both ends.
    pub fn frenet(&self, p: Vec2) -> (f64, f64) {
        frenet_extended(&self.travel, p)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let (s, d) = self.frenet(p);
        (0.0..=self.length()).contains(&s) && d.abs() <= self.width / 2.0
    }

    fn near_bbox(&self, pts: &[Vec2]) -> bool {
        let (lo, hi) = self.bbox;
        pts.iter().any(|p| p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y)
            || {
                let (plo, phi) = pts.iter().fold(
                    (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
                    |(a, b), p| (Vec2::new(a.x.min(p.x), a.y.min(p.y)), Vec2::new(b.x.max(p.x), b.y.max(p.y))),
                );
                plo.x <= hi.x && phi.x >= lo.x && plo.y <= hi.y && phi.y >= lo.y
            }
    }

    /// Fraction of a polygon's area lying inside this lane.
    pub fn coverage_of(&self, poly: &[Vec2]) -> f64 {
        if !self.near_bbox(poly) {
            return 0.0;
        }
        let mapped: Vec<Vec2> = poly
            .iter()
            .map(|&p| {
                let (s, d) = self.frenet(p);
                Vec2::new(s, d)
            })
            .collect();
        let total = polygon_area(&mapped);
        if total <= 0.0 {
            return 0.0;
        }
        let hw = self.width / 2.0;
        let mut clipped = clip_halfplane(&mapped, Vec2::new(0.0, -1.0), -hw);
        clipped = clip_halfplane(&clipped, Vec2::new(0.0, 1.0), -hw);
        clipped = clip_halfplane(&clipped, Vec2::new(1.0, 0.0), 0.0);
        clipped = clip_halfplane(&clipped, Vec2::new(-1.0, 0.0), -self.length());
        (polygon_area(&clipped) / total).clamp(0.0, 1.0)
    }
}

/// Frenet projection that keeps extrapolated `s` beyond either end instead of clamping.
pub fn frenet_extended(line: &Polyline, p: Vec2) -> (f64, f64) {
    let f = crate::geometry::frenet_project(line, p);
    if !f.clamped {
        return (f.s, f.d);
    }
    let end = line.point_at(f.s);
    let u = line.tangent_at(f.s);
    (f.s + u.dot(p - end), f.d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    StopLine,
    GiveWayLine,
    ZebraCrossing,
    YellowBox,
    DoubleWhiteLine,
    SlipRoadEntry,
    JunctionEntry,
    RightTurnPocket,
    SpeedLimitZone,
    VegetationStrip,
    Lamppost,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::StopLine => "stop_line",
            FeatureKind::GiveWayLine => "give_way_line",
            FeatureKind::ZebraCrossing => "zebra_crossing",
            FeatureKind::YellowBox => "yellow_box",
            FeatureKind::DoubleWhiteLine => "double_white_line",
            FeatureKind::SlipRoadEntry => "slip_road_entry",
            FeatureKind::JunctionEntry => "junction_entry",
            FeatureKind::RightTurnPocket => "right_turn_pocket",
            FeatureKind::SpeedLimitZone => "speed_limit_zone",
            FeatureKind::VegetationStrip => "vegetation_strip",
            FeatureKind::Lamppost => "lamppost",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureGeometry {
    Point(Vec2),
    Polyline(Vec<Vec2>),
    Polygon(Vec<Vec2>),
}

impl FeatureGeometry {
    pub fn points(&self) -> &[Vec2] {
        match self {
            FeatureGeometry::Point(p) => std::slice::from_ref(p),
            FeatureGeometry::Polyline(v) | FeatureGeometry::Polygon(v) => v,
        }
    }

    /// Outline usable for clearance and intersection queries.
    pub fn shape(&self) -> Vec<Vec2> {
        self.points().to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Bool(bool),
    Number(f64),
    Text(String),
    Points(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadFeature {
    pub id: String,
    pub kind: FeatureKind,
    pub geometry: FeatureGeometry,
    pub lanes: Vec<String>,
    pub attributes: BTreeMap<String, AttrValue>,
}

impl RoadFeature {
    pub fn number(&self, key: &str) -> Option<f64> {
        match self.attributes.get(key) {
            Some(AttrValue::Number(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(self.attributes.get(key), Some(AttrValue::Bool(true)))
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.attributes.get(key) {
            Some(AttrValue::Text(s)) => Some(s),
            _ => None,
        }
    }

    pub fn points_attr(&self, key: &str) -> Option<Vec<Vec2>> {
        match self.attributes.get(key) {
            Some(AttrValue::Points(p)) => Some(p.iter().map(|q| Vec2::new(q[0], q[1])).collect()),
            _ => None,
        }
    }

    pub fn attached_to(&self, lane: &str) -> bool {
        self.lanes.iter().any(|l| l == lane)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoadNetwork {
    pub lanes: Vec<Lane>,
    pub features: Vec<RoadFeature>,
}

/// Lateral limits of the drivable band in lane Frenet `d` (left positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivableBand {
    pub d_min: f64,
    pub d_max: f64,
}

impl DrivableBand {
    pub fn width(&self) -> f64 {
        self.d_max - self.d_min
    }

    pub fn centre(&self) -> f64 {
        0.5 * (self.d_min + self.d_max)
    }

    pub fn is_centred(&self, d: f64, tolerance: f64) -> bool {
        (d - self.centre()).abs() <= tolerance
    }
}

impl RoadNetwork {
    /// Builds a network and reports every dangling reference at once.
    pub fn new(lanes: Vec<Lane>, features: Vec<RoadFeature>) -> Result<Self, Vec<String>> {
        let mut issues = Vec::new();
        let known = |id: &str| lanes.iter().any(|l| l.id == id);
        for (i, lane) in lanes.iter().enumerate() {
            if lanes[..i].iter().any(|l| l.id == lane.id) {
                issues.push(format!("duplicate lane id '{}'", lane.id));
            }
            if !(lane.width > 0.0) {
                issues.push(format!("lane '{}' has non-positive width", lane.id));
            }
            if lane.kerbside_marking_offset < 0.0 || lane.kerbside_marking_offset >= lane.width {
                issues.push(format!("lane '{}' kerbside marking offset out of range", lane.id));
            }
            for n in [&lane.left, &lane.right].into_iter().flatten() {
                if !known(n) {
                    issues.push(format!("lane '{}' references unknown neighbour '{}'", lane.id, n));
                }
            }
        }
        for f in &features {
            for l in &f.lanes {
                if !known(l) {
                    issues.push(format!("feature '{}' references unknown lane '{}'", f.id, l));
                }
            }
            let pts = f.geometry.points();
            if pts.is_empty() || pts.iter().any(|p| !p.is_finite()) {
                issues.push(format!("feature '{}' has empty or non-finite geometry", f.id));
            }
        }
        if issues.is_empty() {
            Ok(Self { lanes, features })
        } else {
            Err(issues)
        }
    }

    pub fn lane(&self, id: &str) -> Option<&Lane> {
        self.lanes.iter().find(|l| l.id == id)
    }

    pub fn lane_index(&self, id: &str) -> Option<usize> {
        self.lanes.iter().position(|l| l.id == id)
    }

    pub fn features_of(&self, kind: FeatureKind) -> impl Iterator<Item = &RoadFeature> {
        self.features.iter().filter(move |f| f.kind == kind)
    }

    pub fn has_feature(&self, kind: FeatureKind) -> bool {
        self.features_of(kind).next().is_some()
    }

    /// Lanes whose area contains `p`, with Frenet coordinates.
    pub fn locate(&self, p: Vec2) -> Vec<(usize, f64, f64)> {
        self.lanes
            .iter()
            .enumerate()
            .filter_map(|(i, lane)| {
                let (s, d) = lane.frenet(p);
                ((0.0..=lane.length()).contains(&s) && d.abs() <= lane.width / 2.0)
                    .then_some((i, s, d))
            })
            .collect()
    }

    /// Per-lane fraction of the footprint body area, indexed like `lanes`.
    pub fn coverage(&self, fp: &Footprint) -> Vec<f64> {
        let poly = fp.polygon();
        self.lanes.iter().map(|l| l.coverage_of(&poly)).collect()
    }

    /// Lane in which the footprint has established presence (coverage above one half).
    pub fn established_lane(&self, fp: &Footprint) -> Option<usize> {
        let cov = self.coverage(fp);
        cov.iter()
            .enumerate()
            .filter(|(_, &c)| c > 0.5)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        let (la, lb) = (&self.lanes[a], &self.lanes[b]);
        la.left.as_deref() == Some(lb.id.as_str())
            || la.right.as_deref() == Some(lb.id.as_str())
            || lb.left.as_deref() == Some(la.id.as_str())
            || lb.right.as_deref() == Some(la.id.as_str())
    }

    /// 1-based lane position counted from the median (rightmost same-direction lane is 1).
    pub fn index_from_median(&self, lane: usize) -> usize {
        let mut idx = 1;
        let mut cur = &self.lanes[lane];
        let mut guard = 0;
        while let Some(r) = cur.right.as_deref().and_then(|id| self.lane(id)) {
            if r.direction_matches(cur) {
                idx += 1;
                cur = r;
                guard += 1;
                if guard > self.lanes.len() {
                    break;
                }
            } else {
                break;
            }
        }
        idx
    }

    /// Signed distance along `lane` from the footprint's foremost point to the
    /// near edge of `feature`. `None` when the feature is not attached to the lane.
    pub fn distance_along_to_feature(
        &self,
        lane: usize,
        fp: &Footprint,
        feature: &RoadFeature,
    ) -> Option<f64> {
        let l = &self.lanes[lane];
        if !feature.attached_to(&l.id) {
            return None;
        }
        let (front, _) = l.frenet(fp.front_center());
        let near = feature_near_edge(l, feature);
        Some(near - front)
    }

    /// Zebra stripe polygon extended by `margin` metres up- and downstream.
    pub fn zebra_zone(&self, feature: &RoadFeature, margin: f64) -> Vec<Vec2> {
        let stripe = feature.geometry.shape();
        let axis = feature
            .lanes
            .first()
            .and_then(|id| self.lane(id))
            .map(|l| {
                let c = crate::geometry::centroid(&stripe);
                let (s, _) = l.frenet(c);
                l.travel.tangent_at(s.clamp(0.0, l.length()))
            })
            .unwrap_or(Vec2::new(1.0, 0.0));
        if margin <= 0.0 {
            return convex_hull(&stripe);
        }
        let mut pts = stripe.clone();
        pts.extend(stripe.iter().map(|&p| p + axis * margin));
        pts.extend(stripe.iter().map(|&p| p - axis * margin));
        convex_hull(&pts)
    }

    pub fn drivable_area(&self, lane: usize, edge_margin: f64) -> DrivableBand {
        let l = &self.lanes[lane];
        let kerb = if l.kerbside { l.kerbside_marking_offset } else { 0.0 };
        DrivableBand {
            d_min: -l.width / 2.0 + edge_margin,
            d_max: l.width / 2.0 - kerb,
        }
    }

    /// Posted limit at `p` from speed-limit zones, if any zone covers it.
    pub fn speed_limit_at(&self, p: Vec2) -> Option<f64> {
        self.features_of(FeatureKind::SpeedLimitZone)
            .filter(|f| polygon_contains(f.geometry.points(), p))
            .filter_map(|f| f.number("speed_limit_kmh"))
            .reduce(f64::min)
    }
}

impl Lane {
    pub fn direction_matches(&self, other: &Lane) -> bool {
        let a = self.travel.tangent_at(self.length() / 2.0);
        let (s, _) = other.frenet(self.travel.point_at(self.length() / 2.0));
        let b = other.travel.tangent_at(s.clamp(0.0, other.length()));
        a.dot(b) > 0.0
    }
}

/// Smallest travel-direction `s` over a feature's geometry, measured on `lane`.
pub fn feature_near_edge(lane: &Lane, feature: &RoadFeature) -> f64 {
    feature
        .geometry
        .points()
        .iter()
        .map(|&p| lane.frenet(p).0)
        .fold(f64::INFINITY, f64::min)
}

/// Largest travel-direction `s` over a feature's geometry, measured on `lane`.
pub fn feature_far_edge(lane: &Lane, feature: &RoadFeature) -> f64 {
    feature
        .geometry
        .points()
        .iter()
        .map(|&p| lane.frenet(p).0)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose2;

    fn two_lanes() -> RoadNetwork {
        let a = Lane::new(
            "A",
            Polyline::new(vec![Vec2::new(0.0, 0.0), Vec2::new(200.0, 0.0)]).unwrap(),
            3.5,
            TravelDirection::Forward,
        )
        .with_neighbours(None, Some("B"));
        let b = Lane::new(
            "B",
            Polyline::new(vec![Vec2::new(0.0, -3.5), Vec2::new(200.0, -3.5)]).unwrap(),
            3.5,
            TravelDirection::Forward,
        )
        .with_neighbours(Some("A"), None);
        RoadNetwork::new(vec![a, b], vec![]).unwrap()
    }

    #[test]
    fn centred_and_straddling_coverage() {
        let net = two_lanes();
        let fp = Footprint::new(Pose2::new(50.0, 0.0, 0.0), 4.5, 1.8);
        let c = net.coverage(&fp);
        assert!((c[0] - 1.0).abs() < 1e-12 && c[1] == 0.0);
        let fp = Footprint::new(Pose2::new(50.0, -1.75, 0.0), 4.5, 1.8);
        let c = net.coverage(&fp);
        assert!((c[0] - 0.5).abs() < 1e-9 && (c[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn index_from_median_counts_right_hops() {
        let net = two_lanes();
        assert_eq!(net.index_from_median(1), 1);
        assert_eq!(net.index_from_median(0), 2);
    }

    #[test]
    fn dangling_neighbour_is_reported() {
        let a = Lane::new(
            "A",
            Polyline::new(vec![Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0)]).unwrap(),
            3.5,
            TravelDirection::Forward,
        )
        .with_neighbours(Some("Z"), None);
        let err = RoadNetwork::new(vec![a], vec![]).unwrap_err();
        assert!(err[0].contains("'Z'"));
    }

    #[test]
    fn drivable_band_of_kerbside_lane() {
        let a = Lane::new(
            "A",
            Polyline::new(vec![Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0)]).unwrap(),
            3.4,
            TravelDirection::Forward,
        )
        .with_kerb(0.3);
        let net = RoadNetwork::new(vec![a], vec![]).unwrap();
        let band = net.drivable_area(0, 0.0);
        assert!((band.width() - 3.1).abs() < 1e-12);
    }
}

//! On-disk JSON scenario schema and its conversion to and from [`Scenario`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{Polyline, Vec2};
use crate::road::{AttrValue, FeatureGeometry, FeatureKind, Lane, RoadFeature, RoadNetwork, TravelDirection};
use crate::scenario::{
    ActorClass, ActorTrace, Indicator, Intent, LoadError, Metadata, Sample, Scenario, FORMAT_VERSION,
};

fn forward() -> TravelDirection {
    TravelDirection::Forward
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

fn is_false(v: &bool) -> bool {
    !*v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format_version: u32,
    #[serde(default)]
    pub metadata: Metadata,
    pub network: NetworkFile,
    pub actors: Vec<ActorFile>,
    pub ego: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_limit_kmh: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    #[serde(default)]
    pub lanes: Vec<LaneFile>,
    #[serde(default)]
    pub features: Vec<FeatureFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneFile {
    pub id: String,
    pub centerline: Vec<[f64; 2]>,
    pub width: f64,
    #[serde(default = "forward")]
    pub direction: TravelDirection,
    #[serde(default)]
    pub left: Option<String>,
    #[serde(default)]
    pub right: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub kerbside: bool,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub kerbside_marking_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryFile {
    Point([f64; 2]),
    Polyline(Vec<[f64; 2]>),
    Polygon(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureFile {
    #[serde(default)]
    pub id: Option<String>,
    pub kind: FeatureKind,
    pub geometry: GeometryFile,
    #[serde(default)]
    pub lanes: Vec<String>,
    #[serde(default)]
    pub attributes: BTreeMap<String, AttrValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActorFile {
    pub id: String,
    pub class: ActorClass,
    pub length: f64,
    pub width: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub mirror_extra: f64,
    /// Rows of `[t, x, y, heading]` or `[t, x, y, heading, speed]`.
    pub samples: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signals: Option<Vec<(f64, Indicator)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intents: Option<Vec<(f64, Intent)>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alerts: Vec<(f64, String)>,
}

fn pts(v: &[[f64; 2]]) -> Vec<Vec2> {
    v.iter().map(|p| Vec2::new(p[0], p[1])).collect()
}

fn arr(v: &[Vec2]) -> Vec<[f64; 2]> {
    v.iter().map(|p| [p.x, p.y]).collect()
}

impl ScenarioFile {
    /// Parses JSON, checking the format version before the full schema.
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| LoadError::Schema(e.to_string()))?;
        match value.get("format_version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(LoadError::Version {
                    found: v.min(u32::MAX as u64) as u32,
                    expected: FORMAT_VERSION,
                })
            }
            None => return Err(LoadError::Schema("missing or non-integer format_version".into())),
        }
        serde_json::from_value(value).map_err(|e| LoadError::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario file serialises")
    }

    /// Builds the domain scenario, reporting every semantic issue together.
    pub fn into_scenario(self) -> Result<Scenario, LoadError> {
        let mut issues = Vec::new();
        let mut lanes = Vec::new();
        for l in &self.network.lanes {
            match Polyline::new(pts(&l.centerline)) {
                Ok(line) => {
                    let mut lane = Lane::new(l.id.clone(), line, l.width, l.direction)
                        .with_neighbours(l.left.as_deref(), l.right.as_deref());
                    lane.kerbside = l.kerbside;
                    lane.kerbside_marking_offset = l.kerbside_marking_offset;
                    lanes.push(lane);
                }
                Err(e) => issues.push(format!("lane '{}' centerline: {}", l.id, e)),
            }
        }
        let features = self
            .network
            .features
            .iter()
            .enumerate()
            .map(|(i, f)| RoadFeature {
                id: f.id.clone().unwrap_or_else(|| format!("{}-{}", f.kind, i)),
                kind: f.kind,
                geometry: match &f.geometry {
                    GeometryFile::Point(p) => FeatureGeometry::Point(Vec2::new(p[0], p[1])),
                    GeometryFile::Polyline(v) => FeatureGeometry::Polyline(pts(v)),
                    GeometryFile::Polygon(v) => FeatureGeometry::Polygon(pts(v)),
                },
                lanes: f.lanes.clone(),
                attributes: f.attributes.clone(),
            })
            .collect();
        let network = if issues.is_empty() {
            match RoadNetwork::new(lanes, features) {
                Ok(n) => n,
                Err(mut e) => {
                    issues.append(&mut e);
                    RoadNetwork::default()
                }
            }
        } else {
            RoadNetwork::default()
        };
        let mut actors = Vec::new();
        for a in &self.actors {
            let mut samples = Vec::with_capacity(a.samples.len());
            for (k, row) in a.samples.iter().enumerate() {
                match row.len() {
                    4 | 5 => {
                        let mut s = Sample::new(row[0], row[1], row[2], row[3]);
                        s.speed = row.get(4).copied();
                        samples.push(s);
                    }
                    n => issues.push(format!("actor '{}' sample {} has {} fields (expected 4 or 5)", a.id, k, n)),
                }
            }
            actors.push(ActorTrace {
                id: a.id.clone(),
                class: a.class,
                length: a.length,
                width: a.width,
                mirror_extra: a.mirror_extra,
                samples,
                signals: a.signals.clone(),
                intents: a.intents.clone(),
                alerts: a.alerts.clone(),
            });
        }
        let scenario = Scenario {
            metadata: self.metadata,
            network,
            actors,
            ego: self.ego,
            speed_limit_kmh: self.speed_limit_kmh,
        };
        issues.extend(scenario.validate());
        if issues.is_empty() {
            Ok(scenario)
        } else {
            Err(LoadError::Semantic(issues))
        }
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        ScenarioFile {
            format_version: FORMAT_VERSION,
            metadata: s.metadata.clone(),
            network: NetworkFile {
                lanes: s
                    .network
                    .lanes
                    .iter()
                    .map(|l| LaneFile {
                        id: l.id.clone(),
                        centerline: arr(l.centerline.points()),
                        width: l.width,
                        direction: l.direction,
                        left: l.left.clone(),
                        right: l.right.clone(),
                        kerbside: l.kerbside,
                        kerbside_marking_offset: l.kerbside_marking_offset,
                    })
                    .collect(),
                features: s
                    .network
                    .features
                    .iter()
                    .map(|f| FeatureFile {
                        id: Some(f.id.clone()),
                        kind: f.kind,
                        geometry: match &f.geometry {
                            FeatureGeometry::Point(p) => GeometryFile::Point([p.x, p.y]),
                            FeatureGeometry::Polyline(v) => GeometryFile::Polyline(arr(v)),
                            FeatureGeometry::Polygon(v) => GeometryFile::Polygon(arr(v)),
                        },
                        lanes: f.lanes.clone(),
                        attributes: f.attributes.clone(),
                    })
                    .collect(),
            },
            actors: s
                .actors
                .iter()
                .map(|a| ActorFile {
                    id: a.id.clone(),
                    class: a.class,
                    length: a.length,
                    width: a.width,
                    mirror_extra: a.mirror_extra,
                    samples: a
                        .samples
                        .iter()
                        .map(|p| {
                            let mut row = vec![p.t, p.x, p.y, p.heading];
                            if let Some(v) = p.speed {
                                row.push(v);
                            }
                            row
                        })
                        .collect(),
                    signals: a.signals.clone(),
                    intents: a.intents.clone(),
                    alerts: a.alerts.clone(),
                })
                .collect(),
            ego: s.ego.clone(),
            speed_limit_kmh: s.speed_limit_kmh,
        }
    }
}

/// Serialises a scenario to the canonical JSON form.
pub fn scenario_to_json(s: &Scenario) -> String {
    ScenarioFile::from_scenario(s).to_json()
}

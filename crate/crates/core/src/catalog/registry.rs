//! Static rule registry: identifiers, source citations and evaluation status.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    General,
    Infrastructure,
    Maneuver,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::General => "general",
            Category::Infrastructure => "infrastructure",
            Category::Maneuver => "maneuver",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "general" => Some(Category::General),
            "infrastructure" => Some(Category::Infrastructure),
            "maneuver" | "manoeuvre" => Some(Category::Maneuver),
            _ => None,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluability {
    Evaluable,
    CatalogOnly,
}

/// Outcome recorded when the rule's check fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Violation,
    Minor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SourceRef {
    pub document: &'static str,
    pub clause: &'static str,
    /// Verbatim anchor text from the source clause.
    pub quote: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rule {
    pub id: &'static str,
    pub title: &'static str,
    pub category: Category,
    pub evaluability: Evaluability,
    pub sources: &'static [SourceRef],
    /// Threshold keys the evaluator reads.
    pub parameters: &'static [&'static str],
    pub severity: Severity,
}

impl Rule {
    pub fn is_evaluable(&self) -> bool {
        self.evaluability == Evaluability::Evaluable
    }

    pub fn primary_quote(&self) -> &'static str {
        self.sources.first().map_or("", |s| s.quote)
    }
}

const fn src(document: &'static str, clause: &'static str, quote: &'static str) -> SourceRef {
    SourceRef { document, clause, quote }
}

macro_rules! rule {
    ($id:literal, $title:literal, $cat:ident, $ev:ident, $sev:ident, [$($p:literal),*], [$($s:expr),+ $(,)?]) => {
        Rule {
            id: $id,
            title: $title,
            category: Category::$cat,
            evaluability: Evaluability::$ev,
            sources: &[$($s),+],
            parameters: &[$($p),*],
            severity: Severity::$sev,
        }
    };
}

pub static RULES: &[Rule] = &[
    // Evaluable: recommended guidelines.
    rule!("REC-01", "Following distance allows a full stop 2 m behind the leader", Maneuver, Evaluable, Violation,
        ["follow_stop_margin", "system_latency", "friction_coefficient", "road_grade"],
        [src("TR68-1", "6.3.4", "the AV would be able to stop behind that vehicle with a longitudinal distance of at least 2 m"),
         src("REC", "1", "stop behind that vehicle with a longitudinal distance of at least 2 m")]),
    rule!("REC-02", "Overtake completed before the slip road", Infrastructure, Evaluable, Violation,
        ["overtake_junction_lead"],
        [src("REC", "2", "Complete overtaking manoeuvre with 3 seconds before start of left turn slip road")]),
    rule!("REC-03a", "Return gap to oncoming traffic after overtaking", Maneuver, Evaluable, Violation,
        ["return_ttc"],
        [src("REC", "3a", "at least a 2 second time gap")]),
    rule!("REC-03b", "Rear gap when starting to cross the lane marking", Maneuver, Evaluable, Violation,
        ["rear_gap_ttc", "car_length_per_16kmh", "car_length"],
        [src("REC", "3b", "1 car length per 16km/h of the TSV speed or 9 seconds TTC whichever is bigger")]),
    rule!("REC-04", "Lateral acceleration and jerk during lane changes", Maneuver, Evaluable, Violation,
        ["lat_accel_max", "lat_jerk_max", "jerk_window"],
        [src("REC", "4", "maximum of 3m/s^2"),
         src("REC", "4", "moving average over half a second of the lateral jerk generated to not exceed 5m/s^3")]),
    rule!("REC-05", "Slip-road turn initiation point", Infrastructure, Evaluable, Violation,
        ["slip_entry_offset", "slip_entry_tolerance"],
        [src("REC", "5", "start turning at 3 metre after the start of the geometric start of slip road")]),
    rule!("REC-06", "Wait before the zebra when the give-way gap is too short", Infrastructure, Evaluable, Violation,
        ["creep_speed_cap", "visibility_threshold"],
        [src("REC", "6", "wait at the stop line before a zebra crossing"),
         src("TR68-1", "6.1.c", "creep forward at a reduced speed")]),
    rule!("REC-07", "Carry or cancel the indicator after a lane change", Maneuver, Evaluable, Violation,
        ["signal_carry_window"],
        [src("REC", "7", "another right turn within 10s, continue signal, otherwise cancel signal")]),
    rule!("REC-08", "Time buffer to oncoming traffic at the end of a discretionary right turn", Infrastructure, Evaluable, Violation,
        ["turn_completion_ttc"],
        [src("REC", "8", "at least a 2 second time buffer")]),
    rule!("REC-09", "Zebra lateral clearances applied at junction pedestrian crossings", Infrastructure, Evaluable, Violation,
        ["zebra_lateral_stop", "zebra_lateral_approach", "zebra_zone_margin"],
        [src("REC", "9", "Applying the lateral clearances necessary from TR68-1 7.9.4")]),
    rule!("REC-10", "Target lane after a dual right turn", Infrastructure, Evaluable, Violation,
        [],
        [src("REC", "10", "2nd lane from the left of the central divider")]),
    rule!("REC-11", "Speed cap when passing a parked vehicle at reduced clearance", Maneuver, Evaluable, Violation,
        ["parked_pass_speed", "moving_vehicle_gap"],
        [src("REC", "11", "maximum speed of 30km/h")]),
    rule!("REC-12", "Pull-in lead and dwell time after passing a parked vehicle", Maneuver, Evaluable, Violation,
        ["pull_in_lead", "overtake_dwell_max"],
        [src("REC", "12", "at least 1- 1.5x ego vehicle's car length ahead of the parked vehicle"),
         src("REC", "12", "maximum of 20 seconds")]),
    rule!("REC-13", "Behaviour at bus stops", Infrastructure, CatalogOnly, Violation,
        [],
        [src("REC", "13", "acceptable behaviour for buses at bus stop infrastructure")]),
    rule!("REC-14", "Drive in the centre of the drivable area", General, Evaluable, Minor,
        ["centering_tolerance", "edge_margin"],
        [src("REC", "14", "drive in the centre of the drivable area within a lane")]),
    rule!("REC-15", "Stay behind a slow adjacent vehicle when clearance is short", General, Evaluable, Violation,
        ["slow_tsv_threshold", "moving_vehicle_gap", "adjacent_pass_clearance"],
        [src("REC", "15", "stay behind a slow TSV in the adjacent lane")]),
    rule!("REC-16", "Reduced-clearance pass of a slow adjacent vehicle", General, Evaluable, Violation,
        ["adjacent_pass_clearance", "adjacent_speed_ratio", "adjacent_stationary_pass_speed", "moving_vehicle_gap", "slow_tsv_threshold"],
        [src("REC", "16a", "20% higher than the TSV"),
         src("REC", "16a", "maximum of 30km/h at this reduced clearance of 0.5m"),
         src("REC", "16b", "profile at mirror")]),
    rule!("REC-17", "Bias away from vegetation when the lane allows", General, Evaluable, Violation,
        ["fixed_obstacle_gap", "moving_vehicle_gap", "edge_margin"],
        [src("REC", "17", "maintain 0.5m to vegetation")]),
    rule!("REC-18", "Straddling two lanes only briefly and with a clear adjacent lane", General, Evaluable, Violation,
        ["straddle_max"],
        [src("REC", "18a", "straddle 2 lanes to maintain 0.5m to vegetation for length below 80metres"),
         src("REC", "18b", "execute standard full lane change manoeuvre")]),
    rule!("REC-19", "Slow down instead of straddling into an occupied lane", General, Evaluable, Violation,
        ["rear_gap_ttc", "car_length_per_16kmh", "car_length"],
        [src("REC", "19a", "slow down and stop if necessary until it is safe to pull into other lane")]),
    rule!("REC-20", "Use the drivable area to keep pedestrian clearance", General, Evaluable, Minor,
        ["ped_clearance_lt30", "ped_clearance_ge30", "edge_margin"],
        [src("REC", "20", "bias within the lane within the driveable area to maintain required clearance to pedestrian")]),
    rule!("REC-21", "Pedestrian clearance ladder and the 0.5 m exception", Maneuver, Evaluable, Violation,
        ["ped_clearance_ge30", "ped_clearance_lt30", "ped_clearance_exception", "ped_speed_split"],
        [src("REC", "21", "a minimum of 0.5m to the pedestrian is allowed if the AV stays below 30km/h")]),
    rule!("REC-22", "Stop for pedestrians and alert when stuck", Maneuver, Evaluable, Violation,
        ["ped_clearance_exception", "stuck_alert"],
        [src("REC", "22", "unable to proceed after 10seconds")]),
    // Evaluable: standards and handbooks.
    rule!("TR68-6.1.a", "Speed limit", General, Evaluable, Violation,
        ["speed_limit_default"],
        [src("TR68-1", "6.1.a", "the speed limit of all roads in Singapore is 50 km/h")]),
    rule!("TR68-6.3.2", "Lateral clearance to pedestrians", Maneuver, Evaluable, Violation,
        ["ped_clearance_lt30", "ped_clearance_ge30", "ped_clearance_away_onroad", "ped_clearance_away_offroad", "ped_clearance_exception", "ped_speed_split"],
        [src("TR68-1", "6.3.2.c", "the lateral clearance to pedestrians on the road surface and not laterally moving away from the AV's path shall be no less than 1 m"),
         src("TR68-1", "6.3.2.d", "For AV motion at speeds equal to or above 30 km/h"),
         src("TR68-1", "6.3.2.e", "on the road surface and laterally moving away"),
         src("TR68-1", "6.3.2.f", "not on the road surface and laterally moving away")]),
    rule!("TR68-6.4", "Stopping position at stop and give-way lines", Infrastructure, Evaluable, Violation,
        ["stop_line_window"],
        [src("TR68-1", "6.4", "between 0 m and 1.5 m")]),
    rule!("TR68-7.5", "Indicator lead and continuity of lane changes", Maneuver, Evaluable, Violation,
        ["signal_lead", "continuity_reversal"],
        [src("TR68-1", "7.5", "shall commence not before 3seconds have passed after the activation of the signal indicator to the intended side of lane change"),
         src("TR68-1", "7.5", "completed as one continuous movement"),
         src("BTD", "131", "at least 3 seconds")]),
    rule!("TR68-7.6.i", "Lateral distance to cyclists", Maneuver, Evaluable, Violation,
        ["cyclist_gap"],
        [src("TR68-1", "7.6.i", "keep at least 1.5 m lateral distance from the cyclist")]),
    rule!("TR68-7.9.4", "Stopping for VRUs at zebra crossings", Infrastructure, Evaluable, Violation,
        ["zebra_lateral_stop", "zebra_lateral_approach", "zebra_no_line_stop", "zebra_zone_margin", "stop_line_window"],
        [src("TR68-1", "7.9.4.a", "On the road surface less than 4 m away laterally from the AV footprint"),
         src("TR68-1", "7.9.4.b", "within 7m laterally from the AV footprint"),
         src("TR68-1", "7.9.4", "when no stop line is present 3m before the zebra crossing stripes")]),
    rule!("TR68-7.9.5", "Assumed intent of VRUs occupying the zebra zone", Infrastructure, Evaluable, Violation,
        ["zebra_lateral_approach", "zebra_zone_margin"],
        [src("TR68-1", "7.9.5", "shall also be assumed to have intent to cross at least until the AV comes to a complete stop")]),
    rule!("TR68-7.9.6", "Traverse speed through an occupied zebra zone", Infrastructure, Evaluable, Violation,
        ["zebra_traverse_speed", "zebra_intent_wait", "zebra_zone_margin"],
        [src("TR68-1", "7.9.6", "speed of not exceeding 30km/h when the zebra crossing zone is occupied by a VRU who has not displayed intent to cross within the pass of 5 seconds")]),
    rule!("TR68-7.10.2.c", "Indicator before entering a turning lane", Maneuver, Evaluable, Violation,
        ["signal_lead"],
        [src("TR68-1", "7.10.2.c", "signal its intention at least 3 seconds before entering the lane which permits the intended direction of turn")]),
    rule!("BTD-93", "Yellow box obstruction", Infrastructure, Evaluable, Violation,
        [],
        [src("BTD", "93", "drive his/her vehicle into a junction marked with a yellow box and cause obstruction"),
         src("BTD", "93a", "turning vehicles in a box-junction do not block other vehicles"),
         src("BTD", "93b", "waiting in the yellow box while trying to turn right in the face of oncoming traffic"),
         src("BTD", "93c", "waiting in a yellow box junction while making left or right turns because of pedestrians crossing the road")]),
    rule!("BTD-160c", "No weaving between lanes", General, Evaluable, Violation,
        ["weave_amplitude", "weave_window", "weave_reversals"],
        [src("BTD", "160c", "Do not weave in and out of traffic lanes")]),
    rule!("FTD-221", "Gap to parked vehicles", Maneuver, Evaluable, Violation,
        ["parked_vehicle_gap"],
        [src("FTD", "221", "keep a safe gap of about 1 meter between you and the parked vehicles")]),
    rule!("FTD-226", "Gap to fixed obstacles", Maneuver, Evaluable, Violation,
        ["fixed_obstacle_gap"],
        [src("FTD", "226", "keep a gap of at least 0.5 m from them")]),
    rule!("FTD-227", "Gap to moving vehicles", Maneuver, Evaluable, Violation,
        ["moving_vehicle_gap", "slow_tsv_threshold"],
        [src("FTD", "227", "When passing moving vehicles, keep a gap of at least 1.5 m from them")]),
    // Catalog only: lane discipline and comfort.
    rule!("TR68-7.3", "Adhere to signs and markings", General, CatalogOnly, Violation, [],
        [src("TR68-1", "7.3", "An AV shall adhere to traffic signs and road markings")]),
    rule!("TR68-7.4.a", "Obey lane arrows", General, CatalogOnly, Violation, [],
        [src("TR68-1", "7.4a", "The AV shall obey directions indicated by arrows marked in lanes")]),
    rule!("TR68-7.4.b", "Keep left on a two-lane carriageway", General, CatalogOnly, Violation, [],
        [src("TR68-1", "7.4b", "The AV shall keep to the left of a two-lane carriageway, except when overtaking")]),
    rule!("TR68-7.4.d", "Keep within the lane", General, CatalogOnly, Violation, [],
        [src("TR68-1", "7.4d", "The AV shall keep within its lane unless it is performing a lane change or overtaking manoeuvre")]),
    rule!("FTD-108", "Keep well to the left", General, CatalogOnly, Violation, [],
        [src("FTD", "108", "Always keep well to the left when driving along two-way streets or dual-carriageways")]),
    rule!("TR68-6.1.b", "Posted variable speed limits", General, CatalogOnly, Violation, [],
        [src("TR68-1", "6.1.b", "Adhere to posted variable/temporary speed limits and speed warning signs")]),
    rule!("TR68-6.1.c", "Occlusion-aware speed", General, CatalogOnly, Violation, [],
        [src("TR68-1", "6.1.c", "react to reasonable worst-case assumptions of actors being present just outside of field of view")]),
    rule!("TR68-6.1.d", "Advisory speeds and calmed areas", General, CatalogOnly, Violation, [],
        [src("TR68-1", "6.1.d", "Adjust speed to account for advisory speed signs")]),
    rule!("TR68-6.1.e", "Adjust speed to alignment and surface", General, CatalogOnly, Violation, [],
        [src("TR68-1", "6.1.e", "Constantly and smoothly adjust speed for road alignment and surface conditions")]),
    rule!("BTD-179", "Bad weather driving", General, CatalogOnly, Violation, [],
        [src("BTD", "179", "Reduce your speed so that you can manoeuvre safely")]),
    rule!("BTD-180", "Wet road stopping distance", General, CatalogOnly, Violation, [],
        [src("BTD", "180", "the stopping distance of a vehicle will increase to about twice the distance of that on a dry road")]),
    rule!("BTD-181", "Aquaplaning", General, CatalogOnly, Violation, [],
        [src("BTD", "181", "this is known as 'Aquaplaning'")]),
    rule!("BTD-195", "Read the road conditions", General, CatalogOnly, Violation, [],
        [src("BTD", "195", "adjust his/her speed accordingly to suit the road conditions")]),
    rule!("BTD-199", "Reduce speed on bends", General, CatalogOnly, Violation, [],
        [src("BTD", "199", "You should therefore reduce speed when going round a bend")]),
    rule!("BTD-167", "Patience and courtesy", General, CatalogOnly, Violation, [],
        [src("BTD", "167", "Always be patient")]),
    // Catalog only: signalised and unsignalised junctions.
    rule!("TR68-7.2.4", "Amber phase handling", Infrastructure, CatalogOnly, Violation, [],
        [src("TR68-1", "7.2.4a", "AV should try to stop before the stop line if it is safe to do so")]),
    rule!("TR68-7.2.6.e", "Do not enter without exit space", Infrastructure, CatalogOnly, Violation, [],
        [src("TR68-1", "7.2.6e", "The AV should not proceed past the stop line if there is no space for exiting the junction")]),
    rule!("TR68-7.2.6.c", "Give way to crossing pedestrians", Infrastructure, CatalogOnly, Violation, [],
        [src("TR68-1", "7.2.6c", "Give way to pedestrians crossing the road")]),
    rule!("TR68-7.10.2.a", "Keep the corresponding lane through turns", Infrastructure, CatalogOnly, Violation, [],
        [src("TR68-1", "7.10.2 a", "an AV shall keep to its lane corresponding to its lane before turning")]),
    rule!("TR68-7.10.3.a", "Stop in the right-turn pocket", Infrastructure, CatalogOnly, Violation, [],
        [src("TR68-1", "7.10.3 a", "an AV shall first stop at the right turning pocket")]),
    rule!("TR68-7.10.3", "Left turns yield to crossing VRUs", Infrastructure, CatalogOnly, Violation, [],
        [src("TR68-1", "7.10.3", "An AV shall keep its signal until the turn is completed")]),
    rule!("BTD-84", "Right turn into a two-way street", Infrastructure, CatalogOnly, Violation, [],
        [src("BTD", "84", "turn into the lane just left of the centre line of the road you are turning into")]),
    rule!("BTD-85", "Right turn into a one-way street", Infrastructure, CatalogOnly, Violation, [],
        [src("BTD", "85", "turn into the extreme right lane of the road you are turning into")]),
    rule!("TR68-7.8", "U-turn conditions", Infrastructure, CatalogOnly, Violation, [],
        [src("TR68-1", "7.8", "An AV shall only perform a U turn manoeuvre when all the following is fulfilled")]),
    rule!("BTD-94", "U-turn only at signs", Infrastructure, CatalogOnly, Violation, [],
        [src("BTD", "94", "except where a U-turn sign is located")]),
    rule!("TR68-6.1.h", "Merge speed from slip lanes", Infrastructure, CatalogOnly, Violation, [],
        [src("TR68-1", "6.1.h", "match speed of traffic on the major road for a smooth merge")]),
    rule!("TR68-7.10.1", "Give way at non-signalised junctions", Infrastructure, CatalogOnly, Violation, [],
        [src("TR68-1", "7.10.1", "an AV shall reduce its speed and give way to traffic on the major road")]),
    rule!("BTD-81", "Give-way rule at uncontrolled junctions", Infrastructure, CatalogOnly, Violation, [],
        [src("BTD", "81a", "you must give way to traffic going straight from the right")]),
    rule!("FTD-246", "Cyclists on the kerb side when turning", Infrastructure, CatalogOnly, Violation, [],
        [src("FTD", "246", "look out for cyclists between you and the kerb")]),
    rule!("TR68-7.7.1", "Roundabout approach lane", Infrastructure, CatalogOnly, Violation, [],
        [src("TR68", "7.7.1", "When approaching a roundabout, an AV shall reduce its speed")]),
    rule!("TR68-7.7.2", "Roundabout signalling", Infrastructure, CatalogOnly, Violation, [],
        [src("TR68", "7.7.2", "the AV shall signal left at least 3 seconds before entering a roundabout")]),
    rule!("TR68-7.9.1", "Right of way at pedestrian crossings", Infrastructure, CatalogOnly, Violation, [],
        [src("TR68-1", "7.9.1", "An AV shall give right of way to VRU at pedestrian crossings")]),
    rule!("TR68-7.9.2", "Approach speed at pedestrian crossings", Infrastructure, CatalogOnly, Violation, [],
        [src("TR68-1", "7.9.2", "the AV should adjust its speed such that it can reasonably stop")]),
    rule!("BTD-147", "School patrol warden", Infrastructure, CatalogOnly, Violation, [],
        [src("BTD", "147", "Stop, when signalled to do so by a school patrol warden")]),
    rule!("BTD-53", "Bus lanes", Infrastructure, CatalogOnly, Violation, [],
        [src("BTD", "53", "must avoid using the bus lanes during restricted hours")]),
    rule!("FTD-223", "Pedestrians at bus stops", Infrastructure, CatalogOnly, Violation, [],
        [src("FTD", "223", "be alert and prepared to stop for pedestrians, especially school children")]),
    // Catalog only: manoeuvres.
    rule!("TR68-6.3.4", "Safe following distance", Maneuver, CatalogOnly, Violation, [],
        [src("TR68-1", "6.3.4", "The AV shall maintain a safe car following distance")]),
    rule!("BTD-135", "One car length per 16 km/h", Maneuver, CatalogOnly, Violation, [],
        [src("BTD", "135", "at least one car length for every 16km/h of your speed")]),
    rule!("BTD-136", "Two-second rule", Maneuver, CatalogOnly, Violation, [],
        [src("BTD", "136", "use the ‘two-second’ rule")]),
    rule!("TR68-6.3.2.a", "No collision with VRUs", Maneuver, CatalogOnly, Violation, [],
        [src("TR68-1", "6.3.2.a", "The AV shall not collide with any pedestrian, cyclist, or PMD user")]),
    rule!("BTD-149", "Wide berth to pedestrians and cyclists", Maneuver, CatalogOnly, Violation, [],
        [src("BTD", "149", "always maintain as wide a distance from him/her as possible and drive slowly")]),
    rule!("TR68-7.5.a", "No forced evasive action", Maneuver, CatalogOnly, Violation, [],
        [src("TR68-1", "7.5a", "does not force any other road user (ORU) to take potentially unsafe evasive action")]),
    rule!("TR68-7.5.b", "Following distance through lane changes", Maneuver, CatalogOnly, Violation, [],
        [src("TR68-1", "7.5b", "The AV shall keep a safe following distance at all times before, during and at the end of any lane change manoeuvre")]),
    rule!("TR68-7.5.c", "Cancel the indicator after a lane change", Maneuver, CatalogOnly, Violation, [],
        [src("TR68-1", "7.5c", "The AV shall cancel its signal after the lane change manoeuvre is completed")]),
    rule!("FTD-107", "No unnecessary lane changes", Maneuver, CatalogOnly, Violation, [],
        [src("FTD", "107", "You should not change lanes or cross the centre dividing line unnecessarily")]),
    rule!("TR68-7.6.a", "Overtake only when safe", Maneuver, CatalogOnly, Violation, [],
        [src("TR68", "7.6 a", "An AV shall only perform an overtaking manoeuvre when it is safe to do so")]),
    rule!("TR68-7.6.e", "Overtaking sequence", Maneuver, CatalogOnly, Violation, [],
        [src("TR68-1", "7.6 e", "Signal right, Right lane change, Accelerate, Signal left, Left lane change, Cancel signal, Resume normal speed")]),
    rule!("TR68-7.6.f", "Overtake to the right", Maneuver, CatalogOnly, Violation, [],
        [src("TR68-1", "7.6 f", "An AV shall always overtake to the right")]),
    rule!("TR68-7.6.g", "No overtaking near junctions and crossings", Maneuver, CatalogOnly, Violation, [],
        [src("TR68-1", "7.6 g", "An AV shall not perform an overtaking manoeuvre at, or when approaching a pedestrian crossing")]),
    rule!("TR68-7.6.c", "Double white lines", Maneuver, CatalogOnly, Violation, [],
        [src("TR68-1", "7.6 c", "an AV shall never cross the double white line")]),
    rule!("TR68-7.6.d", "Oncoming lane only when clear", Maneuver, CatalogOnly, Violation, [],
        [src("TR68-1", "7.6 d", "An AV shall only move into the lane for oncoming traffic when performing an overtaking manoeuvre if the intended path is safe and clear of traffic")]),
    rule!("TR68-7.6.h", "No overtaking an overtaking vehicle", Maneuver, CatalogOnly, Violation, [],
        [src("TR68-1", "7.6 h", "An AV shall not perform an overtaking manoeuvre when the ORU in front is about to overtake another vehicle in front of it")]),
    rule!("TR68-7.6.j", "Yield when being overtaken", Maneuver, CatalogOnly, Violation, [],
        [src("TR68-1", "7.6 j", "When being overtaken, an AV shall slow down to allow the overtaking ORU to pass")]),
    rule!("BTD-71", "No sharp cut-in after overtaking", Maneuver, CatalogOnly, Violation, [],
        [src("BTD", "71", "do not cut in sharply in front of the vehicle you have just overtaken")]),
    rule!("BTD-137", "Overtaking restraint", Maneuver, CatalogOnly, Violation, [],
        [src("BTD", "137", "Do not overtake more than one vehicle at a time")]),
    rule!("FTD-136", "Judge oncoming traffic when overtaking", Maneuver, CatalogOnly, Violation, [],
        [src("FTD", "136", "estimate not only the space ahead of you but also the speed and distance of oncoming vehicles")]),
];

pub fn registry() -> &'static [Rule] {
    RULES
}

pub fn rule_lookup(id: &str) -> Option<&'static Rule> {
    RULES.iter().find(|r| r.id == id)
}

pub fn evaluable_rules() -> impl Iterator<Item = &'static Rule> {
    RULES.iter().filter(|r| r.is_evaluable())
}

//! Derived signals and maneuver segmentation.

pub mod distance;
pub mod kinematics;
pub mod maneuvers;
pub mod tracks;
pub mod ttc;

pub use distance::{aashto, braking_table, car_length_rule, following_distances, BrakingRow, DomainError, FollowingDistances};
pub use kinematics::{kinematics, KinematicSeries};
pub use maneuvers::{detect_maneuvers, ManeuverEvent, ManeuverKind};
pub use tracks::{ActorTrack, Tracks};
pub use ttc::{ttc_conflict_point, ttc_from_gap, ttc_longitudinal, Body, NotOnLane};

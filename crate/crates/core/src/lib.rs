//! Checks recorded autonomous-vehicle trajectories against Singapore road
//! rules (TR68-1, the Basic and Final Theory of Driving handbooks) and a set
//! of supplementary driving recommendations.

pub mod catalog;
pub mod engine;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod road;
pub mod scenario;

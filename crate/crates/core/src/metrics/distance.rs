//! Braking and following-distance models.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::ThresholdConfig;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("friction plus grade must be positive (got {0})")]
pub struct DomainError(pub f64);

/// AASHTO stopping sight distance in metres for speed `v_kmh`, reaction time
/// `t_s`, friction coefficient `f` and grade `g`.
pub fn aashto(v_kmh: f64, t_s: f64, f: f64, g: f64) -> Result<f64, DomainError> {
    let fg = f + g;
    if !(fg > 0.0) {
        return Err(DomainError(fg));
    }
    Ok(0.278 * t_s * v_kmh + v_kmh * v_kmh / (254.0 * fg))
}

/// Braking part of the AASHTO model alone (no reaction distance).
pub fn braking_distance(v_kmh: f64, f: f64, g: f64) -> Result<f64, DomainError> {
    aashto(v_kmh, 0.0, f, g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FollowingDistances {
    pub two_second_m: f64,
    pub car_length_rule_m: f64,
    pub tr68_stop_model_m: f64,
}

/// Car-length rule with a floor of one length at low speed.
pub fn car_length_rule(speed_kmh: f64, per_16kmh: f64, car_length: f64) -> f64 {
    (speed_kmh / 16.0 * per_16kmh).max(1.0) * car_length
}

pub fn following_distances(speed_kmh: f64, cfg: &ThresholdConfig) -> Result<FollowingDistances, DomainError> {
    let v = speed_kmh.max(0.0);
    Ok(FollowingDistances {
        two_second_m: 2.0 * v / 3.6,
        car_length_rule_m: car_length_rule(v, cfg.car_length_per_16kmh, cfg.car_length),
        tr68_stop_model_m: aashto(v, cfg.system_latency, cfg.friction_coefficient, cfg.road_grade)?
            + cfg.follow_stop_margin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrakingRow {
    pub speed_kmh: f64,
    pub aashto_m: f64,
    pub aashto_plus_margin_m: f64,
    pub two_second_m: f64,
    /// Linear car-length distance, one length per 16 km/h without the floor.
    pub car_length_m: f64,
}

/// Rows for speeds `step, 2*step, ..` up to `vmax` inclusive.
pub fn braking_table(
    t_s: f64,
    f: f64,
    g: f64,
    vmax: f64,
    step: f64,
    cfg: &ThresholdConfig,
) -> Result<Vec<BrakingRow>, DomainError> {
    let mut rows = Vec::new();
    if !(step > 0.0) {
        return Ok(rows);
    }
    let n = (vmax / step + 1e-9).floor() as i64;
    for k in 1..=n {
        let v = k as f64 * step;
        let a = aashto(v, t_s, f, g)?;
        rows.push(BrakingRow {
            speed_kmh: v,
            aashto_m: a,
            aashto_plus_margin_m: a + cfg.follow_stop_margin,
            two_second_m: 2.0 * v / 3.6,
            car_length_m: v / 16.0 * cfg.car_length_per_16kmh * cfg.car_length,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((aashto(50.0, 1.0, 0.7, 0.0).unwrap() - 27.96).abs() < 0.01);
        assert!((aashto(50.0, 1.0, 0.6, 0.0).unwrap() - 30.30).abs() < 0.01);
        assert_eq!(aashto(0.0, 1.0, 0.7, 0.0).unwrap(), 0.0);
        assert!(aashto(50.0, 1.0, 0.1, -0.1).is_err());
    }

    #[test]
    fn following_at_reference_speeds() {
        let cfg = ThresholdConfig::default();
        let d = following_distances(50.0, &cfg).unwrap();
        assert!((d.two_second_m - 27.78).abs() < 0.01);
        assert!((following_distances(48.0, &cfg).unwrap().car_length_rule_m - 13.5).abs() < 1e-9);
        let z = following_distances(0.0, &cfg).unwrap();
        assert_eq!((z.two_second_m, z.car_length_rule_m, z.tr68_stop_model_m), (0.0, 4.5, 2.0));
    }
}

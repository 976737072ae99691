//! Per-point criticality scoring against the drive tube.
//!
//! A point's criticality is the product of three components, each in `[0, 1]`:
//!
//! * velocity criticality, quadratic in the assumed collision speed,
//! * tube criticality, 1 inside the tube and a smoothstep fall-off across the
//!   insecurity zone,
//! * distance criticality, the share of kinetic energy the vehicle would still
//!   carry at the point after reacting and braking immediately.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{compensate_doppler, EgoState, PointId, RadarPoint, Scan};
use crate::trajectory::{project_point, Trajectory};

/// Lower and upper end of the velocity-based comparison ramp, m/s.
pub const VELOCITY_RAMP_START: f64 = 0.4;
pub const VELOCITY_RAMP_WIDTH: f64 = 1.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CriticalityParams {
    /// Collision speed that maps to full velocity criticality, m/s.
    pub v_max_domain: f64,
    pub vehicle_half_width: f64,
    pub safety_margin: f64,
    pub insecurity_width: f64,
    /// Reaction time before braking starts, s.
    pub t_react: f64,
    /// Braking deceleration, m/s².
    pub a_brake: f64,
    pub crit_thresh: f64,
    /// Points whose foot lies before the first state but within this distance
    /// of it are treated as being at the start of the path.
    pub vehicle_length: f64,
}

impl Default for CriticalityParams {
    fn default() -> Self {
        Self {
            v_max_domain: 30.0 / 3.6,
            vehicle_half_width: 1.0,
            safety_margin: 0.1,
            insecurity_width: 2.0,
            t_react: 0.5,
            a_brake: 8.0,
            crit_thresh: 0.1,
            vehicle_length: 4.5,
        }
    }
}

impl CriticalityParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("v_max_domain", self.v_max_domain),
            ("vehicle_half_width", self.vehicle_half_width),
            ("safety_margin", self.safety_margin),
            ("insecurity_width", self.insecurity_width),
            ("t_react", self.t_react),
            ("a_brake", self.a_brake),
            ("vehicle_length", self.vehicle_length),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.crit_thresh > 0.0 && self.crit_thresh <= 1.0) {
            return Err(Error::Config(format!(
                "crit_thresh must lie in (0, 1], got {}",
                self.crit_thresh
            )));
        }
        Ok(())
    }

    /// Half width of the tube including the safety margin.
    pub fn tube_edge(&self) -> f64 {
        self.vehicle_half_width + self.safety_margin
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CriticalityScore {
    pub crit_vel: f64,
    pub crit_tube: f64,
    pub crit_ttc: f64,
    pub crit_p: f64,
    /// Collision speed assumed for the velocity component, m/s.
    pub v_coll: f64,
}

impl CriticalityScore {
    pub fn new(crit_vel: f64, crit_tube: f64, crit_ttc: f64, v_coll: f64) -> Self {
        Self {
            crit_vel,
            crit_tube,
            crit_ttc,
            crit_p: crit_vel * crit_tube * crit_ttc,
            v_coll,
        }
    }
}

pub fn velocity_criticality(v_coll: f64, params: &CriticalityParams) -> f64 {
    (v_coll * v_coll / (params.v_max_domain * params.v_max_domain)).min(1.0)
}

pub fn tube_criticality(d_tube: f64, params: &CriticalityParams) -> f64 {
    let edge = params.tube_edge();
    if d_tube <= edge {
        return 1.0;
    }
    let u = (d_tube - edge) / params.insecurity_width;
    if u >= 1.0 {
        return 0.0;
    }
    1.0 - u * u * (3.0 - 2.0 * u)
}

/// Returns `(score, v_coll)` for a point `d_dist` ahead when driving at `v_pt`.
///
/// `v_coll` is the speed left when braking at `a_brake` after `t_react`; the
/// score is `v_coll² / v_pt²`.
pub fn distance_criticality(d_dist: f64, v_pt: f64, params: &CriticalityParams) -> (f64, f64) {
    if v_pt <= 0.0 {
        return (0.0, 0.0);
    }
    let d_react = v_pt * params.t_react;
    let v_coll = if d_dist <= d_react {
        v_pt
    } else {
        (v_pt * v_pt - 2.0 * params.a_brake * (d_dist - d_react))
            .max(0.0)
            .sqrt()
    };
    ((v_coll * v_coll / (v_pt * v_pt)).min(1.0), v_coll)
}

pub fn score_point(p: &RadarPoint, traj: &Trajectory, params: &CriticalityParams) -> CriticalityScore {
    let Ok(pr) = project_point(traj, p.position()) else {
        return CriticalityScore::default();
    };
    let tube = tube_criticality(pr.d_tube, params);
    let d_dist = if pr.on_path {
        Some(pr.d_dist)
    } else if pr.before_start && pr.d_tube <= params.vehicle_length {
        Some(0.0)
    } else {
        None
    };
    let (ttc, v_coll) = d_dist
        .map(|d| distance_criticality(d, pr.v_pt, params))
        .unwrap_or((0.0, 0.0));
    CriticalityScore::new(velocity_criticality(v_coll, params), tube, ttc, v_coll)
}

pub fn score_scan(
    scan: &Scan,
    traj: &Trajectory,
    params: &CriticalityParams,
) -> Vec<(PointId, CriticalityScore)> {
    scan.points
        .iter()
        .map(|p| (p.id, score_point(p, traj, params)))
        .collect()
}

/// Ids whose `crit_p` reaches the threshold (inclusive).
pub fn classify_critical(
    scores: &[(PointId, CriticalityScore)],
    params: &CriticalityParams,
) -> BTreeSet<PointId> {
    classify_by_threshold(scores.iter().map(|(id, s)| (*id, s.crit_p)), params.crit_thresh)
}

pub fn classify_by_threshold(
    scores: impl IntoIterator<Item = (PointId, f64)>,
    thresh: f64,
) -> BTreeSet<PointId> {
    scores
        .into_iter()
        .filter(|(_, c)| *c >= thresh)
        .map(|(id, _)| id)
        .collect()
}

/// Comparison scorer: linear ramp over the ego-compensated doppler speed.
pub fn velocity_based_criticality(p: &RadarPoint, ego: &EgoState) -> f64 {
    let v = compensate_doppler(p, ego).abs();
    ((v - VELOCITY_RAMP_START) / VELOCITY_RAMP_WIDTH).clamp(0.0, 1.0)
}

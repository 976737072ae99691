//! Synthesis of feasible critical trajectories toward vulnerable road users.
//!
//! The synthesized path is a circular arc that leaves the vehicle origin
//! tangent to the heading axis and passes through the target detection. The
//! speed ramps from the current ego speed at the longitudinal limit up to the
//! highest collision speed the lateral, longitudinal and domain limits allow,
//! then stays constant. Past the target the path continues along the arc's
//! tangent.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::criticality::{score_point, CriticalityParams};
use crate::error::{Error, Result};
use crate::model::{EgoState, Label, PointId, RadarPoint, Scan};
use crate::trajectory::{
    dist, Trajectory, TrajectoryState, DEFAULT_DT, DEFAULT_STATE_COUNT, WHEELBASE,
};

/// Below this lateral offset a target counts as straight ahead.
pub const STRAIGHT_EPS: f64 = 1e-6;

// Limits are applied with a relative margin so the sampled states satisfy
// them after rounding.
const LIMIT_MARGIN: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReachabilityConfig {
    pub a_long_max: f64,
    pub a_lat_max: f64,
    pub r_min: f64,
    pub v_max_domain: f64,
    pub track_expand_radius: f64,
    pub vru_labels: Vec<Label>,
}

impl Default for ReachabilityConfig {
    fn default() -> Self {
        Self {
            a_long_max: 10.0,
            a_lat_max: 8.0,
            r_min: 6.0,
            v_max_domain: 8.5,
            track_expand_radius: 2.0,
            vru_labels: vec![Label::Pedestrian, Label::PedestrianGroup, Label::Bicycle],
        }
    }
}

impl ReachabilityConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a_long_max", self.a_long_max),
            ("a_lat_max", self.a_lat_max),
            ("r_min", self.r_min),
            ("v_max_domain", self.v_max_domain),
            ("track_expand_radius", self.track_expand_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ArcShape {
    Straight,
    /// Signed radius, positive for left turns.
    Circle { radius: f64 },
}

impl ArcShape {
    /// Signed radius, infinite for a straight path.
    pub fn radius(&self) -> f64 {
        match self {
            ArcShape::Straight => f64::INFINITY,
            ArcShape::Circle { radius } => *radius,
        }
    }

    /// Position and heading after travelling `s` metres along the shape.
    pub fn point_at(&self, s: f64) -> ([f64; 2], f64) {
        match *self {
            ArcShape::Straight => ([s, 0.0], 0.0),
            ArcShape::Circle { radius: r } => {
                let heading = s / r;
                ([r * heading.sin(), r * (1.0 - heading.cos())], heading)
            }
        }
    }

    /// Exact path length from the origin to `(x, y)` on this shape.
    pub fn length_to(&self, x: f64, y: f64) -> f64 {
        match *self {
            ArcShape::Straight => x,
            ArcShape::Circle { radius } => radius.abs() * 2.0 * y.abs().atan2(x),
        }
    }
}

/// Circle through the origin, tangent to +x, through `(x_vru, y_vru)`:
/// `r = (x² + y²) / (2y)`.
pub fn arc_to_point(x_vru: f64, y_vru: f64) -> Result<ArcShape> {
    if !(x_vru > 0.0) {
        return Err(Error::Unreachable("target is not ahead of the vehicle"));
    }
    if y_vru.abs() < STRAIGHT_EPS {
        return Ok(ArcShape::Straight);
    }
    Ok(ArcShape::Circle {
        radius: (x_vru * x_vru + y_vru * y_vru) / (2.0 * y_vru),
    })
}

/// Time to reach the target under a mean-speed model:
/// `2 r asin(x / r) / (v0 + v_coll) - t0`, or `2 x / (v0 + v_coll) - t0` when straight.
pub fn collision_time(shape: ArcShape, x_vru: f64, v0: f64, v_coll: f64, t0: f64) -> Result<f64> {
    let v_sum = v0 + v_coll;
    if !(v_sum > 0.0) {
        return Err(Error::Unreachable("no motion toward the target"));
    }
    let s = match shape {
        ArcShape::Straight => x_vru,
        ArcShape::Circle { radius: r } => r * (x_vru / r).clamp(-1.0, 1.0).asin(),
    };
    Ok(2.0 * s / v_sum - t0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalTrajectory {
    pub trajectory: Trajectory,
    pub target_point_id: PointId,
    pub target: [f64; 2],
    pub shape: ArcShape,
    /// Exact path length to the target.
    pub arc_length: f64,
    pub t_coll: f64,
    pub v_coll: f64,
    /// Ego speed the trajectory starts from.
    pub v0: f64,
}

impl CriticalTrajectory {
    pub fn radius(&self) -> f64 {
        self.shape.radius()
    }
}

/// Speed and distance of the ramp profile at time `t`.
struct RampProfile {
    v0: f64,
    v_end: f64,
    accel: f64,
}

impl RampProfile {
    fn ramp_time(&self) -> f64 {
        if self.v_end > self.v0 {
            (self.v_end - self.v0) / self.accel
        } else {
            0.0
        }
    }

    fn at(&self, t: f64) -> (f64, f64, f64) {
        let tr = self.ramp_time();
        if t < tr {
            let v = self.v0 + self.accel * t;
            (v, self.v0 * t + 0.5 * self.accel * t * t, self.accel)
        } else {
            let s_ramp = self.v0 * tr + 0.5 * self.accel * tr * tr;
            (self.v_end, s_ramp + self.v_end * (t - tr), 0.0)
        }
    }
}

fn trajectory_along(shape: ArcShape, s_target: f64, profile: &RampProfile) -> Trajectory {
    let (target, target_heading) = shape.point_at(s_target);
    let steering = match shape {
        ArcShape::Straight => 0.0,
        ArcShape::Circle { radius } => (WHEELBASE / radius).atan(),
    };
    let states = (1..=DEFAULT_STATE_COUNT)
        .map(|k| {
            let t = k as f64 * DEFAULT_DT;
            let (v, s, a) = profile.at(t);
            if s <= s_target {
                let (p, heading) = shape.point_at(s);
                TrajectoryState {
                    x: p[0],
                    y: p[1],
                    v,
                    a,
                    steering,
                    yaw: heading,
                }
            } else {
                let ds = s - s_target;
                TrajectoryState {
                    x: target[0] + ds * target_heading.cos(),
                    y: target[1] + ds * target_heading.sin(),
                    v,
                    a,
                    steering: 0.0,
                    yaw: target_heading,
                }
            }
        })
        .collect();
    Trajectory {
        states,
        dt: DEFAULT_DT,
    }
}

/// Builds the critical trajectory toward one target, or `None` when the
/// target violates a limit or would not be critical under `crit`.
pub fn trajectory_to_target(
    target: &RadarPoint,
    ego: &EgoState,
    cfg: &ReachabilityConfig,
    crit: &CriticalityParams,
) -> Option<CriticalTrajectory> {
    let shape = arc_to_point(target.x, target.y).ok()?;
    let lateral_cap = match shape {
        ArcShape::Straight => f64::INFINITY,
        ArcShape::Circle { radius } => {
            if radius.abs() < cfg.r_min {
                return None;
            }
            (cfg.a_lat_max * radius.abs()).sqrt() * (1.0 - LIMIT_MARGIN)
        }
    };
    let v_cap = cfg.v_max_domain.min(lateral_cap);
    let v0 = ego.v;
    if v0 > v_cap {
        return None;
    }
    let accel = cfg.a_long_max * (1.0 - LIMIT_MARGIN);
    let s_target = shape.length_to(target.x, target.y);
    let v_coll = v_cap.min((v0 * v0 + 2.0 * accel * s_target).sqrt());
    if !(v_coll > 0.0) {
        return None;
    }
    let profile = RampProfile {
        v0,
        v_end: v_coll,
        accel,
    };
    let trajectory = trajectory_along(shape, s_target, &profile);
    if !(score_point(target, &trajectory, crit).crit_p > 0.0) {
        return None;
    }
    Some(CriticalTrajectory {
        trajectory,
        target_point_id: target.id,
        target: target.position(),
        shape,
        arc_length: s_target,
        t_coll: collision_time(shape, target.x, v0, v_coll, 0.0).ok()?,
        v_coll,
        v0,
    })
}

/// Searches VRU detections by ascending range (then id) and returns the
/// trajectory toward the first reachable one.
pub fn synthesize_critical_trajectory(
    scan: &Scan,
    cfg: &ReachabilityConfig,
    crit: &CriticalityParams,
) -> Option<CriticalTrajectory> {
    let mut candidates: Vec<&RadarPoint> = scan
        .points
        .iter()
        .filter(|p| cfg.vru_labels.contains(&p.label) && p.x > 0.0)
        .collect();
    candidates.sort_by(|a, b| a.range().total_cmp(&b.range()).then(a.id.cmp(&b.id)));
    candidates
        .into_iter()
        .find_map(|p| trajectory_to_target(p, &scan.ego, cfg, crit))
}

/// Ground-truth critical set: the target plus detections of the same track
/// closer than `track_expand_radius` to it.
pub fn build_set_b(
    scan: &Scan,
    ct: &CriticalTrajectory,
    cfg: &ReachabilityConfig,
) -> Result<BTreeSet<PointId>> {
    let target = scan
        .point(ct.target_point_id)
        .ok_or(Error::MissingPoint(ct.target_point_id))?;
    let mut set = BTreeSet::from([target.id]);
    if let Some(track) = &target.track_id {
        set.extend(
            scan.points
                .iter()
                .filter(|p| {
                    p.track_id.as_ref() == Some(track)
                        && dist(p.position(), target.position()) < cfg.track_expand_radius
                })
                .map(|p| p.id),
        );
    }
    Ok(set)
}

/// A limit violated by a synthesized trajectory.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Radius { radius: f64 },
    Lateral { state: usize, accel: f64 },
    Longitudinal { state: usize, accel: f64 },
    Speed { state: usize, v: f64 },
}

/// State-by-state limit check. The longitudinal check includes the step from
/// the starting ego speed to the first state.
pub fn check_feasibility(ct: &CriticalTrajectory, cfg: &ReachabilityConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let r = ct.radius().abs();
    if r < cfg.r_min {
        out.push(Violation::Radius { radius: ct.radius() });
    }
    let traj = &ct.trajectory;
    let mut prev_v = ct.v0;
    for (i, s) in traj.states.iter().enumerate() {
        let lat = s.v * s.v / r;
        if lat > cfg.a_lat_max {
            out.push(Violation::Lateral { state: i, accel: lat });
        }
        let lon = (s.v - prev_v).abs() / traj.dt;
        if lon > cfg.a_long_max {
            out.push(Violation::Longitudinal { state: i, accel: lon });
        }
        if s.v > cfg.v_max_domain {
            out.push(Violation::Speed { state: i, v: s.v });
        }
        prev_v = s.v;
    }
    out
}

/// Largest distance of the origin or the target from the synthesized circle
/// (or the x axis for straight paths). The origin tangency holds by construction.
pub fn arc_residual(ct: &CriticalTrajectory) -> f64 {
    let [x, y] = ct.target;
    match ct.shape {
        ArcShape::Straight => y.abs(),
        ArcShape::Circle { radius: r } => {
            let origin = (0.0f64.hypot(-r) - r.abs()).abs();
            let target = (x.hypot(y - r) - r.abs()).abs();
            origin.max(target)
        }
    }
}

#[derive(Serialize)]
struct TrajectoryRecord<'a> {
    sequence: &'a str,
    scan: usize,
    target_scan: u32,
    target_row: u32,
    radius: Option<f64>,
    t_coll: f64,
    v_coll: f64,
    states: &'a [TrajectoryState],
}

pub fn write_trajectory_record(
    mut w: impl Write,
    sequence: &str,
    scan: usize,
    ct: &CriticalTrajectory,
) -> std::io::Result<()> {
    let rec = TrajectoryRecord {
        sequence,
        scan,
        target_scan: ct.target_point_id.scan,
        target_row: ct.target_point_id.row,
        radius: ct.radius().is_finite().then(|| ct.radius()),
        t_coll: ct.t_coll,
        v_coll: ct.v_coll,
        states: &ct.trajectory.states,
    };
    serde_json::to_writer(&mut w, &rec)?;
    w.write_all(b"\n")
}

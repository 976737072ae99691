//! Drive-tube geometry against a discrete planned trajectory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EgoState;

pub const DEFAULT_DT: f64 = 0.2;
pub const DEFAULT_HORIZON: f64 = 3.0;
pub const DEFAULT_STATE_COUNT: usize = 15;

/// Wheelbase used to express yaw rate as a steering angle (single-track model).
pub const WHEELBASE: f64 = 2.8;

/// One planned state `[x, y, v, a, steering, yaw]` in the vehicle frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub a: f64,
    pub steering: f64,
    pub yaw: f64,
}

impl TrajectoryState {
    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<TrajectoryState>,
    /// Time between consecutive states in seconds.
    pub dt: f64,
}

impl Trajectory {
    pub fn new(states: Vec<TrajectoryState>, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Validation(format!("state spacing {dt} must be positive")));
        }
        if let Some(s) = states.iter().find(|s| !(s.v >= 0.0)) {
            return Err(Error::Validation(format!("negative planned speed {}", s.v)));
        }
        Ok(Self { states, dt })
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.states.len() as f64
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Total polyline length.
    pub fn path_length(&self) -> f64 {
        self.states
            .windows(2)
            .map(|w| dist(w[0].position(), w[1].position()))
            .sum()
    }
}

/// Where a point sits relative to the drive tube.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeProjection {
    /// Unsigned lateral distance to the path centerline.
    pub d_tube: f64,
    /// Travel distance along the path from the first state to the foot point.
    pub d_dist: f64,
    /// Planned speed at the state nearest to the point.
    pub v_pt: f64,
    pub a_pt: f64,
    pub segment_index: usize,
    /// False when the foot point clamps to the first or last vertex.
    pub on_path: bool,
    /// The foot point clamped before the first vertex.
    pub before_start: bool,
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Projects `p` onto the trajectory polyline.
///
/// Consecutive coincident states are collapsed before projecting. A
/// trajectory whose states all coincide is treated as a standstill: the
/// distance is measured to that single position and the planned speed is 0.
pub fn project_point(traj: &Trajectory, p: [f64; 2]) -> Result<TubeProjection> {
    let states = &traj.states;
    if states.len() < 2 {
        return Err(Error::TooFewStates(states.len()));
    }

    // indices of distinct vertices, keeping the last state of each duplicate run
    let mut verts: Vec<usize> = Vec::with_capacity(states.len());
    for i in 0..states.len() {
        match verts.last_mut() {
            Some(last) if states[*last].position() == states[i].position() => *last = i,
            _ => verts.push(i),
        }
    }

    if verts.len() < 2 {
        return Ok(TubeProjection {
            d_tube: dist(states[0].position(), p),
            d_dist: 0.0,
            v_pt: 0.0,
            a_pt: 0.0,
            segment_index: 0,
            on_path: false,
            before_start: true,
        });
    }

    let last_seg = verts.len() - 2;
    let mut best_d2 = f64::INFINITY;
    let mut best = (0usize, 0.0f64, 0.0f64); // (segment, raw t, clamped t)
    let mut cum = 0.0;
    let mut best_cum = 0.0;
    let mut best_len = 0.0;
    for k in 0..=last_seg {
        let a = states[verts[k]].position();
        let b = states[verts[k + 1]].position();
        let ab = [b[0] - a[0], b[1] - a[1]];
        let len2 = ab[0] * ab[0] + ab[1] * ab[1];
        let t = ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2;
        let tc = t.clamp(0.0, 1.0);
        let fx = a[0] + tc * ab[0] - p[0];
        let fy = a[1] + tc * ab[1] - p[1];
        let d2 = fx * fx + fy * fy;
        let len = len2.sqrt();
        if d2 < best_d2 {
            best_d2 = d2;
            best = (k, t, tc);
            best_cum = cum;
            best_len = len;
        }
        cum += len;
    }

    let (k, t, tc) = best;
    let before_start = k == 0 && t < 0.0;
    let beyond_end = k == last_seg && t > 1.0;

    let nearest = states
        .iter()
        .enumerate()
        .map(|(i, s)| (i, dist(s.position(), p)))
        .fold((0usize, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc })
        .0;

    Ok(TubeProjection {
        d_tube: best_d2.sqrt(),
        d_dist: best_cum + tc * best_len,
        v_pt: states[nearest].v,
        a_pt: states[nearest].a,
        segment_index: verts[k],
        on_path: !(before_start || beyond_end),
        before_start,
    })
}

/// Unrolls the current motion (constant speed, constant yaw rate) into a
/// trajectory with states at `dt, 2dt, ..., horizon` in the vehicle frame.
///
/// # Panics
///
/// Panics if `dt` is not positive or `horizon < dt`.
pub fn propagate_ego_tube(ego: &EgoState, horizon: f64, dt: f64) -> Trajectory {
    assert!(dt > 0.0 && horizon >= dt, "need dt > 0 and horizon >= dt");
    let n = (horizon / dt).round() as usize;
    let v = ego.v;
    let w = ego.yaw_rate;
    let steering = if v > 0.0 { (WHEELBASE * w / v).atan() } else { 0.0 };
    let states = (1..=n)
        .map(|k| {
            let t = k as f64 * dt;
            let yaw = w * t;
            let (x, y) = if w.abs() < 1e-9 {
                (v * t, 0.0)
            } else {
                (v / w * yaw.sin(), v / w * (1.0 - yaw.cos()))
            };
            TrajectoryState {
                x,
                y,
                v,
                a: 0.0,
                steering,
                yaw,
            }
        })
        .collect();
    Trajectory { states, dt }
}

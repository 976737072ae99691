//! Deterministic synthetic scenes: an ego vehicle, VRUs moving on straight
//! lines with configurable RCS behavior, and uniform clutter.
//!
//! Doppler values are generated so that [`compensate_doppler`] returns the
//! planted radial velocity of each detection.
//!
//! [`compensate_doppler`]: crate::model::compensate_doppler

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EgoState, Label, PointId, RadarPoint, Scan, Sequence, DEFAULT_CYCLE_PERIOD};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EgoProfile {
    Standstill,
    Straight { v: f64 },
    Arc { v: f64, yaw_rate: f64 },
}

impl EgoProfile {
    pub fn state_at(&self, t: f64) -> EgoState {
        match *self {
            EgoProfile::Standstill => EgoState::at_rest(t),
            EgoProfile::Straight { v } => EgoState {
                x: v * t,
                v,
                ..EgoState::at_rest(t)
            },
            EgoProfile::Arc { v, yaw_rate } => {
                let yaw = yaw_rate * t;
                let (x, y) = if yaw_rate.abs() < 1e-12 {
                    (v * t, 0.0)
                } else {
                    (v / yaw_rate * yaw.sin(), v / yaw_rate * (1.0 - yaw.cos()))
                };
                EgoState {
                    t,
                    x,
                    y,
                    yaw,
                    v,
                    yaw_rate,
                }
            }
        }
    }
}

/// RCS in dBm², drawn per detection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RcsModel {
    Uniform { min: f64, max: f64 },
    /// Strong returns on every `strong_every`-th scan (starting with scan 0),
    /// weak returns otherwise.
    Alternating {
        strong: [f64; 2],
        weak: [f64; 2],
        strong_every: usize,
    },
}

impl RcsModel {
    fn range_for_scan(&self, scan: usize) -> [f64; 2] {
        match *self {
            RcsModel::Uniform { min, max } => [min, max],
            RcsModel::Alternating {
                strong,
                weak,
                strong_every,
            } => {
                if scan.is_multiple_of(strong_every) {
                    strong
                } else {
                    weak
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ranges = match self {
            RcsModel::Uniform { min, max } => vec![[*min, *max]],
            RcsModel::Alternating {
                strong,
                weak,
                strong_every,
            } => {
                if *strong_every == 0 {
                    return Err(Error::Config("strong_every must be at least 1".into()));
                }
                vec![*strong, *weak]
            }
        };
        check_ranges(&ranges)
    }
}

impl Default for RcsModel {
    fn default() -> Self {
        RcsModel::Uniform {
            min: -17.0,
            max: -6.0,
        }
    }
}

fn check_ranges(ranges: &[[f64; 2]]) -> Result<()> {
    for r in ranges {
        if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
            return Err(Error::Config(format!("invalid range [{}, {}]", r[0], r[1])));
        }
    }
    Ok(())
}

/// A road user moving at constant world velocity; positions are given in the
/// world frame, which coincides with the vehicle frame at t = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VruSpec {
    pub label: Label,
    #[serde(default)]
    pub track_id: Option<String>,
    pub start: [f64; 2],
    #[serde(default)]
    pub velocity: [f64; 2],
    pub points_per_scan: usize,
    /// Detections scatter uniformly over a disc of this radius, m.
    #[serde(default = "default_extent")]
    pub extent: f64,
    #[serde(default)]
    pub rcs: RcsModel,
}

fn default_extent() -> f64 {
    0.3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub points_per_scan: usize,
    pub rcs: [f64; 2],
    /// Vehicle-frame sampling window.
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    /// Planted radial speeds are uniform in `[-radial_speed, radial_speed]`.
    pub radial_speed: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            points_per_scan: 0,
            rcs: [-25.0, -5.0],
            x_range: [0.0, 20.0],
            y_range: [-10.0, 10.0],
            radial_speed: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    #[serde(default = "default_id")]
    pub id: String,
    pub seed: u64,
    pub n_scans: usize,
    #[serde(default = "default_cycle")]
    pub cycle_period: f64,
    pub ego: EgoProfile,
    #[serde(default)]
    pub vrus: Vec<VruSpec>,
    #[serde(default)]
    pub noise: NoiseSpec,
}

fn default_id() -> String {
    "scene".into()
}

fn default_cycle() -> f64 {
    DEFAULT_CYCLE_PERIOD
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cycle_period > 0.0) {
            return Err(Error::Config("cycle_period must be positive".into()));
        }
        let speed = match self.ego {
            EgoProfile::Standstill => 0.0,
            EgoProfile::Straight { v } | EgoProfile::Arc { v, .. } => v,
        };
        if !(speed >= 0.0 && speed.is_finite()) {
            return Err(Error::Config(format!("ego speed {speed} must be non-negative")));
        }
        for v in &self.vrus {
            v.rcs.validate()?;
            if !(v.extent >= 0.0) {
                return Err(Error::Config("VRU extent must be non-negative".into()));
            }
        }
        let n = &self.noise;
        check_ranges(&[n.rcs, n.x_range, n.y_range])?;
        if !(n.radial_speed >= 0.0) {
            return Err(Error::Config("noise radial_speed must be non-negative".into()));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: SceneSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }
}

fn uniform(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        // keep the draw count fixed
        let _: f64 = rng.gen();
        r[0]
    } else {
        rng.gen_range(r[0]..r[1])
    }
}

fn detection(
    id: PointId,
    ego: &EgoState,
    pos: [f64; 2],
    radial: f64,
    rcs: f64,
    label: Label,
    track_id: Option<String>,
) -> RadarPoint {
    let phi = if pos == [0.0, 0.0] { 0.0 } else { pos[1].atan2(pos[0]) };
    RadarPoint {
        id,
        t: ego.t,
        sensor_id: 0,
        x: pos[0],
        y: pos[1],
        v_dopp: radial + ego.v * phi.cos(),
        rcs,
        label,
        track_id,
        phi,
    }
}

/// Generates the sequence described by `spec`. Same spec, same output.
pub fn generate(spec: &SceneSpec) -> Result<Sequence> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut seq = Sequence {
        id: spec.id.clone(),
        scans: Vec::with_capacity(spec.n_scans),
        cycle_period: spec.cycle_period,
    };
    for k in 0..spec.n_scans {
        let t = k as f64 * spec.cycle_period;
        let ego = spec.ego.state_at(t);
        let (sin_yaw, cos_yaw) = ego.yaw.sin_cos();
        let mut points = Vec::new();

        for vru in &spec.vrus {
            let center = [vru.start[0] + vru.velocity[0] * t, vru.start[1] + vru.velocity[1] * t];
            let vel = [
                cos_yaw * vru.velocity[0] + sin_yaw * vru.velocity[1],
                -sin_yaw * vru.velocity[0] + cos_yaw * vru.velocity[1],
            ];
            let rcs_range = vru.rcs.range_for_scan(k);
            for _ in 0..vru.points_per_scan {
                let r = vru.extent * rng.gen::<f64>().sqrt();
                let a = TAU * rng.gen::<f64>();
                let world = [center[0] + r * a.cos(), center[1] + r * a.sin()];
                let pos = ego.to_vehicle(world);
                let range = pos[0].hypot(pos[1]);
                let radial = if range > 0.0 {
                    (pos[0] * vel[0] + pos[1] * vel[1]) / range
                } else {
                    0.0
                };
                let rcs = uniform(&mut rng, rcs_range);
                let id = PointId::new(k as u32, points.len() as u32);
                points.push(detection(id, &ego, pos, radial, rcs, vru.label, vru.track_id.clone()));
            }
        }

        let n = &spec.noise;
        for _ in 0..n.points_per_scan {
            let pos = [uniform(&mut rng, n.x_range), uniform(&mut rng, n.y_range)];
            let radial = uniform(&mut rng, [-n.radial_speed, n.radial_speed]);
            let rcs = uniform(&mut rng, n.rcs);
            let id = PointId::new(k as u32, points.len() as u32);
            points.push(detection(id, &ego, pos, radial, rcs, Label::Static, None));
        }

        seq.scans.push(Scan { t, ego, points });
    }
    seq.validate()?;
    Ok(seq)
}

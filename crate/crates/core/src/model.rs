//! Core domain types, the JSON Lines sequence format, and ego-motion
//! doppler compensation.
//!
//! A sequence file is UTF-8 JSON Lines with two record kinds:
//!
//! ```text
//! {"type":"ego","t":0.0,"x":0.0,"y":0.0,"yaw":0.0,"v":5.0,"yaw_rate":0.0}
//! {"type":"pt","t":0.0,"sensor":1,"x":8.0,"y":0.5,"v_dopp":4.9,"rcs":-8.0,"label":7,"track":"ped-1","phi":0.06}
//! ```
//!
//! Every `pt` line belongs to the closest preceding `ego` line, which opens a
//! new scan. Point ids are assigned while loading as `(scan index, row index)`.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default radar cycle period in seconds.
pub const DEFAULT_CYCLE_PERIOD: f64 = 0.091;

/// Stable identity of a radar detection within a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PointId {
    pub scan: u32,
    pub row: u32,
}

impl PointId {
    pub const fn new(scan: u32, row: u32) -> Self {
        Self { scan, row }
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.scan, self.row)
    }
}

/// Semantic class of a detection. Numeric ids follow the RadarScenes label map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Car,
    LargeVehicle,
    Truck,
    Bus,
    Train,
    Bicycle,
    MotorizedTwoWheeler,
    Pedestrian,
    PedestrianGroup,
    Animal,
    OtherDynamic,
    Static,
}

impl Label {
    pub const ALL: [Label; 12] = [
        Label::Car,
        Label::LargeVehicle,
        Label::Truck,
        Label::Bus,
        Label::Train,
        Label::Bicycle,
        Label::MotorizedTwoWheeler,
        Label::Pedestrian,
        Label::PedestrianGroup,
        Label::Animal,
        Label::OtherDynamic,
        Label::Static,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    /// Pedestrians, pedestrian groups and bicycles.
    pub fn is_vru(self) -> bool {
        matches!(
            self,
            Label::Pedestrian | Label::PedestrianGroup | Label::Bicycle
        )
    }

    pub fn name(self) -> &'static str {
        [
            "car",
            "large_vehicle",
            "truck",
            "bus",
            "train",
            "bicycle",
            "motorized_two_wheeler",
            "pedestrian",
            "pedestrian_group",
            "animal",
            "other_dynamic",
            "static",
        ][self as usize]
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Label::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown label '{s}'"))
    }
}

/// One radar detection in the vehicle frame (x forward, y left).
#[derive(Clone, Debug, PartialEq)]
pub struct RadarPoint {
    pub id: PointId,
    pub t: f64,
    pub sensor_id: i64,
    pub x: f64,
    pub y: f64,
    /// Radial doppler velocity in m/s.
    pub v_dopp: f64,
    /// Radar cross section in dBm².
    pub rcs: f64,
    pub label: Label,
    pub track_id: Option<String>,
    /// Angle between the sensor normal and the line of sight, radians.
    pub phi: f64,
}

impl RadarPoint {
    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn range(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Ego pose and motion in the world frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EgoState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub v: f64,
    pub yaw_rate: f64,
}

impl EgoState {
    pub fn at_rest(t: f64) -> Self {
        Self {
            t,
            x: 0.0,
            y: 0.0,
            yaw: 0.0,
            v: 0.0,
            yaw_rate: 0.0,
        }
    }

    /// Vehicle-frame position to world frame.
    pub fn to_world(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.yaw.sin_cos();
        [self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1]]
    }

    /// World-frame position to this pose's vehicle frame.
    pub fn to_vehicle(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.yaw.sin_cos();
        let dx = p[0] - self.x;
        let dy = p[1] - self.y;
        [c * dx + s * dy, -s * dx + c * dy]
    }
}

/// One merged point cloud together with the ego state it was measured at.
#[derive(Clone, Debug, PartialEq)]
pub struct Scan {
    pub t: f64,
    pub ego: EgoState,
    pub points: Vec<RadarPoint>,
}

impl Scan {
    pub fn point(&self, id: PointId) -> Option<&RadarPoint> {
        // ids are assigned densely on load, try the direct slot first
        match self.points.get(id.row as usize) {
            Some(p) if p.id == id => Some(p),
            _ => self.points.iter().find(|p| p.id == id),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    pub id: String,
    pub scans: Vec<Scan>,
    pub cycle_period: f64,
}

impl Sequence {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            scans: Vec::new(),
            cycle_period: DEFAULT_CYCLE_PERIOD,
        }
    }

    pub fn point_count(&self) -> usize {
        self.scans.iter().map(|s| s.points.len()).sum()
    }

    /// Checks ordering and value invariants of every scan.
    pub fn validate(&self) -> Result<()> {
        if !(self.cycle_period > 0.0) {
            return Err(Error::Validation(format!(
                "cycle period must be positive, got {}",
                self.cycle_period
            )));
        }
        for (i, scan) in self.scans.iter().enumerate() {
            validate_ego(&scan.ego).map_err(Error::Validation)?;
            if i > 0 && scan.t <= self.scans[i - 1].t {
                return Err(Error::Validation(format!(
                    "scan {i} at t={} does not follow t={}",
                    scan.t,
                    self.scans[i - 1].t
                )));
            }
            let mut last_t = f64::NEG_INFINITY;
            for p in &scan.points {
                validate_point(p, scan.t, self.cycle_period).map_err(Error::Validation)?;
                if p.t < last_t {
                    return Err(Error::Validation(format!(
                        "point {} timestamp decreases within scan",
                        p.id
                    )));
                }
                last_t = p.t;
            }
        }
        Ok(())
    }
}

/// Ego-motion compensated doppler speed: `v_dopp - v * cos(phi)`.
pub fn compensate_doppler(p: &RadarPoint, ego: &EgoState) -> f64 {
    p.v_dopp - ego.v * p.phi.cos()
}

fn validate_ego(ego: &EgoState) -> std::result::Result<(), String> {
    let fields = [ego.t, ego.x, ego.y, ego.yaw, ego.v, ego.yaw_rate];
    if fields.iter().any(|f| !f.is_finite()) {
        return Err(format!("ego state at t={} has non-finite fields", ego.t));
    }
    if ego.v < 0.0 {
        return Err(format!("ego speed {} is negative", ego.v));
    }
    Ok(())
}

fn validate_point(p: &RadarPoint, scan_t: f64, cycle: f64) -> std::result::Result<(), String> {
    if ![p.t, p.x, p.y, p.v_dopp, p.rcs, p.phi]
        .iter()
        .all(|f| f.is_finite())
    {
        return Err(format!("point {} has non-finite fields", p.id));
    }
    if p.phi.abs() > std::f64::consts::PI {
        return Err(format!("point {} azimuth {} outside [-pi, pi]", p.id, p.phi));
    }
    if (p.t - scan_t).abs() > cycle {
        return Err(format!(
            "point {} at t={} lies outside the cycle window of scan t={}",
            p.id, p.t, scan_t
        ));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type")]
enum Record {
    #[serde(rename = "ego")]
    Ego {
        t: f64,
        x: f64,
        y: f64,
        yaw: f64,
        v: f64,
        yaw_rate: f64,
    },
    #[serde(rename = "pt")]
    Point {
        t: f64,
        sensor: i64,
        x: f64,
        y: f64,
        v_dopp: f64,
        rcs: f64,
        label: u8,
        track: Option<String>,
        phi: f64,
    },
}

/// Parses a sequence from any reader. The sequence id is supplied by the caller.
pub fn read_sequence(reader: impl BufRead, id: &str) -> Result<Sequence> {
    let mut seq = Sequence::new(id);
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        match record {
            Record::Ego {
                t,
                x,
                y,
                yaw,
                v,
                yaw_rate,
            } => {
                let ego = EgoState {
                    t,
                    x,
                    y,
                    yaw,
                    v,
                    yaw_rate,
                };
                if let Some(prev) = seq.scans.last() {
                    if t <= prev.t {
                        return Err(Error::Validation(format!(
                            "line {line_no}: scan timestamp {t} not after {}",
                            prev.t
                        )));
                    }
                }
                seq.scans.push(Scan {
                    t,
                    ego,
                    points: Vec::new(),
                });
            }
            Record::Point {
                t,
                sensor,
                x,
                y,
                v_dopp,
                rcs,
                label,
                track,
                phi,
            } => {
                let scan_index = seq.scans.len().checked_sub(1).ok_or(Error::Parse {
                    line: line_no,
                    message: "point record before the first ego record".into(),
                })?;
                let label = Label::from_id(label).ok_or(Error::Parse {
                    line: line_no,
                    message: format!("unknown label id {label}"),
                })?;
                let scan = &mut seq.scans[scan_index];
                let id = PointId::new(scan_index as u32, scan.points.len() as u32);
                scan.points.push(RadarPoint {
                    id,
                    t,
                    sensor_id: sensor,
                    x,
                    y,
                    v_dopp,
                    rcs,
                    label,
                    track_id: track,
                    phi,
                });
            }
        }
    }
    seq.validate()?;
    Ok(seq)
}

/// Loads a sequence file; the id is the file stem.
pub fn load_sequence(path: impl AsRef<Path>) -> Result<Sequence> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_sequence(BufReader::new(file), &id)
}

pub fn write_sequence_to(seq: &Sequence, mut w: impl Write) -> std::io::Result<()> {
    for scan in &seq.scans {
        let e = &scan.ego;
        let ego = Record::Ego {
            t: e.t,
            x: e.x,
            y: e.y,
            yaw: e.yaw,
            v: e.v,
            yaw_rate: e.yaw_rate,
        };
        serde_json::to_writer(&mut w, &ego)?;
        w.write_all(b"\n")?;
        for p in &scan.points {
            let rec = Record::Point {
                t: p.t,
                sensor: p.sensor_id,
                x: p.x,
                y: p.y,
                v_dopp: p.v_dopp,
                rcs: p.rcs,
                label: p.label.id(),
                track: p.track_id.clone(),
                phi: p.phi,
            };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()
}

pub fn write_sequence(seq: &Sequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_sequence_to(seq, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

//! Posteriori criticality regions.
//!
//! Each critical point seeds a circular region. A region is born with age 0
//! and only becomes active after the first [`step_regions`] moves it into the
//! next scan's vehicle frame, so it never affects the scan it was spawned in.
//! At age `k` its radius is `radii[k - 1]`; after `t_life` steps it expires.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EgoState, PointId, RadarPoint, Scan};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalityRegion {
    /// Center in the current vehicle frame.
    pub center: [f64; 2],
    /// Cycles since creation; 0 until the region is first stepped.
    pub age: u32,
    pub created_t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionConfig {
    /// Radius per age, m.
    pub radii: Vec<f64>,
    /// Lifetime in cycles.
    pub t_life: u32,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            radii: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            t_life: 5,
        }
    }
}

impl RegionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_life == 0 {
            return Err(Error::Config("t_life must be at least 1".into()));
        }
        if self.radii.len() != self.t_life as usize {
            return Err(Error::Config(format!(
                "{} region radii given for a lifetime of {} cycles",
                self.radii.len(),
                self.t_life
            )));
        }
        if !(self.radii[0] > 0.0) || self.radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("region radii must be positive and strictly increasing".into()));
        }
        Ok(())
    }

    /// Radius at `age`, or `None` for newborn or expired regions.
    pub fn radius(&self, age: u32) -> Option<f64> {
        if age == 0 {
            return None;
        }
        self.radii.get(age as usize - 1).copied()
    }

    /// Highest object speed the growth schedule keeps inside a region: the
    /// smallest per-cycle radius increment divided by the cycle period.
    pub fn covered_object_speed(&self, cycle_period: f64) -> f64 {
        let mut prev = 0.0;
        let mut min_step = f64::INFINITY;
        for &r in &self.radii {
            min_step = min_step.min(r - prev);
            prev = r;
        }
        min_step / cycle_period
    }
}

pub fn spawn_regions(critical: &[&RadarPoint], t: f64) -> Vec<CriticalityRegion> {
    critical
        .iter()
        .map(|p| CriticalityRegion {
            center: p.position(),
            age: 0,
            created_t: t,
        })
        .collect()
}

/// Re-expresses every center in the frame of `ego_now`, ages the regions by
/// one cycle and drops those older than `t_life`.
pub fn step_regions(
    regions: &[CriticalityRegion],
    ego_prev: &EgoState,
    ego_now: &EgoState,
    cfg: &RegionConfig,
) -> Vec<CriticalityRegion> {
    regions
        .iter()
        .filter(|r| r.age < cfg.t_life)
        .map(|r| CriticalityRegion {
            center: ego_now.to_vehicle(ego_prev.to_world(r.center)),
            age: r.age + 1,
            created_t: r.created_t,
        })
        .collect()
}

/// Ids of points inside any active region (boundary inclusive).
pub fn exempt_ids(scan: &Scan, regions: &[CriticalityRegion], cfg: &RegionConfig) -> BTreeSet<PointId> {
    let active: Vec<([f64; 2], f64)> = regions
        .iter()
        .filter_map(|r| cfg.radius(r.age).map(|rad| (r.center, rad * rad)))
        .collect();
    if active.is_empty() {
        return BTreeSet::new();
    }
    scan.points
        .iter()
        .filter(|p| {
            active.iter().any(|(c, r2)| {
                let dx = p.x - c[0];
                let dy = p.y - c[1];
                dx * dx + dy * dy <= *r2
            })
        })
        .map(|p| p.id)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionEventKind {
    Birth,
    Death,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionEvent {
    pub sequence: String,
    pub t: f64,
    pub kind: RegionEventKind,
    pub x: f64,
    pub y: f64,
    pub created_t: f64,
}

pub fn write_region_events(mut w: impl Write, events: &[RegionEvent]) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

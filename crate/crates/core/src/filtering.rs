//! Conventional filter cascade: spatial gate, doppler sanity check, optional
//! static-motion filter and RCS threshold. Points listed as exempt skip only
//! the RCS criterion.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{compensate_doppler, PointId, RadarPoint, Scan};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// Forward extent of the spatial gate, m. Points behind the vehicle origin are dropped.
    pub x_max: f64,
    pub y_abs_max: f64,
    /// Minimum absolute compensated doppler speed for the static filter, m/s.
    pub v_comp_min: f64,
    pub v_dopp_max: f64,
    /// Minimum RCS in dBm².
    pub rcs_thresh: f64,
    pub static_filter_enabled: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            x_max: 20.0,
            y_abs_max: 10.0,
            v_comp_min: 0.5,
            v_dopp_max: 20.0,
            rcs_thresh: -10.0,
            static_filter_enabled: false,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("x_max", self.x_max),
            ("y_abs_max", self.y_abs_max),
            ("v_dopp_max", self.v_dopp_max),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.rcs_thresh.is_finite() || !(self.v_comp_min >= 0.0) {
            return Err(Error::Config("rcs_thresh and v_comp_min must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    Spatial,
    Doppler,
    Static,
    Rcs,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FilterOutcome {
    pub survivors: Vec<RadarPoint>,
    pub removed: Vec<(RadarPoint, RemovalReason)>,
}

impl FilterOutcome {
    pub fn survivor_ids(&self) -> BTreeSet<PointId> {
        self.survivors.iter().map(|p| p.id).collect()
    }
}

/// First criterion the point fails, checked as spatial, doppler, static, RCS.
pub fn removal_reason(
    p: &RadarPoint,
    scan: &Scan,
    cfg: &FilterConfig,
    exempt: bool,
) -> Option<RemovalReason> {
    if !(p.x >= 0.0 && p.x <= cfg.x_max && p.y.abs() <= cfg.y_abs_max) {
        return Some(RemovalReason::Spatial);
    }
    if p.v_dopp.abs() > cfg.v_dopp_max {
        return Some(RemovalReason::Doppler);
    }
    if cfg.static_filter_enabled && compensate_doppler(p, &scan.ego).abs() < cfg.v_comp_min {
        return Some(RemovalReason::Static);
    }
    if p.rcs < cfg.rcs_thresh && !exempt {
        return Some(RemovalReason::Rcs);
    }
    None
}

pub fn apply_filter(scan: &Scan, cfg: &FilterConfig, exempt: &BTreeSet<PointId>) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for p in &scan.points {
        match removal_reason(p, scan, cfg, exempt.contains(&p.id)) {
            None => out.survivors.push(p.clone()),
            Some(reason) => out.removed.push((p.clone(), reason)),
        }
    }
    out
}

/// Share of points that survive filtering.
pub fn filter_rate(survivors: usize, total: usize) -> Result<f64> {
    if total == 0 {
        return Err(Error::EmptyCloud);
    }
    Ok(survivors as f64 / total as f64)
}

#[derive(Serialize)]
struct AuditRecord<'a> {
    sequence: &'a str,
    scan: u32,
    row: u32,
    rcs: f64,
    reason: RemovalReason,
}

/// Appends one JSON line per removed point.
pub fn write_audit(
    mut w: impl Write,
    sequence: &str,
    removed: &[(RadarPoint, RemovalReason)],
) -> std::io::Result<()> {
    for (p, reason) in removed {
        let rec = AuditRecord {
            sequence,
            scan: p.id.scan,
            row: p.id.row,
            rcs: p.rcs,
            reason: *reason,
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

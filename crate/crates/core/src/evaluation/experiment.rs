use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{dbscan, ClusterConfig};
use crate::criticality::{
    classify_by_threshold, classify_critical, score_scan, velocity_based_criticality,
    CriticalityParams,
};
use crate::error::{Error, Result};
use crate::filtering::{apply_filter, write_audit, FilterConfig};
use crate::model::{EgoState, PointId, RadarPoint, Sequence};
use crate::reachability::{
    build_set_b, synthesize_critical_trajectory, write_trajectory_record, ReachabilityConfig,
};
use crate::regions::{
    exempt_ids, spawn_regions, step_regions, write_region_events, CriticalityRegion, RegionConfig,
    RegionEvent, RegionEventKind,
};
use crate::trajectory::{propagate_ego_tube, DEFAULT_DT, DEFAULT_HORIZON};

use super::{compute_metrics, EvalReport, EvalSets, ReportRow, ScanSets};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Conventional cascade; regions are never created.
    Baseline,
    /// Drive-tube scoring feeds criticality regions that suspend the RCS filter.
    Posteriori,
    /// Same as posteriori, with the velocity-based scorer filling `A`.
    VelocityMetric,
}

impl Mode {
    pub fn uses_regions(self) -> bool {
        !matches!(self, Mode::Baseline)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Baseline => "baseline",
            Mode::Posteriori => "posteriori",
            Mode::VelocityMetric => "velocity-metric",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "posteriori" => Ok(Mode::Posteriori),
            "velocity-metric" | "velocity_metric" => Ok(Mode::VelocityMetric),
            other => Err(format!(
                "unknown mode '{other}' (expected baseline, posteriori or velocity-metric)"
            )),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub criticality: CriticalityParams,
    pub filter: FilterConfig,
    pub clustering: ClusterConfig,
    pub regions: RegionConfig,
    pub reachability: ReachabilityConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.criticality.validate()?;
        self.filter.validate()?;
        self.clustering.validate()?;
        self.regions.validate()?;
        self.reachability.validate()
    }
}

/// Which JSONL side outputs to collect while running.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TraceOptions {
    pub audit: bool,
    pub regions: bool,
    pub trajectories: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanTrace {
    pub scan: usize,
    pub t: f64,
    pub points: usize,
    pub modified: bool,
    pub target: Option<PointId>,
    pub radius: Option<f64>,
    pub v_coll: Option<f64>,
    pub t_coll: Option<f64>,
    pub clusters: usize,
    pub active_regions: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SequenceRun {
    pub sets: EvalSets,
    pub scans: Vec<ScanTrace>,
    pub audit: Vec<u8>,
    pub region_events: Vec<u8>,
    pub trajectories: Vec<u8>,
}

fn io_err(e: std::io::Error) -> Error {
    Error::Validation(format!("trace buffer: {e}"))
}

/// Runs the full per-scan pipeline over one sequence:
/// score the unfiltered cloud, advance regions, filter, cluster, spawn regions.
pub fn run_sequence(
    seq: &Sequence,
    cfg: &PipelineConfig,
    mode: Mode,
    trace: TraceOptions,
) -> Result<SequenceRun> {
    let mut run = SequenceRun {
        sets: EvalSets {
            sequence: seq.id.clone(),
            scans: Vec::with_capacity(seq.scans.len()),
        },
        ..Default::default()
    };
    let mut regions: Vec<CriticalityRegion> = Vec::new();
    let mut prev_ego: Option<EgoState> = None;
    let mut events = Vec::new();

    for (k, scan) in seq.scans.iter().enumerate() {
        let ct = synthesize_critical_trajectory(scan, &cfg.reachability, &cfg.criticality);
        let (traj, b) = match &ct {
            Some(ct) => (ct.trajectory.clone(), build_set_b(scan, ct, &cfg.reachability)?),
            None => (
                propagate_ego_tube(&scan.ego, DEFAULT_HORIZON, DEFAULT_DT),
                BTreeSet::new(),
            ),
        };
        if let (Some(ct), true) = (&ct, trace.trajectories) {
            write_trajectory_record(&mut run.trajectories, &seq.id, k, ct).map_err(io_err)?;
        }

        let a = match mode {
            Mode::VelocityMetric => classify_by_threshold(
                scan.points
                    .iter()
                    .map(|p| (p.id, velocity_based_criticality(p, &scan.ego))),
                cfg.criticality.crit_thresh,
            ),
            _ => classify_critical(&score_scan(scan, &traj, &cfg.criticality), &cfg.criticality),
        };

        let exempt = if mode.uses_regions() {
            if let Some(prev) = &prev_ego {
                if trace.regions {
                    events.extend(regions.iter().filter(|r| r.age >= cfg.regions.t_life).map(|r| {
                        RegionEvent {
                            sequence: seq.id.clone(),
                            t: scan.t,
                            kind: RegionEventKind::Death,
                            x: r.center[0],
                            y: r.center[1],
                            created_t: r.created_t,
                        }
                    }));
                }
                regions = step_regions(&regions, prev, &scan.ego, &cfg.regions);
            }
            exempt_ids(scan, &regions, &cfg.regions)
        } else {
            BTreeSet::new()
        };
        let active_regions = regions.iter().filter(|r| r.age > 0).count();

        let outcome = apply_filter(scan, &cfg.filter, &exempt);
        if trace.audit {
            write_audit(&mut run.audit, &seq.id, &outcome.removed).map_err(io_err)?;
        }
        let clustering = dbscan(&outcome.survivors, &cfg.clustering);

        if mode.uses_regions() {
            let critical: Vec<&RadarPoint> =
                scan.points.iter().filter(|p| a.contains(&p.id)).collect();
            let born = spawn_regions(&critical, scan.t);
            if trace.regions {
                events.extend(born.iter().map(|r| RegionEvent {
                    sequence: seq.id.clone(),
                    t: scan.t,
                    kind: RegionEventKind::Birth,
                    x: r.center[0],
                    y: r.center[1],
                    created_t: r.created_t,
                }));
            }
            regions.extend(born);
        }
        prev_ego = Some(scan.ego);

        run.scans.push(ScanTrace {
            scan: k,
            t: scan.t,
            points: scan.points.len(),
            modified: ct.is_some(),
            target: ct.as_ref().map(|c| c.target_point_id),
            radius: ct.as_ref().map(|c| c.radius()).filter(|r| r.is_finite()),
            v_coll: ct.as_ref().map(|c| c.v_coll),
            t_coll: ct.as_ref().map(|c| c.t_coll),
            clusters: clustering.clusters.len(),
            active_regions,
        });
        run.sets.scans.push(ScanSets {
            scan: k,
            t: scan.t,
            total: scan.points.len(),
            modified: ct.is_some(),
            a,
            b,
            c: clustering.clustered_ids(),
            f: outcome.survivor_ids(),
        });
    }
    if trace.regions {
        write_region_events(&mut run.region_events, &events).map_err(io_err)?;
    }
    Ok(run)
}

/// Runs every sequence, in parallel when `jobs > 1`. Results are ordered by
/// sequence id regardless of scheduling.
pub fn run_sequences(
    sequences: &[Sequence],
    cfg: &PipelineConfig,
    mode: Mode,
    trace: TraceOptions,
    jobs: usize,
) -> Result<Vec<SequenceRun>> {
    cfg.validate()?;
    let mut runs = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| {
            sequences
                .par_iter()
                .map(|s| run_sequence(s, cfg, mode, trace))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        sequences
            .iter()
            .map(|s| run_sequence(s, cfg, mode, trace))
            .collect::<Result<Vec<_>>>()?
    };
    runs.sort_by(|a, b| a.sets.sequence.cmp(&b.sets.sequence));
    Ok(runs)
}

pub fn run_experiment(sequences: &[Sequence], cfg: &PipelineConfig, mode: Mode) -> Result<EvalReport> {
    let runs = run_sequences(sequences, cfg, mode, TraceOptions::default(), 1)?;
    let sets: Vec<EvalSets> = runs.into_iter().map(|r| r.sets).collect();
    Ok(compute_metrics(&sets))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub mode: Mode,
    pub crit_thresh: f64,
    pub rcs_thresh: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub aggregate: ReportRow,
}

/// One aggregate row per configuration, in the order given.
pub fn run_sweep(
    sequences: &[Sequence],
    base: &PipelineConfig,
    points: &[SweepPoint],
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    if points.is_empty() {
        return Err(Error::Config("sweep needs at least one configuration".into()));
    }
    points
        .iter()
        .map(|pt| {
            let mut cfg = base.clone();
            cfg.criticality.crit_thresh = pt.crit_thresh;
            cfg.filter.rcs_thresh = pt.rcs_thresh;
            let runs = run_sequences(sequences, &cfg, pt.mode, TraceOptions::default(), jobs)?;
            let sets: Vec<EvalSets> = runs.into_iter().map(|r| r.sets).collect();
            Ok(SweepRow {
                point: *pt,
                aggregate: compute_metrics(&sets).aggregate,
            })
        })
        .collect()
}

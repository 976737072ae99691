//! Set bookkeeping and metrics.
//!
//! Per scan four point-id sets are tracked: `A` (scored critical), `B`
//! (ground-truth critical), `C` (clustered) and `F` (filter survivors).
//! Sequences are aggregated by summing set cardinalities.

mod experiment;
pub mod report;

use std::collections::BTreeSet;
use std::ops::{Add, AddAssign};

use serde::Serialize;

use crate::model::PointId;

pub use experiment::{
    run_experiment, run_sequence, run_sequences, run_sweep, Mode, PipelineConfig, ScanTrace,
    SequenceRun, SweepPoint, SweepRow, TraceOptions,
};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanSets {
    pub scan: usize,
    pub t: f64,
    pub total: usize,
    /// Whether a synthesized critical trajectory replaced the ego tube.
    pub modified: bool,
    pub a: BTreeSet<PointId>,
    pub b: BTreeSet<PointId>,
    pub c: BTreeSet<PointId>,
    pub f: BTreeSet<PointId>,
}

impl ScanSets {
    pub fn counts(&self) -> SetCounts {
        let n = |it: usize| it as u64;
        let a_and_b = self.a.intersection(&self.b).count();
        let b_and_c = self.b.intersection(&self.c).count();
        let b_and_f = self.b.intersection(&self.f).count();
        let b_f_not_c = self
            .b
            .iter()
            .filter(|id| self.f.contains(id) && !self.c.contains(id))
            .count();
        SetCounts {
            total: n(self.total),
            a: n(self.a.len()),
            b: n(self.b.len()),
            c: n(self.c.len()),
            f: n(self.f.len()),
            a_and_b: n(a_and_b),
            b_and_c: n(b_and_c),
            b_not_f: n(self.b.len() - b_and_f),
            b_f_not_c: n(b_f_not_c),
            b_not_c: n(self.b.len() - b_and_c),
            b_not_a: n(self.b.len() - a_and_b),
            a_not_b: n(self.a.len() - a_and_b),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalSets {
    pub sequence: String,
    pub scans: Vec<ScanSets>,
}

impl EvalSets {
    pub fn counts(&self) -> SetCounts {
        self.scans.iter().map(ScanSets::counts).sum()
    }

    pub fn modified_scans(&self) -> usize {
        self.scans.iter().filter(|s| s.modified).count()
    }
}

/// Set cardinalities; `b_not_c` counts the false negatives (critical points
/// that ended up in no cluster).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SetCounts {
    pub total: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub f: u64,
    pub a_and_b: u64,
    pub b_and_c: u64,
    pub b_not_f: u64,
    pub b_f_not_c: u64,
    pub b_not_c: u64,
    pub b_not_a: u64,
    pub a_not_b: u64,
}

impl Add for SetCounts {
    type Output = SetCounts;

    fn add(mut self, rhs: SetCounts) -> SetCounts {
        self += rhs;
        self
    }
}

impl AddAssign for SetCounts {
    fn add_assign(&mut self, r: SetCounts) {
        self.total += r.total;
        self.a += r.a;
        self.b += r.b;
        self.c += r.c;
        self.f += r.f;
        self.a_and_b += r.a_and_b;
        self.b_and_c += r.b_and_c;
        self.b_not_f += r.b_not_f;
        self.b_f_not_c += r.b_f_not_c;
        self.b_not_c += r.b_not_c;
        self.b_not_a += r.b_not_a;
        self.a_not_b += r.a_not_b;
    }
}

impl std::iter::Sum for SetCounts {
    fn sum<I: Iterator<Item = SetCounts>>(iter: I) -> Self {
        iter.fold(SetCounts::default(), Add::add)
    }
}

/// Ratios derived from [`SetCounts`]; `None` where the denominator is empty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Metrics {
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
    pub filter_rate: Option<f64>,
    /// Share of `B` that was clustered.
    pub treated_rate: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(c: &SetCounts) -> Metrics {
    let recall = ratio(c.a_and_b, c.b);
    let precision = ratio(c.a_and_b, c.a);
    let f1 = match (recall, precision) {
        (Some(r), Some(p)) if r + p > 0.0 => Some(2.0 * r * p / (r + p)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    Metrics {
        recall,
        precision,
        f1,
        filter_rate: ratio(c.f, c.total),
        treated_rate: ratio(c.b_and_c, c.b),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub sequence: String,
    /// Sequences without any ground-truth critical point are excluded from the aggregate.
    pub included: bool,
    pub scans: usize,
    pub modified_scans: usize,
    pub counts: SetCounts,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub aggregate: ReportRow,
}

pub const AGGREGATE_ROW: &str = "ALL";

pub fn compute_metrics(sets: &[EvalSets]) -> EvalReport {
    let rows: Vec<ReportRow> = sets
        .iter()
        .map(|s| {
            let counts = s.counts();
            ReportRow {
                sequence: s.sequence.clone(),
                included: counts.b > 0,
                scans: s.scans.len(),
                modified_scans: s.modified_scans(),
                metrics: metrics(&counts),
                counts,
            }
        })
        .collect();
    let included = rows.iter().filter(|r| r.included);
    let counts: SetCounts = included.clone().map(|r| r.counts).sum();
    let aggregate = ReportRow {
        sequence: AGGREGATE_ROW.to_string(),
        included: counts.b > 0,
        scans: included.clone().map(|r| r.scans).sum(),
        modified_scans: included.map(|r| r.modified_scans).sum(),
        metrics: metrics(&counts),
        counts,
    };
    EvalReport { rows, aggregate }
}

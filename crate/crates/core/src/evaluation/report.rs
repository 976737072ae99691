//! CSV output. Ratios are written in shortest round-trip form and undefined
//! ratios as `n/a`, so every table can be recomputed from `sets.csv`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};

use super::{EvalSets, ReportRow, ScanTrace, SetCounts, SweepRow};

pub const SEQUENCE_COLUMNS: [&str; 20] = [
    "sequence",
    "included",
    "scans",
    "modified_scans",
    "total",
    "a",
    "b",
    "c",
    "f",
    "a_and_b",
    "b_and_c",
    "b_not_f",
    "b_f_not_c",
    "b_not_c",
    "b_not_a",
    "a_not_b",
    "recall",
    "precision",
    "f1",
    "filter_rate",
];

pub(crate) fn fmt_ratio(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| x.to_string())
}

fn row_fields(row: &ReportRow) -> Vec<String> {
    let c = &row.counts;
    let m = &row.metrics;
    let mut out = vec![
        row.sequence.clone(),
        row.included.to_string(),
        row.scans.to_string(),
        row.modified_scans.to_string(),
    ];
    out.extend(
        [
            c.total, c.a, c.b, c.c, c.f, c.a_and_b, c.b_and_c, c.b_not_f, c.b_f_not_c, c.b_not_c,
            c.b_not_a, c.a_not_b,
        ]
        .iter()
        .map(u64::to_string),
    );
    out.extend([m.recall, m.precision, m.f1, m.filter_rate].map(fmt_ratio));
    out
}

/// Per-sequence rows followed by the aggregate row.
pub fn write_sequence_table(w: impl Write, rows: &[ReportRow], aggregate: &ReportRow) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(SEQUENCE_COLUMNS)?;
    for row in rows.iter().chain(std::iter::once(aggregate)) {
        wtr.write_record(row_fields(row))?;
    }
    wtr.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// One row per point: membership flags for `A`, `B`, `C` and `F`.
pub fn write_sets(w: impl Write, sets: &[EvalSets]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["sequence", "scan", "row", "a", "b", "c", "f"])?;
    for seq in sets {
        for scan in &seq.scans {
            for row in 0..scan.total {
                let id = crate::model::PointId::new(scan.scan as u32, row as u32);
                let flag = |s: &std::collections::BTreeSet<_>| if s.contains(&id) { "1" } else { "0" };
                wtr.write_record([
                    seq.sequence.as_str(),
                    &scan.scan.to_string(),
                    &row.to_string(),
                    flag(&scan.a),
                    flag(&scan.b),
                    flag(&scan.c),
                    flag(&scan.f),
                ])?;
            }
        }
    }
    wtr.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Recomputes per-sequence [`SetCounts`] from a `sets.csv` stream.
pub fn counts_from_sets_csv(r: impl Read) -> Result<BTreeMap<String, SetCounts>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out: BTreeMap<String, SetCounts> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let flag = |i: usize| rec.get(i) == Some("1");
        let (a, b, c, f) = (flag(3), flag(4), flag(5), flag(6));
        let seq = rec.get(0).unwrap_or_default().to_string();
        let e = out.entry(seq).or_default();
        let n = |x: bool| x as u64;
        e.total += 1;
        e.a += n(a);
        e.b += n(b);
        e.c += n(c);
        e.f += n(f);
        e.a_and_b += n(a && b);
        e.b_and_c += n(b && c);
        e.b_not_f += n(b && !f);
        e.b_f_not_c += n(b && f && !c);
        e.b_not_c += n(b && !c);
        e.b_not_a += n(b && !a);
        e.a_not_b += n(a && !b);
    }
    Ok(out)
}

pub fn write_scan_table(w: impl Write, sequence_traces: &[(String, Vec<ScanTrace>)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "sequence",
        "scan",
        "t",
        "points",
        "modified",
        "target",
        "radius",
        "v_coll",
        "t_coll",
        "clusters",
        "active_regions",
    ])?;
    for (seq, traces) in sequence_traces {
        for s in traces {
            wtr.write_record([
                seq.clone(),
                s.scan.to_string(),
                s.t.to_string(),
                s.points.to_string(),
                s.modified.to_string(),
                s.target.map(|t| t.to_string()).unwrap_or_default(),
                s.radius.map(|r| r.to_string()).unwrap_or_default(),
                s.v_coll.map(|r| r.to_string()).unwrap_or_default(),
                s.t_coll.map(|r| r.to_string()).unwrap_or_default(),
                s.clusters.to_string(),
                s.active_regions.to_string(),
            ])?;
        }
    }
    wtr.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn write_sweep_table(w: impl Write, rows: &[SweepRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["mode", "crit_thresh", "rcs_thresh"];
    header.extend_from_slice(&SEQUENCE_COLUMNS[2..]);
    wtr.write_record(&header)?;
    for r in rows {
        let mut fields = vec![
            r.point.mode.to_string(),
            r.point.crit_thresh.to_string(),
            r.point.rcs_thresh.to_string(),
        ];
        fields.extend(row_fields(&r.aggregate).into_iter().skip(2));
        wtr.write_record(&fields)?;
    }
    wtr.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Side-by-side comparison of the conventional cascade and the posteriori
/// treatment per RCS threshold. Rows pair up entries of `without` and `with`
/// that share a crit and RCS threshold.
pub fn write_treatment_table(w: impl Write, without: &[SweepRow], with: &[SweepRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "crit_thresh",
        "rcs_thresh",
        "filter_rate_without",
        "filter_rate_with",
        "b_and_c_without",
        "treated_rate_without",
        "b_and_c_with",
        "treated_rate_with",
        "b_not_f_without",
        "b_not_f_with",
        "b_not_f_change",
        "c_without",
        "c_with",
        "c_change",
    ])?;
    for base in without {
        let Some(treated) = with.iter().find(|r| {
            r.point.crit_thresh == base.point.crit_thresh && r.point.rcs_thresh == base.point.rcs_thresh
        }) else {
            continue;
        };
        let (b0, b1) = (&base.aggregate, &treated.aggregate);
        let change = |old: u64, new: u64| fmt_ratio((old > 0).then(|| (new as f64 - old as f64) / old as f64));
        wtr.write_record([
            base.point.crit_thresh.to_string(),
            base.point.rcs_thresh.to_string(),
            fmt_ratio(b0.metrics.filter_rate),
            fmt_ratio(b1.metrics.filter_rate),
            b0.counts.b_and_c.to_string(),
            fmt_ratio(b0.metrics.treated_rate),
            b1.counts.b_and_c.to_string(),
            fmt_ratio(b1.metrics.treated_rate),
            b0.counts.b_not_f.to_string(),
            b1.counts.b_not_f.to_string(),
            change(b0.counts.b_not_f, b1.counts.b_not_f),
            b0.counts.c.to_string(),
            b1.counts.c.to_string(),
            change(b0.counts.c, b1.counts.c),
        ])?;
    }
    wtr.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

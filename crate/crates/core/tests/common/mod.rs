//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use saferad::model::{Label, PointId, RadarPoint, Sequence};
use saferad::synth::{generate, EgoProfile, NoiseSpec, RcsModel, SceneSpec, VruSpec};
use saferad::trajectory::{Trajectory, TrajectoryState};

pub fn point(scan: u32, row: u32, x: f64, y: f64) -> RadarPoint {
    RadarPoint {
        id: PointId::new(scan, row),
        t: 0.0,
        sensor_id: 0,
        x,
        y,
        v_dopp: 0.0,
        rcs: -5.0,
        label: Label::Static,
        track_id: None,
        phi: y.atan2(x),
    }
}

pub fn polyline(pts: &[[f64; 2]], v: f64) -> Trajectory {
    let states = pts
        .iter()
        .map(|p| TrajectoryState {
            x: p[0],
            y: p[1],
            v,
            a: 0.0,
            steering: 0.0,
            yaw: 0.0,
        })
        .collect();
    Trajectory::new(states, 0.2).unwrap()
}

/// Exhaustive DBSCAN: core flags from all pairwise distances, clusters as
/// connected components of the core graph labelled by their smallest core id,
/// border points attached to the lowest-labelled adjacent component.
pub fn dbscan_oracle(points: &[RadarPoint], eps: f64, min_pts: usize) -> (Vec<BTreeSet<PointId>>, BTreeSet<PointId>) {
    let mut pts: Vec<&RadarPoint> = points.iter().collect();
    pts.sort_by_key(|p| p.id);
    let n = pts.len();
    let near = |i: usize, j: usize| (pts[i].x - pts[j].x).hypot(pts[i].y - pts[j].y) <= eps;
    let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts).collect();

    let mut comp = vec![usize::MAX; n];
    let mut ncomp = 0;
    for s in 0..n {
        if !core[s] || comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = ncomp;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if core[j] && comp[j] == usize::MAX && near(i, j) {
                    comp[j] = ncomp;
                    stack.push(j);
                }
            }
        }
        ncomp += 1;
    }

    let mut clusters = vec![BTreeSet::new(); ncomp];
    let mut noise = BTreeSet::new();
    for i in 0..n {
        let c = if core[i] {
            Some(comp[i])
        } else {
            (0..n).filter(|&j| core[j] && near(i, j)).map(|j| comp[j]).min()
        };
        match c {
            Some(c) => {
                clusters[c].insert(pts[i].id);
            }
            None => {
                noise.insert(pts[i].id);
            }
        }
    }
    (clusters, noise)
}

/// Per-segment projection over the raw vertex list. Returns the minimal
/// distance and every arc-length position attaining it (within `tol`).
pub fn projection_oracle(verts: &[[f64; 2]], p: [f64; 2], tol: f64) -> (f64, Vec<f64>) {
    let mut cands = Vec::new();
    let mut cum = 0.0;
    for w in verts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        if len == 0.0 {
            cands.push(((p[0] - a[0]).hypot(p[1] - a[1]), cum));
            continue;
        }
        let ux = (b[0] - a[0]) / len;
        let uy = (b[1] - a[1]) / len;
        let s = ((p[0] - a[0]) * ux + (p[1] - a[1]) * uy).clamp(0.0, len);
        let fx = a[0] + s * ux;
        let fy = a[1] + s * uy;
        cands.push(((p[0] - fx).hypot(p[1] - fy), cum + s));
        cum += len;
    }
    let best = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let at = cands.iter().filter(|c| c.0 <= best + tol).map(|c| c.1).collect();
    (best, at)
}

fn scene(id: &str, seed: u64, ego: EgoProfile, vrus: Vec<VruSpec>, noise: usize) -> Sequence {
    generate(&SceneSpec {
        id: id.into(),
        seed,
        n_scans: 40,
        cycle_period: 0.091,
        ego,
        vrus,
        noise: NoiseSpec {
            points_per_scan: noise,
            radial_speed: 0.5,
            ..Default::default()
        },
    })
    .unwrap()
}

fn alternating(strong_every: usize) -> RcsModel {
    RcsModel::Alternating {
        strong: [-8.0, -6.0],
        weak: [-16.0, -12.0],
        strong_every,
    }
}

fn vru(label: Label, track: &str, start: [f64; 2], velocity: [f64; 2], n: usize, rcs: RcsModel) -> VruSpec {
    VruSpec {
        label,
        track_id: Some(track.into()),
        start,
        velocity,
        points_per_scan: n,
        extent: 0.3,
        rcs,
    }
}

/// VRUs whose RCS drops below -10 dBm² on most scans.
pub fn alternating_suite() -> Vec<Sequence> {
    vec![
        scene(
            "alt-ped-straight",
            11,
            EgoProfile::Straight { v: 3.0 },
            vec![vru(Label::Pedestrian, "p1", [7.5, 1.0], [0.0, 0.0], 6, alternating(3))],
            30,
        ),
        scene(
            "alt-bike-crossing",
            12,
            EgoProfile::Straight { v: 2.5 },
            vec![vru(Label::Bicycle, "b1", [8.0, -1.5], [0.0, 0.4], 6, alternating(2))],
            30,
        ),
        scene(
            "alt-ped-standstill",
            13,
            EgoProfile::Standstill,
            vec![vru(Label::Pedestrian, "p2", [6.5, 1.5], [-0.3, -0.2], 5, alternating(4))],
            30,
        ),
        scene(
            "alt-group-arc",
            14,
            EgoProfile::Arc { v: 3.0, yaw_rate: 0.1 },
            vec![vru(Label::PedestrianGroup, "g1", [7.0, 2.0], [0.0, 0.0], 8, alternating(3))],
            30,
        ),
    ]
}

/// Twenty mixed scenes: varied ego motion, one to three VRUs, clutter.
pub fn corpus(seed: u64) -> Vec<Sequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = [Label::Pedestrian, Label::PedestrianGroup, Label::Bicycle];
    (0..20)
        .map(|i| {
            let ego = match i % 3 {
                0 => EgoProfile::Standstill,
                1 => EgoProfile::Straight { v: rng.gen_range(1.0..7.0) },
                _ => EgoProfile::Arc {
                    v: rng.gen_range(1.0..6.0),
                    yaw_rate: rng.gen_range(-0.2..0.2),
                },
            };
            let vrus = (0..rng.gen_range(1..=3))
                .map(|k| {
                    let rcs = if rng.gen_bool(0.5) {
                        alternating(rng.gen_range(2..=4))
                    } else {
                        RcsModel::Uniform { min: -17.0, max: -6.0 }
                    };
                    vru(
                        labels[rng.gen_range(0..3)],
                        &format!("v{k}"),
                        [rng.gen_range(4.0..18.0), rng.gen_range(-4.0..4.0)],
                        [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                        rng.gen_range(3..8),
                        rcs,
                    )
                })
                .collect();
            scene(&format!("corpus-{i:02}"), seed * 100 + i, ego, vrus, rng.gen_range(15..40))
        })
        .collect()
}

/// Per-sequence `|B \ C|`, recomputed from the raw sets.
pub fn b_not_c(sets: &[saferad::evaluation::EvalSets]) -> BTreeMap<String, usize> {
    sets.iter()
        .map(|s| {
            let n = s.scans.iter().map(|sc| sc.b.difference(&sc.c).count()).sum();
            (s.sequence.clone(), n)
        })
        .collect()
}

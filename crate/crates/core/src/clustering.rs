//! DBSCAN over 2-D point positions.
//!
//! Neighborhoods are closed balls (`distance <= eps`) and include the point
//! itself. Points are visited in ascending id order, so cluster ids follow the
//! first core point of each cluster and a border point reachable from several
//! clusters joins the one with the lowest id. The result does not depend on
//! the input order.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PointId, RadarPoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    pub eps: f64,
    pub min_pts: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self { eps: 1.0, min_pts: 4 }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if self.min_pts < 1 {
            return Err(Error::Config("min_pts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub id: usize,
    pub member_ids: BTreeSet<PointId>,
    pub centroid: [f64; 2],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
    pub noise_ids: BTreeSet<PointId>,
}

impl Clustering {
    pub fn clustered_ids(&self) -> BTreeSet<PointId> {
        self.clusters
            .iter()
            .flat_map(|c| c.member_ids.iter().copied())
            .collect()
    }
}

/// Uniform grid with cell size `eps`; a radius query visits the 3x3 block.
struct GridIndex<'a> {
    pos: &'a [[f64; 2]],
    eps: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> GridIndex<'a> {
    fn new(pos: &'a [[f64; 2]], eps: f64) -> Self {
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in pos.iter().enumerate() {
            cells.entry(Self::cell(p, eps)).or_default().push(i);
        }
        Self { pos, eps, cells }
    }

    fn cell(p: &[f64; 2], eps: f64) -> (i64, i64) {
        ((p[0] / eps).floor() as i64, (p[1] / eps).floor() as i64)
    }

    fn neighbors(&self, i: usize, out: &mut Vec<usize>) {
        out.clear();
        let p = self.pos[i];
        let (cx, cy) = Self::cell(&p, self.eps);
        let eps2 = self.eps * self.eps;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &j in bucket {
                        let q = self.pos[j];
                        let (ex, ey) = (q[0] - p[0], q[1] - p[1]);
                        if ex * ex + ey * ey <= eps2 {
                            out.push(j);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
    }
}

const UNVISITED: usize = usize::MAX;
const NOISE: usize = usize::MAX - 1;

pub fn dbscan(points: &[RadarPoint], cfg: &ClusterConfig) -> Clustering {
    let mut order: Vec<&RadarPoint> = points.iter().collect();
    order.sort_by_key(|p| p.id);
    let pos: Vec<[f64; 2]> = order.iter().map(|p| p.position()).collect();
    let index = GridIndex::new(&pos, cfg.eps);

    let n = pos.len();
    let mut label = vec![UNVISITED; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut nbrs = Vec::new();
    let mut queue = VecDeque::new();

    for i in 0..n {
        if label[i] != UNVISITED {
            continue;
        }
        index.neighbors(i, &mut nbrs);
        if nbrs.len() < cfg.min_pts {
            label[i] = NOISE;
            continue;
        }
        let cid = members.len();
        members.push(vec![i]);
        label[i] = cid;
        queue.extend(nbrs.iter().copied().filter(|&j| j != i));
        while let Some(j) = queue.pop_front() {
            if label[j] == NOISE {
                // border point of this cluster
                label[j] = cid;
                members[cid].push(j);
                continue;
            }
            if label[j] != UNVISITED {
                continue;
            }
            label[j] = cid;
            members[cid].push(j);
            index.neighbors(j, &mut nbrs);
            if nbrs.len() >= cfg.min_pts {
                queue.extend(nbrs.iter().copied().filter(|&k| label[k] == UNVISITED || label[k] == NOISE));
            }
        }
    }

    let clusters = members
        .into_iter()
        .enumerate()
        .map(|(id, idx)| {
            let k = idx.len() as f64;
            let sx: f64 = idx.iter().map(|&i| pos[i][0]).sum();
            let sy: f64 = idx.iter().map(|&i| pos[i][1]).sum();
            Cluster {
                id,
                member_ids: idx.iter().map(|&i| order[i].id).collect(),
                centroid: [sx / k, sy / k],
            }
        })
        .collect();
    let noise_ids = (0..n)
        .filter(|&i| label[i] == NOISE)
        .map(|i| order[i].id)
        .collect();
    Clustering { clusters, noise_ids }
}

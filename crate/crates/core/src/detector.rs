//! Residual-point clustering at tracking time.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{RigidTransform, TimestampUs};
use crate::ingest::LidarFrame;
use crate::map::BinaryMap;

pub const DETECTION_HEADER: &str = "timestamp_us,x,y,n_points";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub epsilon_m: f64,
    pub min_points: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            epsilon_m: 1.5,
            min_points: 4,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_m > 0.0 && self.epsilon_m.is_finite()) {
            return Err(Error::Config("detector: epsilon_m must be > 0".into()));
        }
        if self.min_points < 1 {
            return Err(Error::Config("detector: min_points must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub timestamp_us: TimestampUs,
    pub x: f64,
    pub y: f64,
    pub n_points: usize,
}

/// Transforms a frame to world 2D and drops points over static or off-grid cells.
pub fn filter_points_by_map(
    frame: &LidarFrame,
    world_from_lidar: &RigidTransform,
    m: &BinaryMap,
) -> Vec<(f64, f64)> {
    frame
        .points
        .iter()
        .filter_map(|p| {
            let w = world_from_lidar.apply(&p.coords());
            let c = m.grid().cell_of(w.x, w.y)?;
            (!m.get(c)).then_some((w.x, w.y))
        })
        .collect()
}

/// Clusters as index lists into the input, sorted by seed; noise indices ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Clustering {
    pub clusters: Vec<Vec<usize>>,
    pub noise: Vec<usize>,
}

fn lex(a: (f64, f64), b: (f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}

struct SpatialHash {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl SpatialHash {
    fn new(points: &[(f64, f64)], cell: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, &p) in points.iter().enumerate() {
            buckets.entry(Self::key(p, cell)).or_default().push(i);
        }
        Self { cell, buckets }
    }

    fn key(p: (f64, f64), cell: f64) -> (i64, i64) {
        ((p.0 / cell).floor() as i64, (p.1 / cell).floor() as i64)
    }

    /// Indices within `eps` of `points[i]`, including `i` itself.
    fn neighbors(&self, points: &[(f64, f64)], i: usize, eps: f64) -> Vec<usize> {
        let p = points[i];
        let (kx, ky) = Self::key(p, self.cell);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(b) = self.buckets.get(&(kx + dx, ky + dy)) {
                    out.extend(
                        b.iter()
                            .copied()
                            .filter(|&j| dist_sq(p, points[j]) <= eps * eps),
                    );
                }
            }
        }
        out
    }
}

fn dist_sq(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Density-based clustering. Core points are joined into components by
/// ε-adjacency; a border point joins the cluster of its nearest core point,
/// ties going to the cluster with the lexicographically smaller seed (its
/// smallest core point). The result does not depend on input order.
pub fn dbscan_cluster(points: &[(f64, f64)], cfg: &DetectorConfig) -> Clustering {
    let n = points.len();
    if n == 0 {
        return Clustering::default();
    }
    let eps = cfg.epsilon_m;
    let hash = SpatialHash::new(points, eps);
    let neighbors: Vec<Vec<usize>> = (0..n).map(|i| hash.neighbors(points, i, eps)).collect();
    let core: Vec<bool> = neighbors
        .iter()
        .map(|nb| nb.len() >= cfg.min_points)
        .collect();

    let mut parent: Vec<usize> = (0..n).collect();
    for i in (0..n).filter(|&i| core[i]) {
        for &j in neighbors[i].iter().filter(|&&j| core[j]) {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }

    // Seed of each component: its lexicographically smallest core point.
    let mut seed: HashMap<usize, usize> = HashMap::new();
    for i in (0..n).filter(|&i| core[i]) {
        let root = find(&mut parent, i);
        seed.entry(root)
            .and_modify(|s| {
                if lex(points[i], points[*s]) == Ordering::Less {
                    *s = i;
                }
            })
            .or_insert(i);
    }

    let mut label: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        if core[i] {
            label[i] = Some(find(&mut parent, i));
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for &j in neighbors[i].iter().filter(|&&j| core[j]) {
            let d = dist_sq(points[i], points[j]);
            let root = find(&mut parent, j);
            best = match best {
                None => Some((d, root)),
                Some((bd, br)) => {
                    let better = d < bd
                        || (d == bd
                            && lex(points[seed[&root]], points[seed[&br]]) == Ordering::Less);
                    Some(if better { (d, root) } else { (bd, br) })
                }
            };
        }
        label[i] = best.map(|(_, r)| r);
    }

    let mut roots: Vec<usize> = seed.keys().copied().collect();
    roots.sort_by(|&a, &b| lex(points[seed[&a]], points[seed[&b]]));
    let slot: HashMap<usize, usize> = roots.iter().enumerate().map(|(k, &r)| (r, k)).collect();
    let mut out = Clustering {
        clusters: vec![Vec::new(); roots.len()],
        noise: Vec::new(),
    };
    for (i, l) in label.into_iter().enumerate() {
        match l {
            Some(r) => out.clusters[slot[&r]].push(i),
            None => out.noise.push(i),
        }
    }
    out
}

/// One detection per cluster at the centroid of its members.
pub fn clusters_to_detections(
    points: &[(f64, f64)],
    clustering: &Clustering,
    t: TimestampUs,
) -> Vec<Detection> {
    clustering
        .clusters
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| {
            let n = c.len() as f64;
            let (sx, sy) = c.iter().fold((0.0, 0.0), |(sx, sy), &i| {
                (sx + points[i].0, sy + points[i].1)
            });
            Detection {
                timestamp_us: t,
                x: sx / n,
                y: sy / n,
                n_points: c.len(),
            }
        })
        .collect()
}

/// Filter, cluster and reduce one frame.
pub fn detect_frame(
    frame: &LidarFrame,
    world_from_lidar: &RigidTransform,
    m: &BinaryMap,
    cfg: &DetectorConfig,
) -> Vec<Detection> {
    let pts = filter_points_by_map(frame, world_from_lidar, m);
    let cl = dbscan_cluster(&pts, cfg);
    clusters_to_detections(&pts, &cl, frame.timestamp_us)
}

pub fn serialize_detections(dets: &[Detection]) -> String {
    let mut out = String::from(DETECTION_HEADER);
    out.push('\n');
    for d in dets {
        let _ = writeln!(out, "{},{},{},{}", d.timestamp_us, d.x, d.y, d.n_points);
    }
    out
}

pub fn parse_detections(text: &str, path: &Path) -> Result<Vec<Detection>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        None => return Ok(Vec::new()),
        Some((_, h)) if h.trim() == DETECTION_HEADER => {}
        Some(_) => {
            return Err(Error::parse(
                path,
                1,
                format!("expected header {DETECTION_HEADER:?}"),
            ))
        }
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| Error::parse(path, idx + 1, m);
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(bad("expected 4 fields"));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad("bad number"))
        };
        out.push(Detection {
            timestamp_us: f[0].parse().map_err(|_| bad("bad timestamp"))?,
            x: num(f[1])?,
            y: num(f[2])?,
            n_points: f[3].parse().map_err(|_| bad("bad point count"))?,
        });
    }
    Ok(out)
}

//! Map and track scoring against simulated ground truth.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::TimestampUs;
use crate::map::BinaryMap;
use crate::simulator::TruthRow;
use crate::tracker::{TrackRow, TrackStatus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapScore {
    pub iou: f64,
    /// Fraction of docked-vessel footprint cells not marked static.
    pub exclusion_rate: f64,
    /// Fraction of truth static cells inside the coverage region marked static.
    pub coverage_rate: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

pub fn score_map(
    estimated: &BinaryMap,
    truth: &BinaryMap,
    docked_footprint: &BinaryMap,
    coverage_region: &BinaryMap,
) -> Result<MapScore> {
    estimated.ensure_same_grid(truth)?;
    estimated.ensure_same_grid(docked_footprint)?;
    estimated.ensure_same_grid(coverage_region)?;
    let (mut inter, mut union) = (0, 0);
    let (mut fp_total, mut fp_excluded) = (0, 0);
    let (mut cov_total, mut cov_hit) = (0, 0);
    for i in 0..estimated.cells().len() {
        let e = estimated.cells()[i];
        let t = truth.cells()[i];
        inter += usize::from(e && t);
        union += usize::from(e || t);
        if docked_footprint.cells()[i] {
            fp_total += 1;
            fp_excluded += usize::from(!e);
        }
        if coverage_region.cells()[i] && t {
            cov_total += 1;
            cov_hit += usize::from(e);
        }
    }
    Ok(MapScore {
        iou: ratio(inter, union),
        exclusion_rate: ratio(fp_excluded, fp_total),
        coverage_rate: ratio(cov_hit, cov_total),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetScore {
    pub target_id: u32,
    pub first_truth_us: TimestampUs,
    pub first_matched_us: Option<TimestampUs>,
    pub time_to_first_track_s: Option<f64>,
    pub fragmentation: usize,
    pub id_switches: usize,
    /// Track ids matched to this target, in order of first match.
    pub track_ids: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackScore {
    pub confirmed_track_count: usize,
    pub tentative_only_track_count: usize,
    pub true_target_count: usize,
    pub false_track_count: usize,
    pub fragmentation_count: usize,
    pub id_switch_count: usize,
    pub targets: Vec<TargetScore>,
}

/// Greedy nearest assignment per timestep of confirmed tracks to truth
/// targets within `match_radius_m`. Input order does not matter.
pub fn score_tracks(rows: &[TrackRow], truth: &[TruthRow], match_radius_m: f64) -> TrackScore {
    let mut tracks_at: BTreeMap<TimestampUs, Vec<&TrackRow>> = BTreeMap::new();
    let mut confirmed_ids = BTreeSet::new();
    let mut all_ids = BTreeSet::new();
    for r in rows {
        all_ids.insert(r.track_id);
        if r.status == TrackStatus::Confirmed {
            confirmed_ids.insert(r.track_id);
            tracks_at.entry(r.timestamp_us).or_default().push(r);
        }
    }
    let mut truth_at: BTreeMap<TimestampUs, Vec<&TruthRow>> = BTreeMap::new();
    for t in truth {
        truth_at.entry(t.timestamp_us).or_default().push(t);
    }

    struct State {
        score: TargetScore,
        matched_prev: bool,
        last_id: Option<u64>,
    }
    let mut states: BTreeMap<u32, State> = BTreeMap::new();
    let mut ever_matched = BTreeSet::new();
    for (&t, targets) in &truth_at {
        let tracks = tracks_at.get(&t).map(Vec::as_slice).unwrap_or(&[]);
        let mut pairs = Vec::new();
        for tr in tracks {
            for tg in targets {
                let d = ((tr.x - tg.x).powi(2) + (tr.y - tg.y).powi(2)).sqrt();
                if d <= match_radius_m {
                    pairs.push((d, tr.track_id, tg.target_id));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut used_tracks = BTreeSet::new();
        let mut matched: BTreeMap<u32, u64> = BTreeMap::new();
        for (_, tid, gid) in pairs {
            if used_tracks.contains(&tid) || matched.contains_key(&gid) {
                continue;
            }
            used_tracks.insert(tid);
            matched.insert(gid, tid);
        }
        for tg in targets {
            let st = states.entry(tg.target_id).or_insert_with(|| State {
                score: TargetScore {
                    target_id: tg.target_id,
                    first_truth_us: t,
                    first_matched_us: None,
                    time_to_first_track_s: None,
                    fragmentation: 0,
                    id_switches: 0,
                    track_ids: Vec::new(),
                },
                matched_prev: false,
                last_id: None,
            });
            match matched.get(&tg.target_id) {
                Some(&tid) => {
                    ever_matched.insert(tid);
                    if st.score.first_matched_us.is_none() {
                        st.score.first_matched_us = Some(t);
                        st.score.time_to_first_track_s =
                            Some((t - st.score.first_truth_us) as f64 / 1e6);
                    } else if !st.matched_prev {
                        st.score.fragmentation += 1;
                    }
                    if st.last_id.is_some_and(|l| l != tid) {
                        st.score.id_switches += 1;
                    }
                    if !st.score.track_ids.contains(&tid) {
                        st.score.track_ids.push(tid);
                    }
                    st.last_id = Some(tid);
                    st.matched_prev = true;
                }
                None => st.matched_prev = false,
            }
        }
    }
    let targets: Vec<TargetScore> = states.into_values().map(|s| s.score).collect();
    TrackScore {
        confirmed_track_count: confirmed_ids.len(),
        tentative_only_track_count: all_ids.len() - confirmed_ids.len(),
        true_target_count: targets.len(),
        false_track_count: confirmed_ids.difference(&ever_matched).count(),
        fragmentation_count: targets.iter().map(|t| t.fragmentation).sum(),
        id_switch_count: targets.iter().map(|t| t.id_switches).sum(),
        targets,
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreReport {
    pub map: Option<MapScore>,
    pub tracks: Option<TrackScore>,
}

impl ScoreReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Flat `metric,value` table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        if let Some(m) = &self.map {
            let _ = writeln!(out, "map_iou,{}", m.iou);
            let _ = writeln!(out, "map_exclusion_rate,{}", m.exclusion_rate);
            let _ = writeln!(out, "map_coverage_rate,{}", m.coverage_rate);
        }
        if let Some(t) = &self.tracks {
            let _ = writeln!(out, "confirmed_tracks,{}", t.confirmed_track_count);
            let _ = writeln!(
                out,
                "tentative_only_tracks,{}",
                t.tentative_only_track_count
            );
            let _ = writeln!(out, "true_targets,{}", t.true_target_count);
            let _ = writeln!(out, "false_tracks,{}", t.false_track_count);
            let _ = writeln!(out, "fragmentation,{}", t.fragmentation_count);
            let _ = writeln!(out, "id_switches,{}", t.id_switch_count);
            for g in &t.targets {
                let v = g
                    .time_to_first_track_s
                    .map_or_else(|| "nan".to_string(), |s| s.to_string());
                let _ = writeln!(out, "time_to_first_track_s_target_{},{v}", g.target_id);
            }
        }
        out
    }
}

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Snapshot, TrackStatus};
use crate::error::{Error, Result};
use crate::geometry::TimestampUs;

pub const TRACK_HEADER: &str = "timestamp_us,track_id,status,x,y,vx,vy,r,v,P_xx,P_xy,P_yy";

/// One row of the track table.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackRow {
    pub timestamp_us: TimestampUs,
    pub track_id: u64,
    pub status: TrackStatus,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub existence: f64,
    pub visibility: f64,
    pub p_xx: f64,
    pub p_xy: f64,
    pub p_yy: f64,
}

pub fn serialize_tracks(snapshots: &[Snapshot]) -> String {
    let mut out = String::from(TRACK_HEADER);
    out.push('\n');
    for s in snapshots {
        for t in &s.tracks {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                s.timestamp_us,
                t.id,
                t.status.as_str(),
                t.mean[0],
                t.mean[1],
                t.mean[2],
                t.mean[3],
                t.existence,
                t.visibility,
                t.cov[(0, 0)],
                t.cov[(0, 1)],
                t.cov[(1, 1)]
            );
        }
    }
    out
}

pub fn parse_tracks_csv(text: &str, path: &Path) -> Result<Vec<TrackRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        None => return Ok(Vec::new()),
        Some((_, h)) if h.trim() == TRACK_HEADER => {}
        Some(_) => {
            return Err(Error::parse(
                path,
                1,
                format!("expected header {TRACK_HEADER:?}"),
            ))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| Error::parse(path, idx + 1, m);
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 12 {
            return Err(bad("expected 12 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
        let status = match f[2] {
            "tentative" => TrackStatus::Tentative,
            "confirmed" => TrackStatus::Confirmed,
            "terminated" => TrackStatus::Terminated,
            other => return Err(bad(&format!("unknown status {other:?}"))),
        };
        rows.push(TrackRow {
            timestamp_us: f[0].parse().map_err(|_| bad("bad timestamp"))?,
            track_id: f[1].parse().map_err(|_| bad("bad track id"))?,
            status,
            x: num(f[3])?,
            y: num(f[4])?,
            vx: num(f[5])?,
            vy: num(f[6])?,
            existence: num(f[7])?,
            visibility: num(f[8])?,
            p_xx: num(f[9])?,
            p_xy: num(f[10])?,
            p_yy: num(f[11])?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSummary {
    pub id: u64,
    pub born_us: TimestampUs,
    pub last_seen_us: TimestampUs,
    pub lifespan_s: f64,
    pub confirmed_us: Option<TimestampUs>,
    pub terminated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingSummary {
    pub confirmed_track_count: usize,
    pub total_track_count: usize,
    pub tracks: Vec<TrackSummary>,
}

pub fn summarize(snapshots: &[Snapshot]) -> TrackingSummary {
    let mut by_id: BTreeMap<u64, TrackSummary> = BTreeMap::new();
    for s in snapshots {
        for t in &s.tracks {
            let e = by_id.entry(t.id).or_insert(TrackSummary {
                id: t.id,
                born_us: t.born_us,
                last_seen_us: s.timestamp_us,
                lifespan_s: 0.0,
                confirmed_us: None,
                terminated: false,
            });
            e.last_seen_us = s.timestamp_us;
            e.confirmed_us = e.confirmed_us.or(t.confirmed_us);
            e.terminated |= t.status == TrackStatus::Terminated;
        }
    }
    let tracks: Vec<TrackSummary> = by_id
        .into_values()
        .map(|mut t| {
            t.lifespan_s = (t.last_seen_us - t.born_us) as f64 / 1e6;
            t
        })
        .collect();
    TrackingSummary {
        confirmed_track_count: tracks.iter().filter(|t| t.confirmed_us.is_some()).count(),
        total_track_count: tracks.len(),
        tracks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::Detection;
    use crate::tracker::{Tracker, TrackerConfig};

    #[test]
    fn csv_round_trip_and_summary() {
        let mut tr = Tracker::new(TrackerConfig::default()).unwrap();
        let mut snaps = Vec::new();
        for k in 0..10i64 {
            let t = k * 100_000;
            let d = Detection {
                timestamp_us: t,
                x: 0.1 * k as f64,
                y: 2.0,
                n_points: 6,
            };
            snaps.push(tr.step(t, &[d]).unwrap().snapshot);
        }
        let text = serialize_tracks(&snaps);
        let rows = parse_tracks_csv(&text, Path::new("t.csv")).unwrap();
        assert_eq!(rows.len(), 10);
        assert_eq!(rows[9].x, snaps[9].tracks[0].mean[0]);
        assert_eq!(rows[9].status, TrackStatus::Confirmed);

        let s = summarize(&snaps);
        assert_eq!(s.confirmed_track_count, 1);
        assert_eq!(s.tracks[0].confirmed_us, Some(100_000));
        assert!((s.tracks[0].lifespan_s - 0.9).abs() < 1e-12);
    }
}

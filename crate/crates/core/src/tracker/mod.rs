//! Point-target tracker with existence and visibility probabilities.
//!
//! Each track carries a constant-velocity Kalman state plus the probability
//! that the target exists and the probability that it is currently visible.
//! Visibility scales the effective detection probability, so an occluded
//! track loses existence slowly and can be picked up again on reappearance.
//! Contested detections go to the single track that explains them best.

pub mod filter;
mod output;

use std::collections::BTreeMap;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::detector::Detection;
use crate::error::{Error, Result};
use crate::geometry::{us_to_secs, TimestampUs};

pub use output::{
    parse_tracks_csv, serialize_tracks, summarize, TrackRow, TrackSummary, TrackingSummary,
    TRACK_HEADER,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    /// m²/s³
    pub process_noise_q: f64,
    pub measurement_std_m: f64,
    /// Expected false detections per m².
    pub clutter_density: f64,
    pub detection_probability: f64,
    pub survival_probability: f64,
    pub p_visible_to_visible: f64,
    pub p_invisible_to_visible: f64,
    pub gate_probability: f64,
    pub confirm_threshold: f64,
    pub terminate_threshold: f64,
    pub initial_existence: f64,
    pub initial_visibility: f64,
    pub initial_velocity_std: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            process_noise_q: 0.5,
            measurement_std_m: 0.3,
            clutter_density: 1e-4,
            detection_probability: 0.9,
            survival_probability: 0.999,
            p_visible_to_visible: 0.95,
            p_invisible_to_visible: 0.20,
            gate_probability: 0.99,
            confirm_threshold: 0.90,
            terminate_threshold: 0.05,
            initial_existence: 0.3,
            initial_visibility: 0.9,
            initial_velocity_std: 2.0,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("detection_probability", self.detection_probability),
            ("survival_probability", self.survival_probability),
            ("p_visible_to_visible", self.p_visible_to_visible),
            ("p_invisible_to_visible", self.p_invisible_to_visible),
            ("confirm_threshold", self.confirm_threshold),
            ("terminate_threshold", self.terminate_threshold),
            ("initial_existence", self.initial_existence),
            ("initial_visibility", self.initial_visibility),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "tracker: {name} must be in [0, 1], got {p}"
                )));
            }
        }
        if !(self.gate_probability > 0.0 && self.gate_probability < 1.0) {
            return Err(Error::Config(
                "tracker: gate_probability must be in (0, 1)".into(),
            ));
        }
        for (name, x) in [
            ("process_noise_q", self.process_noise_q),
            ("measurement_std_m", self.measurement_std_m),
            ("clutter_density", self.clutter_density),
            ("initial_velocity_std", self.initial_velocity_std),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Config(format!("tracker: {name} must be > 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Terminated,
}

impl TrackStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Tentative => "tentative",
            Self::Confirmed => "confirmed",
            Self::Terminated => "terminated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    /// (x, y, vx, vy)
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
    pub existence: f64,
    pub visibility: f64,
    pub status: TrackStatus,
    pub born_us: TimestampUs,
    pub last_update_us: TimestampUs,
    pub confirmed_us: Option<TimestampUs>,
}

/// Tracks after one step, including those terminated in it.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub timestamp_us: TimestampUs,
    pub tracks: Vec<Track>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub snapshot: Snapshot,
    /// Association weights `[β_0, β_1, ..]` per updated track id.
    pub weights: BTreeMap<u64, Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: TrackerConfig,
    tracks: Vec<Track>,
    next_id: u64,
    last_us: Option<TimestampUs>,
}

/// Result of association for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    pub weights: BTreeMap<u64, Vec<f64>>,
    /// Indices of detections outside every gate.
    pub unassociated: Vec<usize>,
}

/// Gates every track, gives each contested detection to the track with the
/// highest likelihood for it (lower id on ties) and applies the PDA update.
pub fn associate_and_update(
    tracks: &mut [Track],
    detections: &[(f64, f64)],
    cfg: &TrackerConfig,
) -> Result<Association> {
    let gamma = filter::gate_threshold(cfg.gate_probability);
    let mut owner: Vec<Option<(f64, usize)>> = vec![None; detections.len()];
    for (ti, track) in tracks.iter().enumerate() {
        let inn = filter::Innovation::new(track, cfg)?;
        for (di, &z) in detections.iter().enumerate() {
            let nu = filter::innovation_of(track, z);
            if inn.mahalanobis_sq(&nu) >= gamma {
                continue;
            }
            let g = inn.likelihood(&nu);
            let better = match owner[di] {
                None => true,
                Some((bg, bt)) => g > bg || (g == bg && track.id < tracks[bt].id),
            };
            if better {
                owner[di] = Some((g, ti));
            }
        }
    }
    let mut weights = BTreeMap::new();
    for ti in 0..tracks.len() {
        let owned: Vec<(f64, f64)> = owner
            .iter()
            .zip(detections)
            .filter(|(o, _)| matches!(o, Some((_, t)) if *t == ti))
            .map(|(_, &z)| z)
            .collect();
        let (updated, beta) = filter::update(&tracks[ti], &owned, cfg)?;
        weights.insert(updated.id, beta);
        tracks[ti] = updated;
    }
    let unassociated = owner
        .iter()
        .enumerate()
        .filter(|(_, o)| o.is_none())
        .map(|(i, _)| i)
        .collect();
    Ok(Association {
        weights,
        unassociated,
    })
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            tracks: Vec::new(),
            next_id: 1,
            last_us: None,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    fn birth(&mut self, z: (f64, f64), t: TimestampUs) {
        let pos_var = self.cfg.measurement_std_m.powi(2);
        let vel_var = self.cfg.initial_velocity_std.powi(2);
        self.tracks.push(Track {
            id: self.next_id,
            mean: Vector4::new(z.0, z.1, 0.0, 0.0),
            cov: Matrix4::from_diagonal(&Vector4::new(pos_var, pos_var, vel_var, vel_var)),
            existence: self.cfg.initial_existence,
            visibility: self.cfg.initial_visibility,
            status: TrackStatus::Tentative,
            born_us: t,
            last_update_us: t,
            confirmed_us: None,
        });
        self.next_id += 1;
    }

    /// One full cycle: predict, associate and update, lifecycle, birth.
    pub fn step(&mut self, t: TimestampUs, detections: &[Detection]) -> Result<StepReport> {
        if let Some(prev) = self.last_us {
            if t <= prev {
                return Err(Error::NonMonotonic {
                    previous_us: prev,
                    current_us: t,
                });
            }
            let dt = us_to_secs(t - prev);
            for tr in &mut self.tracks {
                *tr = filter::predict(tr, dt, &self.cfg);
            }
        }
        self.last_us = Some(t);

        let zs: Vec<(f64, f64)> = detections.iter().map(|d| (d.x, d.y)).collect();
        let assoc = associate_and_update(&mut self.tracks, &zs, &self.cfg)?;

        let mut terminated = Vec::new();
        let mut kept = Vec::with_capacity(self.tracks.len());
        for mut tr in self.tracks.drain(..) {
            tr.last_update_us = t;
            if tr.existence <= self.cfg.terminate_threshold {
                tr.status = TrackStatus::Terminated;
                terminated.push(tr);
                continue;
            }
            if tr.status == TrackStatus::Tentative && tr.existence >= self.cfg.confirm_threshold {
                tr.status = TrackStatus::Confirmed;
                tr.confirmed_us = Some(t);
            }
            kept.push(tr);
        }
        self.tracks = kept;
        for i in assoc.unassociated {
            self.birth(zs[i], t);
        }

        let mut tracks = self.tracks.clone();
        tracks.extend(terminated);
        tracks.sort_by_key(|tr| tr.id);
        Ok(StepReport {
            snapshot: Snapshot {
                timestamp_us: t,
                tracks,
            },
            weights: assoc.weights,
        })
    }
}

/// Runs the tracker over detections grouped by frame timestamp. Every frame
/// timestamp in `frame_times` is stepped, including frames with no detections.
pub fn run_tracker(
    cfg: &TrackerConfig,
    frame_times: &[TimestampUs],
    detections: &[Detection],
) -> Result<Vec<Snapshot>> {
    let mut by_time: BTreeMap<TimestampUs, Vec<Detection>> = BTreeMap::new();
    for d in detections {
        by_time.entry(d.timestamp_us).or_default().push(*d);
    }
    let mut tracker = Tracker::new(cfg.clone())?;
    let mut out = Vec::with_capacity(frame_times.len());
    for &t in frame_times {
        let dets = by_time.remove(&t).unwrap_or_default();
        out.push(tracker.step(t, &dets)?.snapshot);
    }
    if let Some((&t, _)) = by_time.iter().next() {
        return Err(Error::InvalidScenario(format!(
            "detection at {t} matches no frame timestamp"
        )));
    }
    Ok(out)
}

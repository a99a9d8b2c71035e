//! Synthetic harbor scenarios with exact ground truth.
//!
//! A 2D ray caster stands in for the LiDAR: each ray returns its first
//! polygon hit, lifted to 3D with a fixed height per object class. Oracle
//! masks are built from ray provenance, so every vessel return in view lands
//! in its vessel's mask.

mod degrade;
mod raycast;
mod scenarios;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    in_image, project_coords, CameraIntrinsics, Frame, GridSpec, Point3, Projection,
    RigidTransform, StampedPose, TimestampUs,
};
use crate::ingest::{
    grid_to_json, serialize_lidar, serialize_masks, serialize_poses, write_text, Calibration,
    EncPolygonSet, InstanceMask, LidarFrame, MaskFrame, Polygon, SequenceBundle, CALIB_FILE,
    ENC_FILE, GRID_FILE, LIDAR_FILE, MASKS_FILE, POSES_FILE,
};
use crate::map::{write_map, BinaryMap, MapMetadata, Provenance};

pub use degrade::{degrade_masks, FalsePositiveSpec};
pub use raycast::{ray_segment, Hit, Owner, Scene};
pub use scenarios::{builtin_scenario, builtin_scenarios, scenario_names};

pub const TRUTH_FILE: &str = "truth.csv";
pub const TRUTH_MAP_FILE: &str = "truth_map.pgm";
pub const COVERAGE_FILE: &str = "truth_coverage.pgm";
pub const DOCKED_FILE: &str = "truth_docked.pgm";
pub const VISIBILITY_FILE: &str = "visibility.csv";
pub const SCENARIO_FILE: &str = "scenario.json";
pub const LAND_PIXELS_FILE: &str = "land_pixels.json";
/// Subdirectory holding the static-scene pass used to build maps.
pub const MAPPING_DIR: &str = "mapping";

const STRUCTURE_HEIGHT_M: f64 = 1.0;
const VESSEL_HEIGHT_M: f64 = 0.6;
const CLUTTER_HEIGHT_M: f64 = 0.1;
const COORD_QUANTUM: f64 = 1e-4;

/// Exterior ring, counter-clockwise or not; closing vertex optional.
pub type Shape = Vec<[f64; 2]>;

pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Shape {
    vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
}

fn to_polygon(s: &Shape) -> Result<Polygon> {
    Polygon::new(s.iter().map(|p| (p[0], p[1])).collect(), Vec::new())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub t_s: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetScript {
    pub id: u32,
    /// Hull outline in the body frame, x forward.
    pub shape: Shape,
    /// Piecewise-linear track; held at the end points outside its time span.
    pub waypoints: Vec<Waypoint>,
    /// Heading while the target has not yet moved.
    pub initial_heading_deg: f64,
    pub vessel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgoWaypoint {
    pub t_s: f64,
    pub x: f64,
    pub y: f64,
    pub yaw_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarSpec {
    pub angular_resolution_deg: f64,
    pub max_range_m: f64,
    pub range_noise_std_m: f64,
    pub height_m: f64,
}

impl Default for LidarSpec {
    fn default() -> Self {
        Self {
            angular_resolution_deg: 0.2,
            max_range_m: 100.0,
            range_noise_std_m: 0.02,
            height_m: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub intrinsics: CameraIntrinsics,
    /// Camera-from-LiDAR rotation `[qw, qx, qy, qz]`.
    pub rotation: [f64; 4],
    pub translation: [f64; 3],
}

impl Default for CameraSpec {
    /// Forward-looking camera along LiDAR +x, 0.2 m above the LiDAR.
    fn default() -> Self {
        // rows (0,-1,0), (0,0,-1), (1,0,0)
        Self {
            intrinsics: CameraIntrinsics {
                fx: 400.0,
                fy: 400.0,
                cx: 640.0,
                cy: 360.0,
                width: 1280,
                height: 720,
            },
            rotation: [0.5, 0.5, -0.5, 0.5],
            translation: [0.0, -0.2, -0.1],
        }
    }
}

impl CameraSpec {
    pub fn calibration(&self) -> Result<Calibration> {
        self.intrinsics.validate()?;
        let [w, x, y, z] = self.rotation;
        let q = Quaternion::new(w, x, y, z);
        if (q.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidScenario(
                "camera rotation is not a unit quaternion".into(),
            ));
        }
        Ok(Calibration {
            intrinsics: self.intrinsics,
            cam_from_lidar: RigidTransform::from_quaternion(
                UnitQuaternion::new_unchecked(q),
                Vector3::from(self.translation),
                Frame::Lidar,
                Frame::Camera,
            ),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub seed: u64,
    pub duration_s: f64,
    pub start_us: TimestampUs,
    pub lidar_rate_hz: f64,
    pub mask_rate_hz: f64,
    pub camera_fps: f64,
    /// Offset of the camera clock relative to the LiDAR clock.
    pub camera_phase_s: f64,
    pub pose_rate_hz: f64,
    pub grid: GridSpec,
    /// True static structure.
    pub static_polygons: Vec<Shape>,
    /// Chart polygons as published, possibly imprecise or incomplete.
    pub enc_polygons: Vec<Shape>,
    pub docked_vessels: Vec<Shape>,
    pub targets: Vec<TargetScript>,
    /// Expected clutter points per frame.
    pub clutter_rate: f64,
    pub lidar: LidarSpec,
    pub camera: CameraSpec,
    pub ego: Vec<EgoWaypoint>,
    /// Length of the static-scene pass written for map building.
    pub mapping_duration_s: f64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(format!("{}: {m}", self.name)));
        if !(self.duration_s > 0.0) {
            return bad("duration must be > 0".into());
        }
        for (n, v) in [
            ("lidar_rate_hz", self.lidar_rate_hz),
            ("mask_rate_hz", self.mask_rate_hz),
            ("camera_fps", self.camera_fps),
            ("pose_rate_hz", self.pose_rate_hz),
            ("angular_resolution_deg", self.lidar.angular_resolution_deg),
            ("max_range_m", self.lidar.max_range_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{n} must be > 0"));
            }
        }
        if self.mask_rate_hz > self.lidar_rate_hz {
            return bad("mask rate cannot exceed the LiDAR rate".into());
        }
        if !(self.clutter_rate >= 0.0) || !(self.lidar.range_noise_std_m >= 0.0) {
            return bad("clutter rate and range noise must be >= 0".into());
        }
        if self.ego.is_empty() {
            return bad("ego trajectory is empty".into());
        }
        if self.ego.windows(2).any(|w| w[1].t_s <= w[0].t_s) {
            return bad("ego waypoints must have increasing times".into());
        }
        self.grid.validate()?;
        let mut ids = Vec::new();
        for t in &self.targets {
            if t.waypoints.is_empty() {
                return bad(format!("target {} has no waypoints", t.id));
            }
            if t.waypoints.windows(2).any(|w| w[1].t_s <= w[0].t_s) {
                return bad(format!(
                    "target {} waypoints must have increasing times",
                    t.id
                ));
            }
            if ids.contains(&t.id) {
                return bad(format!("duplicate target id {}", t.id));
            }
            ids.push(t.id);
            to_polygon(&t.shape)?;
        }
        for s in self
            .static_polygons
            .iter()
            .chain(&self.enc_polygons)
            .chain(&self.docked_vessels)
        {
            to_polygon(s)?;
        }
        self.camera.calibration()?;
        Ok(())
    }

    pub fn n_frames(&self) -> usize {
        (self.duration_s * self.lidar_rate_hz - 1e-9).floor() as usize + 1
    }

    fn frame_time_us(&self, k: usize) -> TimestampUs {
        self.start_us + (k as f64 * 1e6 / self.lidar_rate_hz).round() as TimestampUs
    }

    /// The same harbor with moving targets removed, for map building.
    pub fn static_pass(&self) -> ScenarioSpec {
        ScenarioSpec {
            name: format!("{}_mapping", self.name),
            duration_s: self.mapping_duration_s,
            targets: Vec::new(),
            ..self.clone()
        }
    }
}

/// Piecewise-linear position plus heading of a target at `t`.
pub fn target_pose(script: &TargetScript, t: f64) -> (f64, f64, f64) {
    let w = &script.waypoints;
    let mut heading = script.initial_heading_deg.to_radians();
    if t <= w[0].t_s {
        return (w[0].x, w[0].y, heading);
    }
    for seg in w.windows(2) {
        let (a, b) = (&seg[0], &seg[1]);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        if dx != 0.0 || dy != 0.0 {
            heading = dy.atan2(dx);
        }
        if t <= b.t_s {
            let f = (t - a.t_s) / (b.t_s - a.t_s);
            return (a.x + f * dx, a.y + f * dy, heading);
        }
    }
    let last = w.last().expect("non-empty");
    (last.x, last.y, heading)
}

fn placed_shape(script: &TargetScript, t: f64) -> Result<Polygon> {
    let (x, y, h) = target_pose(script, t);
    let (s, c) = h.sin_cos();
    Polygon::new(
        script
            .shape
            .iter()
            .map(|p| (x + c * p[0] - s * p[1], y + s * p[0] + c * p[1]))
            .collect(),
        Vec::new(),
    )
}

/// Ego pose (x, y, yaw in radians) at `t`.
pub fn ego_pose(ego: &[EgoWaypoint], t: f64) -> (f64, f64, f64) {
    if t <= ego[0].t_s {
        return (ego[0].x, ego[0].y, ego[0].yaw_deg.to_radians());
    }
    for seg in ego.windows(2) {
        let (a, b) = (&seg[0], &seg[1]);
        if t <= b.t_s {
            let f = (t - a.t_s) / (b.t_s - a.t_s);
            return (
                a.x + f * (b.x - a.x),
                a.y + f * (b.y - a.y),
                (a.yaw_deg + f * (b.yaw_deg - a.yaw_deg)).to_radians(),
            );
        }
    }
    let l = ego.last().expect("non-empty");
    (l.x, l.y, l.yaw_deg.to_radians())
}

fn world_from_lidar(ego: &[EgoWaypoint], height: f64, t: f64) -> RigidTransform {
    let (x, y, yaw) = ego_pose(ego, t);
    RigidTransform::from_yaw(yaw, Vector3::new(x, y, height), Frame::Lidar, Frame::World)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub timestamp_us: TimestampUs,
    pub target_id: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub positions: Vec<TruthRow>,
    /// Static polygons rasterized with the chart rasterizer.
    pub static_map: BinaryMap,
    /// Truth static cells a noise-free scan of the static scene reaches.
    pub coverage: BinaryMap,
    /// Cells holding noise-free returns from docked vessels.
    pub docked_footprint: BinaryMap,
    /// Pixels of static-structure returns in the first frame.
    pub land_pixels: Vec<(u32, u32)>,
    /// Per frame, returns per target id (targets with none are listed as 0).
    pub visible_points: Vec<(TimestampUs, BTreeMap<u32, usize>)>,
    pub clutter_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub bundle: SequenceBundle,
    pub enc: EncPolygonSet,
    pub truth: GroundTruth,
}

struct World {
    statics: Vec<Polygon>,
    docked: Vec<Polygon>,
}

impl World {
    fn scene(&self, spec: &ScenarioSpec, t: f64) -> Result<Scene> {
        let mut scene = Scene::default();
        for (i, p) in self.statics.iter().enumerate() {
            scene.add(Owner::Static(i), p.clone());
        }
        for (i, p) in self.docked.iter().enumerate() {
            scene.add(Owner::Docked(i), p.clone());
        }
        for tgt in &spec.targets {
            scene.add(Owner::Target(tgt.id), placed_shape(tgt, t)?);
        }
        Ok(scene)
    }
}

fn quantize(v: f64) -> f64 {
    let q = (v / COORD_QUANTUM).round() * COORD_QUANTUM;
    // normalizes -0.0 and trims representation noise for the text format
    let s = format!("{q:.4}");
    s.parse::<f64>().expect("formatted float parses") + 0.0
}

fn height_of(owner: Owner) -> f64 {
    if owner.is_vessel() {
        VESSEL_HEIGHT_M
    } else {
        STRUCTURE_HEIGHT_M
    }
}

fn ray_dirs(spec: &ScenarioSpec) -> Vec<f64> {
    let n = (360.0 / spec.lidar.angular_resolution_deg).round() as usize;
    (0..n)
        .map(|i| (i as f64 * spec.lidar.angular_resolution_deg).to_radians())
        .collect()
}

fn pixel_of(p_lidar: &Vector3<f64>, calib: &Calibration) -> Option<(u32, u32)> {
    match project_coords(&calib.cam_from_lidar.apply(p_lidar), &calib.intrinsics) {
        Projection::Pixel { px, .. } if in_image(&px, &calib.intrinsics) => {
            px.rounded(calib.intrinsics.width, calib.intrinsics.height)
        }
        _ => None,
    }
}

/// Generates sensor data and ground truth for a scenario.
pub fn generate(spec: &ScenarioSpec) -> Result<Generated> {
    spec.validate()?;
    let calib = spec.camera.calibration()?;
    let world = World {
        statics: spec
            .static_polygons
            .iter()
            .map(to_polygon)
            .collect::<Result<_>>()?,
        docked: spec
            .docked_vessels
            .iter()
            .map(to_polygon)
            .collect::<Result<_>>()?,
    };
    let enc = EncPolygonSet {
        polygons: spec
            .enc_polygons
            .iter()
            .map(to_polygon)
            .collect::<Result<_>>()?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.lidar.range_noise_std_m.max(0.0))
        .map_err(|e| Error::InvalidScenario(e.to_string()))?;
    let clutter = (spec.clutter_rate > 0.0)
        .then(|| Poisson::new(spec.clutter_rate))
        .transpose()
        .map_err(|e| Error::InvalidScenario(e.to_string()))?;
    let dirs = ray_dirs(spec);
    let max_r = spec.lidar.max_range_m;
    let mask_every = (spec.lidar_rate_hz / spec.mask_rate_hz).round().max(1.0) as usize;
    let (w, h) = (calib.intrinsics.width, calib.intrinsics.height);

    let mut lidar = Vec::new();
    let mut masks = Vec::new();
    let mut positions = Vec::new();
    let mut visible_points = Vec::new();
    let mut land_pixels: Vec<(u32, u32)> = Vec::new();
    let mut clutter_points = 0;
    let non_vessels: Vec<u32> = spec
        .targets
        .iter()
        .filter(|t| !t.vessel)
        .map(|t| t.id)
        .collect();

    for k in 0..spec.n_frames() {
        let t = k as f64 / spec.lidar_rate_hz;
        let t_us = spec.frame_time_us(k);
        let pose = world_from_lidar(&spec.ego, spec.lidar.height_m, t);
        let lidar_from_world = pose.inverse();
        let (ox, oy, yaw) = ego_pose(&spec.ego, t);
        let scene = world.scene(spec, t)?.restrict((ox, oy), max_r);

        let mut points = Vec::with_capacity(dirs.len());
        let mut owners = Vec::with_capacity(dirs.len());
        for &az in &dirs {
            let a = yaw + az;
            let dir = (a.cos(), a.sin());
            let Some(hit) = scene.cast((ox, oy), dir, max_r) else {
                continue;
            };
            let r = hit.range + noise.sample(&mut rng);
            if r <= 0.0 {
                continue;
            }
            let world_p = Vector3::new(ox + r * dir.0, oy + r * dir.1, height_of(hit.owner));
            points.push(lidar_from_world.apply(&world_p));
            owners.push(Some(hit.owner));
        }
        if let Some(poisson) = &clutter {
            let n = poisson.sample(&mut rng) as usize;
            for _ in 0..n {
                for _attempt in 0..20 {
                    let rr = max_r * rng.random::<f64>().sqrt();
                    let th = rng.random::<f64>() * std::f64::consts::TAU;
                    let dir = (th.cos(), th.sin());
                    let p = (ox + rr * dir.0, oy + rr * dir.1);
                    if scene.inside_any(p) || scene.cast((ox, oy), dir, rr).is_some() {
                        continue;
                    }
                    points.push(lidar_from_world.apply(&Vector3::new(p.0, p.1, CLUTTER_HEIGHT_M)));
                    owners.push(None);
                    clutter_points += 1;
                    break;
                }
            }
        }
        let points: Vec<Vector3<f64>> = points.into_iter().map(|v| v.map(quantize)).collect();

        let mut counts: BTreeMap<u32, usize> = spec.targets.iter().map(|t| (t.id, 0)).collect();
        let mut instance_pixels: BTreeMap<Owner, Vec<(u32, u32)>> = BTreeMap::new();
        for (p, owner) in points.iter().zip(&owners) {
            let Some(owner) = *owner else { continue };
            if let Owner::Target(id) = owner {
                *counts.entry(id).or_default() += 1;
            }
            let vessel = match owner {
                Owner::Target(id) => !non_vessels.contains(&id),
                o => o.is_vessel(),
            };
            let px = pixel_of(p, &calib);
            match (vessel, px) {
                (true, Some(px)) => instance_pixels.entry(owner).or_default().push(px),
                (false, Some(px)) if k == 0 => land_pixels.push(px),
                _ => {}
            }
        }
        if k % mask_every == 0 {
            let t_cam = spec.camera_phase_s
                + ((t - spec.camera_phase_s) * spec.camera_fps).round() / spec.camera_fps;
            masks.push(MaskFrame {
                timestamp_us: spec.start_us + (t_cam * 1e6).round() as TimestampUs,
                width: w,
                height: h,
                instances: instance_pixels
                    .into_values()
                    .map(InstanceMask::from_pixels)
                    .collect(),
            });
        }
        for tgt in &spec.targets {
            let (x, y, _) = target_pose(tgt, t);
            positions.push(TruthRow {
                timestamp_us: t_us,
                target_id: tgt.id,
                x,
                y,
            });
        }
        visible_points.push((t_us, counts));
        lidar.push(LidarFrame {
            timestamp_us: t_us,
            points: points
                .iter()
                .map(|v| Point3::new(v.x, v.y, v.z, Frame::Lidar))
                .collect(),
        });
    }
    land_pixels.sort_unstable();
    land_pixels.dedup();

    let poses = pose_stream(spec);
    let static_map = crate::ingest::rasterize_polygons(&world.statics, &spec.grid);
    let (coverage, docked_footprint) = coverage_maps(spec, &world, &static_map)?;
    Ok(Generated {
        bundle: SequenceBundle {
            lidar,
            poses,
            masks,
            calibration: calib,
            grid: spec.grid,
        },
        enc,
        truth: GroundTruth {
            positions,
            static_map,
            coverage,
            docked_footprint,
            land_pixels,
            visible_points,
            clutter_points,
        },
    })
}

fn pose_stream(spec: &ScenarioSpec) -> Vec<StampedPose> {
    let n = (spec.duration_s * spec.pose_rate_hz).ceil() as usize;
    (0..=n)
        .map(|j| {
            let t = j as f64 / spec.pose_rate_hz;
            StampedPose {
                timestamp_us: spec.start_us + (t * 1e6).round() as TimestampUs,
                transform: world_from_lidar(&spec.ego, spec.lidar.height_m, t),
            }
        })
        .collect()
}

/// Noise-free scans of the static scene (docked vessels included as
/// occluders), once per second of the sequence.
fn coverage_maps(
    spec: &ScenarioSpec,
    world: &World,
    static_map: &BinaryMap,
) -> Result<(BinaryMap, BinaryMap)> {
    let mut scene = Scene::default();
    for (i, p) in world.statics.iter().enumerate() {
        scene.add(Owner::Static(i), p.clone());
    }
    for (i, p) in world.docked.iter().enumerate() {
        scene.add(Owner::Docked(i), p.clone());
    }
    let g = spec.grid;
    let mut seen_static = BinaryMap::empty(g);
    let mut docked = BinaryMap::empty(g);
    let dirs = ray_dirs(spec);
    let step = spec.lidar_rate_hz.round().max(1.0) as usize;
    for k in (0..spec.n_frames()).step_by(step) {
        let t = k as f64 / spec.lidar_rate_hz;
        let (ox, oy, yaw) = ego_pose(&spec.ego, t);
        let local = scene.restrict((ox, oy), spec.lidar.max_range_m);
        for &az in &dirs {
            let a = yaw + az;
            let dir = (a.cos(), a.sin());
            let Some(hit) = local.cast((ox, oy), dir, spec.lidar.max_range_m) else {
                continue;
            };
            let Some(c) = g.cell_of(ox + hit.range * dir.0, oy + hit.range * dir.1) else {
                continue;
            };
            if hit.owner.is_vessel() {
                docked.set(c, true);
            } else {
                seen_static.set(c, true);
            }
        }
    }
    Ok((seen_static.zip_with(static_map, |a, b| a && b)?, docked))
}

pub fn serialize_truth(rows: &[TruthRow]) -> String {
    let mut out = String::from("timestamp_us,target_id,x,y\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.timestamp_us, r.target_id, r.x, r.y);
    }
    out
}

pub fn parse_truth(text: &str, path: &Path) -> Result<Vec<TruthRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "timestamp_us,target_id,x,y" => {}
        _ => {
            return Err(Error::parse(
                path,
                1,
                "expected header \"timestamp_us,target_id,x,y\"",
            ))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::parse(path, idx + 1, format!("malformed truth row {line:?}"));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(bad());
        }
        rows.push(TruthRow {
            timestamp_us: f[0].parse().map_err(|_| bad())?,
            target_id: f[1].parse().map_err(|_| bad())?,
            x: f[2].parse().map_err(|_| bad())?,
            y: f[3].parse().map_err(|_| bad())?,
        });
    }
    Ok(rows)
}

pub fn load_truth(path: &Path) -> Result<Vec<TruthRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_truth(&text, path)
}

fn serialize_visibility(rows: &[(TimestampUs, BTreeMap<u32, usize>)]) -> String {
    let mut out = String::from("timestamp_us,target_id,n_points\n");
    for (t, counts) in rows {
        for (id, n) in counts {
            let _ = writeln!(out, "{t},{id},{n}");
        }
    }
    out
}

/// Writes the standard input file set plus ground truth into `dir`.
pub fn write_generated(dir: &Path, spec: &ScenarioSpec, g: &Generated) -> Result<()> {
    let b = &g.bundle;
    write_text(&dir.join(LIDAR_FILE), &serialize_lidar(&b.lidar))?;
    let raw: Vec<_> = b
        .poses
        .iter()
        .map(|p| {
            let q = p.transform.quaternion();
            let (qw, qx, qy, qz) = if q.w < 0.0 {
                (-q.w, -q.i, -q.j, -q.k)
            } else {
                (q.w, q.i, q.j, q.k)
            };
            let t = p.transform.translation();
            (
                p.timestamp_us,
                [t.x, t.y, t.z].map(quantize),
                [qw, qx, qy, qz],
            )
        })
        .collect();
    write_text(&dir.join(POSES_FILE), &serialize_poses(&raw))?;
    write_text(&dir.join(MASKS_FILE), &serialize_masks(&b.masks))?;
    write_text(&dir.join(CALIB_FILE), &b.calibration.to_json())?;
    write_text(&dir.join(GRID_FILE), &grid_to_json(&b.grid))?;
    write_text(&dir.join(ENC_FILE), &g.enc.to_geojson())?;
    write_text(&dir.join(TRUTH_FILE), &serialize_truth(&g.truth.positions))?;
    write_text(
        &dir.join(VISIBILITY_FILE),
        &serialize_visibility(&g.truth.visible_points),
    )?;
    write_text(
        &dir.join(LAND_PIXELS_FILE),
        &(serde_json::to_string(&g.truth.land_pixels).expect("pixels serialize") + "\n"),
    )?;
    let spec_text = serde_json::to_string_pretty(spec).expect("spec serializes") + "\n";
    write_text(&dir.join(SCENARIO_FILE), &spec_text)?;
    let meta = MapMetadata {
        grid: b.grid,
        provenance: Provenance {
            config_hash: crate::config::sha256_hex(spec_text.as_bytes()),
            inputs: vec![SCENARIO_FILE.to_string()],
        },
    };
    write_map(&g.truth.static_map, &dir.join(TRUTH_MAP_FILE), &meta)?;
    write_map(&g.truth.coverage, &dir.join(COVERAGE_FILE), &meta)?;
    write_map(&g.truth.docked_footprint, &dir.join(DOCKED_FILE), &meta)?;
    Ok(())
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: ScenarioSpec =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

/// Generates the scenario into `dir` and its static pass into `dir/mapping`.
pub fn simulate_to_dir(spec: &ScenarioSpec, dir: &Path) -> Result<Generated> {
    let g = generate(spec)?;
    write_generated(dir, spec, &g)?;
    let stat = spec.static_pass();
    let gs = if spec.targets.is_empty() && stat.duration_s == spec.duration_s {
        g.clone()
    } else {
        generate(&stat)?
    };
    write_generated(&dir.join(MAPPING_DIR), &stat, &gs)?;
    Ok(g)
}

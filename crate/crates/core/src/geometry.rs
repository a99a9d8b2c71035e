//! Coordinate frames, rigid transforms, pinhole projection and grid indexing.
//!
//! Everything here is a pure function of its inputs.

use std::fmt;

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Microseconds since the epoch. All sensor streams share this clock.
pub type TimestampUs = i64;

pub fn us_to_secs(t: TimestampUs) -> f64 {
    t as f64 * 1e-6
}

const ROTATION_TOL: f64 = 1e-9;

/// Reference frame a point or transform endpoint is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lidar,
    Camera,
    World,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Frame::Lidar => "lidar",
            Frame::Camera => "camera",
            Frame::World => "world",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub frame: Frame,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64, frame: Frame) -> Self {
        Self { x, y, z, frame }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn coords(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }
}

/// Rotation followed by translation: `p_target = R * p_source + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidTransform {
    rotation: Rotation3<f64>,
    translation: Vector3<f64>,
    pub source: Frame,
    pub target: Frame,
}

impl RigidTransform {
    pub fn identity(source: Frame, target: Frame) -> Self {
        Self {
            rotation: Rotation3::identity(),
            translation: Vector3::zeros(),
            source,
            target,
        }
    }

    /// Builds a transform from a raw 3×3 matrix, rejecting anything that is not
    /// a proper rotation.
    pub fn from_matrix(
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
        source: Frame,
        target: Frame,
    ) -> Result<Self> {
        let gram = rotation.transpose() * rotation;
        let ortho_err = (gram - Matrix3::identity()).abs().max();
        let det = rotation.determinant();
        if ortho_err > ROTATION_TOL || (det - 1.0).abs() > ROTATION_TOL {
            return Err(Error::Config(format!(
                "rotation not orthonormal (err {ortho_err:.3e}, det {det:.12})"
            )));
        }
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("non-finite translation".into()));
        }
        Ok(Self {
            rotation: Rotation3::from_matrix_unchecked(rotation),
            translation,
            source,
            target,
        })
    }

    pub fn from_quaternion(
        quaternion: UnitQuaternion<f64>,
        translation: Vector3<f64>,
        source: Frame,
        target: Frame,
    ) -> Self {
        Self {
            rotation: quaternion.to_rotation_matrix(),
            translation,
            source,
            target,
        }
    }

    /// Rotation of `yaw` radians about +z followed by a translation.
    pub fn from_yaw(yaw: f64, translation: Vector3<f64>, source: Frame, target: Frame) -> Self {
        Self {
            rotation: Rotation3::from_axis_angle(&Vector3::z_axis(), yaw),
            translation,
            source,
            target,
        }
    }

    pub fn rotation(&self) -> &Rotation3<f64> {
        &self.rotation
    }

    pub fn quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_rotation_matrix(&self.rotation)
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn inverse(&self) -> Self {
        let rot_inv = self.rotation.inverse();
        Self {
            translation: -(rot_inv * self.translation),
            rotation: rot_inv,
            source: self.target,
            target: self.source,
        }
    }

    /// `self ∘ inner`: applies `inner` first, then `self`.
    pub fn compose(&self, inner: &RigidTransform) -> Result<Self> {
        if inner.target != self.source {
            return Err(Error::Config(format!(
                "cannot compose {}->{} after {}->{}",
                self.source, self.target, inner.source, inner.target
            )));
        }
        Ok(Self {
            rotation: self.rotation * inner.rotation,
            translation: self.rotation * inner.translation + self.translation,
            source: inner.source,
            target: self.target,
        })
    }

    /// Applies the transform without checking frame labels.
    #[inline]
    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v + self.translation
    }
}

pub fn transform_point(p: &Point3, t: &RigidTransform) -> Result<Point3> {
    if p.frame != t.source {
        return Err(Error::Config(format!(
            "point in {} frame, transform expects {}",
            p.frame, t.source
        )));
    }
    let v = t.apply(&p.coords());
    Ok(Point3::new(v.x, v.y, v.z, t.target))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.fx > 0.0
            && self.fy > 0.0
            && self.cx >= 0.0
            && self.cx < self.width as f64
            && self.cy >= 0.0
            && self.cy < self.height as f64;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid camera intrinsics {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelCoord {
    pub x: f64,
    pub y: f64,
}

impl PixelCoord {
    /// Nearest integer pixel, or `None` when outside a `width`×`height` image.
    pub fn rounded(&self, width: u32, height: u32) -> Option<(u32, u32)> {
        let x = self.x.round();
        let y = self.y.round();
        if x >= 0.0 && y >= 0.0 && x < width as f64 && y < height as f64 {
            Some((x as u32, y as u32))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Pixel { px: PixelCoord, depth: f64 },
    Behind,
}

/// Pinhole projection of a camera-frame point.
pub fn project_point(p_cam: &Point3, k: &CameraIntrinsics) -> Projection {
    project_coords(&p_cam.coords(), k)
}

#[inline]
pub fn project_coords(v: &Vector3<f64>, k: &CameraIntrinsics) -> Projection {
    if v.z <= 0.0 {
        return Projection::Behind;
    }
    Projection::Pixel {
        px: PixelCoord {
            x: k.fx * v.x / v.z + k.cx,
            y: k.fy * v.y / v.z + k.cy,
        },
        depth: v.z,
    }
}

/// Inverse of [`project_point`] given the depth.
pub fn back_project(px: &PixelCoord, depth: f64, k: &CameraIntrinsics) -> Point3 {
    Point3::new(
        (px.x - k.cx) * depth / k.fx,
        (px.y - k.cy) * depth / k.fy,
        depth,
        Frame::Camera,
    )
}

pub fn in_image(px: &PixelCoord, k: &CameraIntrinsics) -> bool {
    px.x >= 0.0 && px.x < k.width as f64 && px.y >= 0.0 && px.y < k.height as f64
}

/// Regular 2D grid in the world frame. Cell `(col, row)` covers
/// `[origin + col*cell, origin + (col+1)*cell)` in x and likewise in y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub n_cols: usize,
    pub n_rows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub col: usize,
    pub row: usize,
}

impl GridSpec {
    pub fn new(
        origin_x: f64,
        origin_y: f64,
        cell_size: f64,
        n_cols: usize,
        n_rows: usize,
    ) -> Result<Self> {
        let g = Self {
            origin_x,
            origin_y,
            cell_size,
            n_cols,
            n_rows,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(Error::Config(format!(
                "cell_size must be > 0, got {}",
                self.cell_size
            )));
        }
        if self.n_cols == 0 || self.n_rows == 0 {
            return Err(Error::Config(
                "grid must have at least one row and column".into(),
            ));
        }
        if !(self.origin_x.is_finite() && self.origin_y.is_finite()) {
            return Err(Error::Config("non-finite grid origin".into()));
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.n_cols * self.n_rows
    }

    /// Cell containing world `(x, y)`, `None` when outside the grid.
    #[inline]
    pub fn cell_of(&self, x: f64, y: f64) -> Option<CellIndex> {
        let fc = ((x - self.origin_x) / self.cell_size).floor();
        let fr = ((y - self.origin_y) / self.cell_size).floor();
        if fc >= 0.0 && fr >= 0.0 && fc < self.n_cols as f64 && fr < self.n_rows as f64 {
            Some(CellIndex {
                col: fc as usize,
                row: fr as usize,
            })
        } else {
            None
        }
    }

    #[inline]
    pub fn linear(&self, c: CellIndex) -> usize {
        c.row * self.n_cols + c.col
    }

    #[inline]
    pub fn unlinear(&self, i: usize) -> CellIndex {
        CellIndex {
            col: i % self.n_cols,
            row: i / self.n_cols,
        }
    }

    pub fn cell_center(&self, c: CellIndex) -> (f64, f64) {
        (
            self.origin_x + (c.col as f64 + 0.5) * self.cell_size,
            self.origin_y + (c.row as f64 + 0.5) * self.cell_size,
        )
    }
}

/// Drops z and indexes the grid. The point must be in the world frame.
pub fn world_to_cell(p_world: &Point3, g: &GridSpec) -> Option<CellIndex> {
    debug_assert_eq!(p_world.frame, Frame::World);
    g.cell_of(p_world.x, p_world.y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StampedPose {
    pub timestamp_us: TimestampUs,
    pub transform: RigidTransform,
}

/// Pose at `t_us`: linear in translation, slerp in rotation between the two
/// bracketing samples.
pub fn interpolate_pose(poses: &[StampedPose], t_us: TimestampUs) -> Result<RigidTransform> {
    let (first, last) = match (poses.first(), poses.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Config("empty pose sequence".into())),
    };
    if t_us < first.timestamp_us || t_us > last.timestamp_us {
        return Err(Error::Extrapolation {
            t_us,
            first_us: first.timestamp_us,
            last_us: last.timestamp_us,
        });
    }
    let idx = poses.partition_point(|p| p.timestamp_us < t_us);
    let upper = &poses[idx];
    if upper.timestamp_us == t_us {
        return Ok(upper.transform.clone());
    }
    let lower = &poses[idx - 1];
    let span = (upper.timestamp_us - lower.timestamp_us) as f64;
    let alpha = (t_us - lower.timestamp_us) as f64 / span;

    let a = &lower.transform;
    let b = &upper.transform;
    let translation = a.translation + (b.translation - a.translation) * alpha;
    let q = a.quaternion().slerp(&b.quaternion(), alpha);
    Ok(RigidTransform::from_quaternion(
        q,
        translation,
        a.source,
        a.target,
    ))
}

use std::fs;
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Frame, RigidTransform};

/// Intrinsics plus the LiDAR-to-camera extrinsic.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub intrinsics: CameraIntrinsics,
    pub cam_from_lidar: RigidTransform,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExtrinsicDoc {
    /// `[qw, qx, qy, qz]`
    rotation: [f64; 4],
    translation: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
struct CalibrationDoc {
    #[serde(rename = "K")]
    k: CameraIntrinsics,
    #[serde(rename = "H_cam_lidar")]
    h_cam_lidar: ExtrinsicDoc,
}

impl Calibration {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let doc: CalibrationDoc =
            serde_json::from_str(text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
        doc.k.validate()?;
        let [w, x, y, z] = doc.h_cam_lidar.rotation;
        let q = Quaternion::new(w, x, y, z);
        if (q.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::parse(
                path,
                1,
                "H_cam_lidar rotation is not a unit quaternion",
            ));
        }
        Ok(Self {
            intrinsics: doc.k,
            cam_from_lidar: RigidTransform::from_quaternion(
                UnitQuaternion::new_unchecked(q),
                Vector3::from(doc.h_cam_lidar.translation),
                Frame::Lidar,
                Frame::Camera,
            ),
        })
    }

    pub fn to_json(&self) -> String {
        let q = self.cam_from_lidar.quaternion();
        let t = self.cam_from_lidar.translation();
        let doc = CalibrationDoc {
            k: self.intrinsics,
            h_cam_lidar: ExtrinsicDoc {
                rotation: [q.w, q.i, q.j, q.k],
                translation: [t.x, t.y, t.z],
            },
        };
        serde_json::to_string_pretty(&doc).expect("calibration serializes") + "\n"
    }
}

pub fn load_calibration(path: &Path) -> Result<Calibration> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Calibration::from_json(&text, path)
}

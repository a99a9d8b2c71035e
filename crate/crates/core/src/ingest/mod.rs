//! Loading and validating pipeline inputs.

mod calib;
mod enc;
mod lidar;
mod masks;
mod poses;

use std::fs;
use std::path::Path;

pub use calib::{load_calibration, Calibration};
pub use enc::{load_enc, rasterize_enc, rasterize_polygons, EncPolygonSet, Polygon, Ring};
pub use lidar::{load_lidar_sequence, parse_lidar, serialize_lidar, LidarFrame, LIDAR_HEADER};
pub use masks::{
    load_masks, match_mask_to_frame, parse_masks, serialize_masks, InstanceMask, MaskFrame, MaskRow,
};
pub use poses::{load_poses, parse_poses, serialize_poses, POSE_HEADER};

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, StampedPose};

pub const LIDAR_FILE: &str = "lidar.csv";
pub const POSES_FILE: &str = "poses.csv";
pub const MASKS_FILE: &str = "masks.json";
pub const CALIB_FILE: &str = "calib.json";
pub const GRID_FILE: &str = "grid.json";
pub const ENC_FILE: &str = "enc.geojson";

/// Default mask/LiDAR association tolerance: half a 10 Hz LiDAR period.
pub const DEFAULT_MASK_TOLERANCE_US: i64 = 50_000;

/// Everything needed to map or track one recorded sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceBundle {
    pub lidar: Vec<LidarFrame>,
    pub poses: Vec<StampedPose>,
    pub masks: Vec<MaskFrame>,
    pub calibration: Calibration,
    pub grid: GridSpec,
}

pub fn load_grid(path: &Path) -> Result<GridSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let g: GridSpec =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    g.validate()?;
    Ok(g)
}

pub fn grid_to_json(g: &GridSpec) -> String {
    serde_json::to_string_pretty(g).expect("grid serializes") + "\n"
}

impl SequenceBundle {
    /// Loads the standard file set from `dir`. A missing mask file yields an
    /// empty mask stream.
    pub fn load(dir: &Path) -> Result<Self> {
        let masks_path = dir.join(MASKS_FILE);
        let masks = if masks_path.exists() {
            load_masks(&masks_path)?
        } else {
            Vec::new()
        };
        Ok(Self {
            lidar: load_lidar_sequence(&dir.join(LIDAR_FILE))?,
            poses: load_poses(&dir.join(POSES_FILE))?,
            masks,
            calibration: load_calibration(&dir.join(CALIB_FILE))?,
            grid: load_grid(&dir.join(GRID_FILE))?,
        })
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

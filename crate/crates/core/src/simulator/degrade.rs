//! Rate-based segmentation errors applied to oracle masks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{InstanceMask, MaskFrame};

/// Spurious boxes injected over land pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsePositiveSpec {
    /// Expected spurious masks per frame (Poisson).
    pub rate_per_frame: f64,
    pub width_px: u32,
    pub height_px: u32,
}

impl Default for FalsePositiveSpec {
    fn default() -> Self {
        Self {
            rate_per_frame: 0.0,
            width_px: 40,
            height_px: 30,
        }
    }
}

/// Drops each instance with probability `false_negative_rate` and adds
/// spurious boxes centered on randomly chosen `land_anchors`.
pub fn degrade_masks(
    masks: &[MaskFrame],
    false_negative_rate: f64,
    fp: &FalsePositiveSpec,
    land_anchors: &[(u32, u32)],
    seed: u64,
) -> Result<Vec<MaskFrame>> {
    if !(0.0..=1.0).contains(&false_negative_rate)
        || !(fp.rate_per_frame >= 0.0 && fp.rate_per_frame.is_finite())
    {
        return Err(Error::Config("mask degradation rates out of range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poisson = if fp.rate_per_frame > 0.0 && !land_anchors.is_empty() {
        Some(Poisson::new(fp.rate_per_frame).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };
    let mut out = Vec::with_capacity(masks.len());
    for frame in masks {
        let mut f = frame.clone();
        f.instances = frame
            .instances
            .iter()
            .filter(|_| !rng.random_bool(false_negative_rate))
            .cloned()
            .collect();
        if let Some(p) = &poisson {
            let n = p.sample(&mut rng) as usize;
            for _ in 0..n {
                let (ax, ay) = land_anchors[rng.random_range(0..land_anchors.len())];
                let x0 = ax.saturating_sub(fp.width_px / 2);
                let y0 = ay.saturating_sub(fp.height_px / 2);
                let x1 = (x0 + fp.width_px).min(f.width);
                let y1 = (y0 + fp.height_px).min(f.height);
                if x1 > x0 && y1 > y0 {
                    f.instances.push(InstanceMask::from_box(x0, y0, x1, y1));
                }
            }
        }
        out.push(f);
    }
    Ok(out)
}

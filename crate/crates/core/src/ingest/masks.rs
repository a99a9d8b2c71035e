//! Vessel instance masks stored as per-row run lengths.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TimestampUs;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskRow {
    pub y: u32,
    /// Half-open `[x_start, x_end)` spans.
    pub spans: Vec<[u32; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMask {
    pub rows: Vec<MaskRow>,
}

impl InstanceMask {
    /// Builds a mask from individual pixels, merging adjacent columns into spans.
    pub fn from_pixels(mut pixels: Vec<(u32, u32)>) -> Self {
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        pixels.dedup();
        let mut rows: Vec<MaskRow> = Vec::new();
        for (x, y) in pixels {
            match rows.last_mut() {
                Some(row) if row.y == y => {
                    let last = row.spans.last_mut().expect("row has a span");
                    if last[1] == x {
                        last[1] = x + 1;
                    } else {
                        row.spans.push([x, x + 1]);
                    }
                }
                _ => rows.push(MaskRow {
                    y,
                    spans: vec![[x, x + 1]],
                }),
            }
        }
        Self { rows }
    }

    /// Axis-aligned box `[x0, x1) × [y0, y1)`.
    pub fn from_box(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Self {
            rows: (y0..y1)
                .map(|y| MaskRow {
                    y,
                    spans: vec![[x0, x1]],
                })
                .collect(),
        }
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        match self.rows.binary_search_by_key(&y, |r| r.y) {
            Ok(i) => self.rows[i].spans.iter().any(|s| x >= s[0] && x < s[1]),
            Err(_) => false,
        }
    }

    pub fn pixel_count(&self) -> u64 {
        self.rows
            .iter()
            .flat_map(|r| r.spans.iter())
            .map(|s| u64::from(s[1] - s[0]))
            .sum()
    }

    fn normalize(&mut self) {
        self.rows.sort_by_key(|r| r.y);
        for r in &mut self.rows {
            r.spans.sort_unstable();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskFrame {
    pub timestamp_us: TimestampUs,
    pub width: u32,
    pub height: u32,
    pub instances: Vec<InstanceMask>,
}

impl MaskFrame {
    pub fn any_contains(&self, x: u32, y: u32) -> bool {
        self.instances.iter().any(|m| m.contains(x, y))
    }

    fn validate(&self) -> std::result::Result<(), String> {
        for (i, inst) in self.instances.iter().enumerate() {
            for row in &inst.rows {
                if row.y >= self.height {
                    return Err(format!(
                        "instance {i}: row {} outside image height {}",
                        row.y, self.height
                    ));
                }
                for s in &row.spans {
                    if s[0] >= self.width || s[1] > self.width || s[0] >= s[1] {
                        return Err(format!(
                            "instance {i}: span [{}, {}) invalid for width {} at row {}",
                            s[0], s[1], self.width, row.y
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn load_masks(path: &Path) -> Result<Vec<MaskFrame>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_masks(&text, path)
}

pub fn parse_masks(text: &str, path: &Path) -> Result<Vec<MaskFrame>> {
    let mut frames: Vec<MaskFrame> =
        serde_json::from_str(text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    for (i, f) in frames.iter_mut().enumerate() {
        f.validate()
            .map_err(|m| Error::parse(path, 1, format!("frame {i} ({}): {m}", f.timestamp_us)))?;
        for inst in &mut f.instances {
            inst.normalize();
        }
    }
    frames.sort_by_key(|f| f.timestamp_us);
    Ok(frames)
}

pub fn serialize_masks(frames: &[MaskFrame]) -> String {
    serde_json::to_string(frames).expect("masks serialize") + "\n"
}

/// Nearest mask frame to `t_us` within `tol_us`; ties go to the earlier frame.
pub fn match_mask_to_frame(
    masks: &[MaskFrame],
    t_us: TimestampUs,
    tol_us: i64,
) -> Option<&MaskFrame> {
    let idx = masks.partition_point(|m| m.timestamp_us < t_us);
    let candidates = [idx.checked_sub(1), Some(idx)];
    candidates
        .into_iter()
        .flatten()
        .filter_map(|i| masks.get(i))
        .map(|m| ((m.timestamp_us - t_us).abs(), m))
        .filter(|(d, _)| *d <= tol_us)
        .min_by_key(|(d, m)| (*d, m.timestamp_us))
        .map(|(_, m)| m)
}

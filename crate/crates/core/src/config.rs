//! Pipeline configuration document (TOML) with a complete defaults layer.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detector::DetectorConfig;
use crate::error::{Error, Result};
use crate::mapper::MapperConfig;
use crate::tracker::TrackerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapVariantKind {
    None,
    EncOnly,
    Dilated,
    Precise,
}

impl MapVariantKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::EncOnly => "enc_only",
            Self::Dilated => "dilated",
            Self::Precise => "precise",
        }
    }
}

impl fmt::Display for MapVariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MapVariantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "enc_only" => Ok(Self::EncOnly),
            "dilated" => Ok(Self::Dilated),
            "precise" => Ok(Self::Precise),
            other => Err(Error::Config(format!(
                "unknown map variant {other:?} (expected none, enc_only, dilated or precise)"
            ))),
        }
    }
}

/// Map used to filter points at tracking time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapVariant {
    None,
    EncOnly,
    /// Precise map grown by a margin in meters.
    Dilated(f64),
    Precise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Tracking sequence and chart.
    pub data_dir: PathBuf,
    /// Sequence used for map building; `<data_dir>/mapping` when absent and
    /// present on disk, otherwise `data_dir`.
    pub mapping_dir: Option<PathBuf>,
    /// Precise map read at tracking time; `<out_dir>/map.pgm` when absent.
    pub map_file: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            mapping_dir: None,
            map_file: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map_variant: MapVariantKind,
    pub margin_m: f64,
    /// Label points with vessel masks while mapping.
    pub use_masks: bool,
    /// Greedy track-to-truth matching radius.
    pub match_radius_m: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            map_variant: MapVariantKind::Precise,
            margin_m: 2.0,
            use_masks: true,
            match_radius_m: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub scenario: String,
    /// Overrides the scenario's own seed when set.
    pub seed: Option<u64>,
    /// Probability of dropping each oracle mask instance.
    pub mask_false_negative_rate: f64,
    /// Expected spurious land masks per mask frame.
    pub mask_false_positives_per_frame: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            scenario: "kayak_undock".into(),
            seed: None,
            mask_false_negative_rate: 0.0,
            mask_false_positives_per_frame: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: PathsConfig,
    pub simulation: SimulationConfig,
    pub experiment: ExperimentConfig,
    pub mapper: MapperConfig,
    pub detector: DetectorConfig,
    pub tracker: TrackerConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(1);
            Error::parse(path, line, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        self.mapper.validate()?;
        self.detector.validate()?;
        self.tracker.validate()?;
        if !(self.experiment.margin_m >= 0.0 && self.experiment.margin_m.is_finite()) {
            return Err(Error::Config("experiment.margin_m must be >= 0".into()));
        }
        let s = &self.simulation;
        if !(0.0..=1.0).contains(&s.mask_false_negative_rate)
            || !(s.mask_false_positives_per_frame >= 0.0)
        {
            return Err(Error::Config(
                "simulation mask degradation rates out of range".into(),
            ));
        }
        if !(self.experiment.match_radius_m > 0.0) {
            return Err(Error::Config(
                "experiment.match_radius_m must be > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn map_variant(&self) -> MapVariant {
        match self.experiment.map_variant {
            MapVariantKind::None => MapVariant::None,
            MapVariantKind::EncOnly => MapVariant::EncOnly,
            MapVariantKind::Dilated => MapVariant::Dilated(self.experiment.margin_m),
            MapVariantKind::Precise => MapVariant::Precise,
        }
    }

    pub fn mapping_dir(&self) -> PathBuf {
        match &self.paths.mapping_dir {
            Some(d) => d.clone(),
            None => {
                let d = self.paths.data_dir.join(crate::simulator::MAPPING_DIR);
                if d.is_dir() {
                    d
                } else {
                    self.paths.data_dir.clone()
                }
            }
        }
    }

    pub fn map_file(&self) -> PathBuf {
        self.paths
            .map_file
            .clone()
            .unwrap_or_else(|| self.paths.out_dir.join(crate::pipeline::MAP_FILE))
    }

    /// Hash recorded in map metadata: covers the mapper section only.
    pub fn mapper_hash(&self) -> String {
        sha256_hex(
            toml::to_string(&self.mapper)
                .expect("mapper config serializes")
                .as_bytes(),
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

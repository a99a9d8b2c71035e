//! Near-shore static mapping and vessel tracking from LiDAR and camera masks.

pub mod config;
pub mod detector;
pub mod error;
pub mod evaluator;
pub mod geometry;
pub mod ingest;
pub mod map;
pub mod mapper;
pub mod morphology;
pub mod pipeline;
pub mod simulator;
pub mod svg;
pub mod tracker;

pub use error::{Error, Result};

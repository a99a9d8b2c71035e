//! Stage orchestration behind the command-line subcommands.

use std::path::Path;

use log::info;

use crate::config::{MapVariant, PipelineConfig};
use crate::detector::{detect_frame, serialize_detections, Detection};
use crate::error::{Error, Result};
use crate::evaluator::{score_map, score_tracks, ScoreReport};
use crate::geometry::interpolate_pose;
use crate::ingest::{load_enc, rasterize_enc, write_text, EncPolygonSet, SequenceBundle, ENC_FILE};
use crate::map::{read_map, write_map, BinaryMap, MapMetadata, Provenance};
use crate::mapper::{build_map, dilate_map, MapProducts, MaskUsage};
use crate::simulator::{
    builtin_scenario, degrade_masks, generate, load_scenario, load_truth, scenario_names,
    write_generated, FalsePositiveSpec, Generated, ScenarioSpec, COVERAGE_FILE, DOCKED_FILE,
    MAPPING_DIR, TRUTH_FILE, TRUTH_MAP_FILE,
};
use crate::tracker::{
    parse_tracks_csv, run_tracker, serialize_tracks, summarize, Snapshot, TrackingSummary,
};

pub const MAP_FILE: &str = "map.pgm";
pub const NAIVE_MAP_FILE: &str = "map_naive.pgm";
pub const BOUNDARY_FILE: &str = "map_boundary.geojson";
pub const DETECTIONS_FILE: &str = "detections.csv";
pub const TRACKS_FILE: &str = "tracks.csv";
pub const SUMMARY_FILE: &str = "track_summary.json";
pub const PLOT_FILE: &str = "tracks.svg";
pub const SCORES_JSON_FILE: &str = "scores.json";
pub const SCORES_CSV_FILE: &str = "scores.csv";

const DEGRADE_SEED_SALT: u64 = 0x6d61_736b;

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "missing input file {}",
            path.display()
        )))
    }
}

/// Resolves a scenario from a spec file or a built-in name, applying the
/// configured seed override.
pub fn resolve_scenario(cfg: &PipelineConfig, spec_file: Option<&Path>) -> Result<ScenarioSpec> {
    let mut spec = match spec_file {
        Some(p) => {
            require(p)?;
            load_scenario(p)?
        }
        None => builtin_scenario(&cfg.simulation.scenario).ok_or_else(|| {
            Error::Usage(format!(
                "unknown scenario {:?} (available: {})",
                cfg.simulation.scenario,
                scenario_names().join(", ")
            ))
        })?,
    };
    if let Some(seed) = cfg.simulation.seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn degrade(cfg: &PipelineConfig, g: &mut Generated, seed: u64) -> Result<()> {
    let s = &cfg.simulation;
    if s.mask_false_negative_rate == 0.0 && s.mask_false_positives_per_frame == 0.0 {
        return Ok(());
    }
    let fp = FalsePositiveSpec {
        rate_per_frame: s.mask_false_positives_per_frame,
        ..FalsePositiveSpec::default()
    };
    g.bundle.masks = degrade_masks(
        &g.bundle.masks,
        s.mask_false_negative_rate,
        &fp,
        &g.truth.land_pixels,
        seed ^ DEGRADE_SEED_SALT,
    )?;
    Ok(())
}

/// Writes the scenario into `dir` and its static mapping pass into
/// `dir/mapping`, with configured mask degradation applied to both.
pub fn simulate(cfg: &PipelineConfig, spec: &ScenarioSpec, dir: &Path) -> Result<Generated> {
    let mut g = generate(spec)?;
    degrade(cfg, &mut g, spec.seed)?;
    write_generated(dir, spec, &g)?;
    let stat = spec.static_pass();
    let mut gs = generate(&stat)?;
    degrade(cfg, &mut gs, stat.seed.wrapping_add(1))?;
    write_generated(&dir.join(MAPPING_DIR), &stat, &gs)?;
    info!(
        "simulated {}: {} frames, {} targets, {} clutter points",
        spec.name,
        g.bundle.lidar.len(),
        spec.targets.len(),
        g.truth.clutter_points
    );
    Ok(g)
}

fn load_enc_if_present(dirs: &[&Path]) -> Result<Option<EncPolygonSet>> {
    for d in dirs {
        let p = d.join(ENC_FILE);
        if p.exists() {
            return load_enc(&p).map(Some);
        }
    }
    Ok(None)
}

pub fn map_file_name(masks: MaskUsage) -> &'static str {
    match masks {
        MaskUsage::Masks => MAP_FILE,
        MaskUsage::Ignore => NAIVE_MAP_FILE,
    }
}

/// Builds the static map from the mapping sequence and writes it to the
/// output directory.
pub fn run_map(cfg: &PipelineConfig, masks: MaskUsage) -> Result<MapProducts> {
    let dir = cfg.mapping_dir();
    let bundle = SequenceBundle::load(&dir)?;
    let enc = load_enc_if_present(&[&dir, &cfg.paths.data_dir])?;
    let products = build_map(&bundle, enc.as_ref(), &cfg.mapper, masks)?;
    info!(
        "static cells: raw {}, post-morphology {}, merged {}",
        products.raw.count(),
        products.post_processed.count(),
        products.merged.count()
    );
    let out = &cfg.paths.out_dir;
    create_dir(out)?;
    let meta = MapMetadata {
        grid: bundle.grid,
        provenance: Provenance {
            config_hash: cfg.mapper_hash(),
            inputs: vec![dir.display().to_string()],
        },
    };
    write_map(&products.merged, &out.join(map_file_name(masks)), &meta)?;
    if masks == MaskUsage::Masks {
        let geo = serde_json::to_string(&products.merged.boundary_geojson())
            .expect("geojson serializes")
            + "\n";
        write_text(&out.join(BOUNDARY_FILE), &geo)?;
    }
    Ok(products)
}

/// Loads the precise map written by the map stage.
pub fn load_precise_map(cfg: &PipelineConfig) -> Result<BinaryMap> {
    let p = cfg.map_file();
    if !p.exists() {
        return Err(Error::Usage(format!(
            "map variant requires {} (run the map stage first)",
            p.display()
        )));
    }
    Ok(read_map(&p)?.0)
}

/// Point filter for the configured variant. `None` still discards returns
/// outside the grid.
pub fn filter_map(cfg: &PipelineConfig, bundle: &SequenceBundle) -> Result<BinaryMap> {
    let m = match cfg.map_variant() {
        MapVariant::None => BinaryMap::empty(bundle.grid),
        MapVariant::EncOnly => {
            let enc = load_enc_if_present(&[&cfg.paths.data_dir])?.ok_or_else(|| {
                Error::Usage(format!(
                    "enc_only variant requires {}",
                    cfg.paths.data_dir.join(ENC_FILE).display()
                ))
            })?;
            rasterize_enc(&enc, &bundle.grid)
        }
        MapVariant::Precise => load_precise_map(cfg)?,
        MapVariant::Dilated(margin) => dilate_map(&load_precise_map(cfg)?, margin)?,
    };
    if *m.grid() != bundle.grid {
        return Err(Error::GridMismatch);
    }
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct TrackRun {
    pub detections: Vec<Detection>,
    pub snapshots: Vec<Snapshot>,
    pub summary: TrackingSummary,
}

/// Detection and tracking over the data sequence in memory.
pub fn track_sequence(
    cfg: &PipelineConfig,
    bundle: &SequenceBundle,
    m: &BinaryMap,
) -> Result<TrackRun> {
    let mut detections = Vec::new();
    for frame in &bundle.lidar {
        let pose = interpolate_pose(&bundle.poses, frame.timestamp_us)?;
        detections.extend(detect_frame(frame, &pose, m, &cfg.detector));
    }
    let times: Vec<_> = bundle.lidar.iter().map(|f| f.timestamp_us).collect();
    let snapshots = run_tracker(&cfg.tracker, &times, &detections)?;
    let summary = summarize(&snapshots);
    Ok(TrackRun {
        detections,
        snapshots,
        summary,
    })
}

pub fn run_track(cfg: &PipelineConfig) -> Result<TrackRun> {
    let bundle = SequenceBundle::load(&cfg.paths.data_dir)?;
    let m = filter_map(cfg, &bundle)?;
    let run = track_sequence(cfg, &bundle, &m)?;
    info!(
        "map variant {}: {} detections, {} tracks, {} confirmed",
        cfg.experiment.map_variant,
        run.detections.len(),
        run.summary.total_track_count,
        run.summary.confirmed_track_count
    );
    let out = &cfg.paths.out_dir;
    create_dir(out)?;
    let tracks_csv = serialize_tracks(&run.snapshots);
    write_text(
        &out.join(DETECTIONS_FILE),
        &serialize_detections(&run.detections),
    )?;
    write_text(&out.join(TRACKS_FILE), &tracks_csv)?;
    let summary = serde_json::to_string_pretty(&run.summary).expect("summary serializes") + "\n";
    write_text(&out.join(SUMMARY_FILE), &summary)?;
    let rows = parse_tracks_csv(&tracks_csv, &out.join(TRACKS_FILE))?;
    let shown = (cfg.map_variant() != MapVariant::None).then_some(&m);
    write_text(
        &out.join(PLOT_FILE),
        &crate::svg::overview_svg(&bundle.grid, shown, &run.detections, &rows),
    )?;
    Ok(run)
}

/// Scores whatever stage outputs exist in the output directory. Truth comes
/// from the data directory (tracks) and the mapping directory (map).
pub fn run_eval(cfg: &PipelineConfig) -> Result<ScoreReport> {
    let out = &cfg.paths.out_dir;
    let mut report = ScoreReport::default();
    let map_path = out.join(MAP_FILE);
    if map_path.exists() {
        let truth_dir = cfg.mapping_dir();
        let (est, _) = read_map(&map_path)?;
        let truth = read_truth_map(&truth_dir.join(TRUTH_MAP_FILE))?;
        let docked = read_truth_map(&truth_dir.join(DOCKED_FILE))?;
        let coverage = read_truth_map(&truth_dir.join(COVERAGE_FILE))?;
        report.map = Some(score_map(&est, &truth, &docked, &coverage)?);
    }
    let tracks_path = out.join(TRACKS_FILE);
    if tracks_path.exists() {
        let truth_path = cfg.paths.data_dir.join(TRUTH_FILE);
        require(&truth_path)?;
        let text = std::fs::read_to_string(&tracks_path).map_err(|e| Error::io(&tracks_path, e))?;
        let rows = parse_tracks_csv(&text, &tracks_path)?;
        let truth = load_truth(&truth_path)?;
        report.tracks = Some(score_tracks(&rows, &truth, cfg.experiment.match_radius_m));
    }
    if report.map.is_none() && report.tracks.is_none() {
        return Err(Error::Usage(format!(
            "nothing to evaluate in {}",
            out.display()
        )));
    }
    create_dir(out)?;
    write_text(&out.join(SCORES_JSON_FILE), &report.to_json())?;
    write_text(&out.join(SCORES_CSV_FILE), &report.to_csv())?;
    Ok(report)
}

fn read_truth_map(p: &Path) -> Result<BinaryMap> {
    require(p)?;
    Ok(read_map(p)?.0)
}

/// Simulate into `<out>/data`, then map (with masks), track and evaluate
/// into `<out>`.
pub fn run_pipeline(cfg: &PipelineConfig, spec_file: Option<&Path>) -> Result<ScoreReport> {
    let spec = resolve_scenario(cfg, spec_file)?;
    let mut cfg = cfg.clone();
    cfg.paths.data_dir = cfg.paths.out_dir.join("data");
    cfg.paths.mapping_dir = None;
    cfg.paths.map_file = None;
    simulate(&cfg, &spec, &cfg.paths.data_dir)?;
    run_map(&cfg, MaskUsage::Masks)?;
    run_track(&cfg)?;
    run_eval(&cfg)
}

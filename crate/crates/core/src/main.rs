use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nearshore::config::{MapVariantKind, PipelineConfig};
use nearshore::mapper::MaskUsage;
use nearshore::pipeline;
use nearshore::{Error, Result};

#[derive(Parser)]
#[command(
    name = "nearshore",
    version,
    about = "Harbor LiDAR mapping and vessel tracking"
)]
struct Cli {
    /// Pipeline configuration (TOML). Defaults apply to absent keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (for `simulate`, the data directory to write).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Built-in scenario name.
    #[arg(long)]
    scenario: Option<String>,
    /// Scenario specification file (JSON); takes precedence over --scenario.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Probability of dropping each oracle mask instance.
    #[arg(long)]
    mask_fn_rate: Option<f64>,
    /// Expected spurious land masks per mask frame.
    #[arg(long)]
    mask_fp_per_frame: Option<f64>,
}

#[derive(Args)]
struct VariantArgs {
    #[arg(long, value_parser = parse_variant)]
    map_variant: Option<MapVariantKind>,
    /// Dilation margin in meters for the dilated variant.
    #[arg(long)]
    margin: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario's sensor data and ground truth.
    Simulate(ScenarioArgs),
    /// Build the static map from the mapping sequence.
    Map {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        mapping: Option<PathBuf>,
        /// Naive accumulation: ignore vessel masks.
        #[arg(long)]
        no_masks: bool,
    },
    /// Detect and track targets with the selected map variant.
    Track {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Precise map raster (defaults to `<out>/map.pgm`).
        #[arg(long)]
        map: Option<PathBuf>,
        #[command(flatten)]
        variant: VariantArgs,
    },
    /// Score map and tracks against ground truth.
    Eval {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long)]
        match_radius: Option<f64>,
    },
    /// simulate, map, track and eval in one run.
    Pipeline {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        variant: VariantArgs,
    },
}

fn parse_variant(s: &str) -> std::result::Result<MapVariantKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn apply_scenario(cfg: &mut PipelineConfig, a: &ScenarioArgs) {
    if let Some(s) = &a.scenario {
        cfg.simulation.scenario = s.clone();
    }
    if let Some(r) = a.mask_fn_rate {
        cfg.simulation.mask_false_negative_rate = r;
    }
    if let Some(r) = a.mask_fp_per_frame {
        cfg.simulation.mask_false_positives_per_frame = r;
    }
}

fn apply_variant(cfg: &mut PipelineConfig, a: &VariantArgs) {
    if let Some(v) = a.map_variant {
        cfg.experiment.map_variant = v;
    }
    if let Some(m) = a.margin {
        cfg.experiment.margin_m = m;
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) if !p.exists() => {
            return Err(Error::Usage(format!(
                "config file {} not found",
                p.display()
            )))
        }
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.simulation.seed = cli.seed;
    }
    if let Some(o) = &cli.out {
        cfg.paths.out_dir = o.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let mut cfg = load_config(cli)?;
    match &cli.command {
        Command::Simulate(a) => {
            apply_scenario(&mut cfg, a);
            cfg.validate()?;
            let spec = pipeline::resolve_scenario(&cfg, a.spec.as_deref())?;
            let dir = cli
                .out
                .clone()
                .unwrap_or_else(|| cfg.paths.data_dir.clone());
            let g = pipeline::simulate(&cfg, &spec, &dir)?;
            let n_points: usize = g.bundle.lidar.iter().map(|f| f.points.len()).sum();
            println!(
                "scenario {} seed {}: {} frames, {} points, {} targets, {} clutter points -> {}",
                spec.name,
                spec.seed,
                g.bundle.lidar.len(),
                n_points,
                spec.targets.len(),
                g.truth.clutter_points,
                dir.display()
            );
        }
        Command::Map {
            data,
            mapping,
            no_masks,
        } => {
            if let Some(d) = data {
                cfg.paths.data_dir = d.clone();
            }
            if let Some(m) = mapping {
                cfg.paths.mapping_dir = Some(m.clone());
            }
            if *no_masks {
                cfg.experiment.use_masks = false;
            }
            cfg.validate()?;
            let usage = if cfg.experiment.use_masks {
                MaskUsage::Masks
            } else {
                MaskUsage::Ignore
            };
            let p = pipeline::run_map(&cfg, usage)?;
            println!(
                "static cells: raw {}, post-morphology {}, merged {} -> {}",
                p.raw.count(),
                p.post_processed.count(),
                p.merged.count(),
                cfg.paths
                    .out_dir
                    .join(pipeline::map_file_name(usage))
                    .display()
            );
        }
        Command::Track { data, map, variant } => {
            if let Some(d) = data {
                cfg.paths.data_dir = d.clone();
            }
            if let Some(m) = map {
                cfg.paths.map_file = Some(m.clone());
            }
            apply_variant(&mut cfg, variant);
            cfg.validate()?;
            let r = pipeline::run_track(&cfg)?;
            println!(
                "map variant {}: {} detections, {} tracks, {} confirmed",
                cfg.experiment.map_variant,
                r.detections.len(),
                r.summary.total_track_count,
                r.summary.confirmed_track_count
            );
        }
        Command::Eval {
            data,
            mapping,
            match_radius,
        } => {
            if let Some(d) = data {
                cfg.paths.data_dir = d.clone();
            }
            if let Some(m) = mapping {
                cfg.paths.mapping_dir = Some(m.clone());
            }
            if let Some(r) = match_radius {
                cfg.experiment.match_radius_m = *r;
            }
            cfg.validate()?;
            print!("{}", pipeline::run_eval(&cfg)?.to_csv());
        }
        Command::Pipeline { scenario, variant } => {
            apply_scenario(&mut cfg, scenario);
            apply_variant(&mut cfg, variant);
            cfg.validate()?;
            print!(
                "{}",
                pipeline::run_pipeline(&cfg, scenario.spec.as_deref())?.to_csv()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

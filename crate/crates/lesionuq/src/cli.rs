//! Command-line surface over [`crate::pipeline`].

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use lesionuq_core::render::{Panel, RenderConfig, Scale};
use lesionuq_core::simulate::{NoiseMode, SimulatorConfig};
use lesionuq_core::stats::{BootstrapMethod, Statistic};
use lesionuq_core::{AggregationConfig, Normalization};

use crate::config::{parse_key, parse_list, FileConfig};
use crate::error::{Error, Result};
use crate::pipeline::{self, AnalyzeOptions, CorrOptions, FitOptions, Layout, RenderOptions, Selection};

#[derive(Debug, Parser)]
#[command(name = "lesionuq", version, about = "Region-based Monte Carlo segmentation uncertainty analysis")]
pub struct Cli {
    /// JSON file with default values for any flag.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for per-image work [default: available cores].
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Directory holding every pipeline artifact [default: out].
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic corpus of stacks and masks.
    Simulate(SimulateArgs),
    /// Aggregate stacks and score them: metrics.csv, region_uncertainty.csv.
    Analyze(AnalyzeArgs),
    /// Fit the regression suite: fits.json.
    Fit(FitArgs),
    /// Spearman correlations and bootstrap intervals.
    Corr(CorrArgs),
    /// Draw mask and heatmap panels as PPM.
    Render(RenderArgs),
    /// Collect every table into report.md.
    Report,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Images per class.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_parser = NoiseMode::from_str)]
    pub noise_mode: Option<NoiseMode>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Monte Carlo iterations per stack.
    #[arg(long)]
    pub alpha: Option<usize>,
    /// Comma-separated noise scales to draw from.
    #[arg(long, value_delimiter = ',')]
    pub noise_grid: Option<Vec<f64>>,
    /// Noise multipliers for melanoma, nevus, seborrheic keratosis.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub class_noise_multipliers: Option<Vec<f64>>,
    #[arg(long)]
    pub boundary_width: Option<f64>,
    #[arg(long)]
    pub sharpness: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AggregationArgs {
    /// Mean probability a pixel must exceed to be lesion.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_name = "Q")]
    pub percentile_high: Option<f64>,
    #[arg(long, value_name = "Q")]
    pub percentile_low: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// [default: <out>/manifest.jsonl]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub aggregation: AggregationArgs,
    #[arg(long, value_parser = Normalization::from_str)]
    pub normalization: Option<Normalization>,
    /// Write each uncertainty map to maps/<id>.uqs.
    #[arg(long)]
    pub save_maps: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Fit on a seeded random share of the rows.
    #[arg(long)]
    pub fit_fraction: Option<f64>,
    /// Add Spearman rho columns to the printed table.
    #[arg(long)]
    pub corr: bool,
}

#[derive(Debug, Args)]
pub struct CorrArgs {
    #[arg(long)]
    pub n_sims: Option<usize>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long, value_parser = BootstrapMethod::from_str)]
    pub bootstrap_method: Option<BootstrapMethod>,
    /// Comma-separated: median, mean.
    #[arg(long, value_delimiter = ',', value_parser = Statistic::from_str)]
    pub statistics: Option<Vec<Statistic>>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub aggregation: AggregationArgs,
    /// `auto` (per-image maximum) or `fixed:<max>`.
    #[arg(long, value_parser = Scale::from_str)]
    pub scale: Option<Scale>,
    /// Comma-separated panel order.
    #[arg(long, value_delimiter = ',', value_parser = Panel::from_str)]
    pub panels: Option<Vec<Panel>>,
    #[arg(long)]
    pub upscale: Option<usize>,
    /// Images per class to draw [default: 1].
    #[arg(long, conflicts_with_all = ["ids", "all"])]
    pub per_class: Option<usize>,
    /// Comma-separated image ids to draw.
    #[arg(long, value_delimiter = ',', conflicts_with = "all")]
    pub ids: Option<Vec<String>>,
    /// Draw every image.
    #[arg(long)]
    pub all: bool,
}

/// Global settings after merging flags, config file and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Globals {
    pub seed: u64,
    pub jobs: usize,
    pub out: PathBuf,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn aggregation(args: &AggregationArgs, file: &FileConfig) -> Result<AggregationConfig> {
    let d = AggregationConfig::default();
    AggregationConfig::new(
        args.threshold.or(file.threshold).unwrap_or(d.threshold()),
        args.percentile_high.or(file.percentile_high).unwrap_or(d.percentile_high()),
        args.percentile_low.or(file.percentile_low).unwrap_or(d.percentile_low()),
    )
    .map_err(|e| Error::Config(e.to_string()))
}

fn manifest_path(flag: &Option<PathBuf>, file: &FileConfig, g: &Globals) -> PathBuf {
    flag.clone().or_else(|| file.manifest.clone()).unwrap_or_else(|| Layout::new(&g.out).manifest())
}

pub fn simulator_config(args: &SimulateArgs, file: &FileConfig, seed: u64) -> Result<SimulatorConfig> {
    let d = SimulatorConfig::default();
    let multipliers = match &args.class_noise_multipliers {
        Some(v) => [v[0], v[1], v[2]],
        None => file.class_noise_multipliers.unwrap_or(d.class_noise_multipliers),
    };
    Ok(SimulatorConfig {
        width: args.width.or(file.width).unwrap_or(d.width),
        height: args.height.or(file.height).unwrap_or(d.height),
        alpha: args.alpha.or(file.alpha).unwrap_or(d.alpha),
        n_per_class: args.n.or(file.n).unwrap_or(d.n_per_class),
        noise_mode: args.noise_mode.or(parse_key("noise_mode", file.noise_mode.as_ref())?).unwrap_or(d.noise_mode),
        noise_grid: args.noise_grid.clone().or_else(|| file.noise_grid.clone()).unwrap_or(d.noise_grid),
        class_noise_multipliers: multipliers,
        boundary_width: args.boundary_width.or(file.boundary_width).unwrap_or(d.boundary_width),
        sharpness: args.sharpness.or(file.sharpness).unwrap_or(d.sharpness),
        seed,
    })
}

pub fn analyze_options(args: &AnalyzeArgs, file: &FileConfig) -> Result<AnalyzeOptions> {
    Ok(AnalyzeOptions {
        aggregation: aggregation(&args.aggregation, file)?,
        normalization: args
            .normalization
            .or(parse_key("normalization", file.normalization.as_ref())?)
            .unwrap_or_default(),
        save_maps: args.save_maps || file.save_maps.unwrap_or(false),
    })
}

pub fn corr_options(args: &CorrArgs, file: &FileConfig, seed: u64) -> Result<CorrOptions> {
    let d = CorrOptions::default();
    Ok(CorrOptions {
        statistics: match &args.statistics {
            Some(s) => s.clone(),
            None => parse_list("statistics", file.statistics.as_ref())?.unwrap_or(d.statistics),
        },
        n_sims: args.n_sims.or(file.n_sims).unwrap_or(d.n_sims),
        level: args.level.or(file.level).unwrap_or(d.level),
        method: args
            .bootstrap_method
            .or(parse_key("bootstrap_method", file.bootstrap_method.as_ref())?)
            .unwrap_or(d.method),
        seed,
    })
}

pub fn render_options(args: &RenderArgs, file: &FileConfig) -> Result<RenderOptions> {
    let d = RenderConfig::default();
    let panels = match &args.panels {
        Some(p) => p.clone(),
        None => parse_list("panels", file.panels.as_ref())?.unwrap_or(d.panels),
    };
    let selection = if args.all {
        Selection::All
    } else if let Some(ids) = args.ids.clone().or_else(|| file.ids.clone()) {
        Selection::Ids(ids)
    } else {
        Selection::PerClass(args.per_class.or(file.per_class).unwrap_or(1))
    };
    Ok(RenderOptions {
        render: RenderConfig {
            scale: args.scale.or(parse_key("scale", file.scale.as_ref())?).unwrap_or(d.scale),
            panels,
            upscale: args.upscale.or(file.upscale).unwrap_or(d.upscale),
        },
        aggregation: aggregation(&args.aggregation, file)?,
        selection,
    })
}

/// Runs one subcommand.
pub fn run(cli: &Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let g = Globals {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        jobs: cli.jobs.or(file.jobs).unwrap_or_else(default_jobs),
        out: cli.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("out")),
    };
    let out: &Path = &g.out;
    match &cli.command {
        Command::Simulate(args) => {
            let cfg = simulator_config(args, &file, g.seed)?;
            let result = pipeline::simulate(&cfg, out, g.jobs)?;
            println!("{}", result.manifest.display());
        }
        Command::Analyze(args) => {
            let opts = analyze_options(args, &file)?;
            let result = pipeline::analyze(&manifest_path(&args.manifest, &file, &g), out, &opts, g.jobs)?;
            println!("analysed {} images", result.rows);
            if let Some((_, first)) = result.failures.into_iter().next() {
                return Err(first);
            }
        }
        Command::Fit(args) => {
            let opts = FitOptions { fit_fraction: args.fit_fraction.or(file.fit_fraction).unwrap_or(1.0), seed: g.seed };
            let fits = pipeline::fit(out, &opts)?;
            let correlations = if args.corr { Some(pipeline::fitted_correlations(out, &fits)?) } else { None };
            print!("{}", pipeline::fit_table(&fits, correlations.as_deref()));
        }
        Command::Corr(args) => {
            let opts = corr_options(args, &file, g.seed)?;
            pipeline::corr(out, &opts, g.jobs)?;
            println!("{}", Layout::new(out).file(pipeline::CORRELATIONS).display());
        }
        Command::Render(args) => {
            let opts = render_options(args, &file)?;
            let written = pipeline::render(&manifest_path(&args.manifest, &file, &g), out, &opts, g.jobs)?;
            println!("rendered {} images", written.len());
        }
        Command::Report => {
            println!("{}", pipeline::report(out)?.display());
        }
    }
    Ok(())
}

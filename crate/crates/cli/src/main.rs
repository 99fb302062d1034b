//! chirp-concord: chirp-feature outlier detection and SOZ concordance.
//!
//! Subcommands compose through files in the output directory:
//! `detect` → `match` → `report` → `viz` reproduces a monolithic `run`
//! byte-for-byte for the files they share. `synth` writes seeded fixtures
//! in the same input formats the pipeline reads.
//!
//! Exit codes: 0 ok, 1 input error, 2 empty cohort, 64 usage.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use chirp_concord::ingest::{write_chirp_table, write_clinical};
use chirp_concord::lof::LofConfig;
use chirp_concord::pipeline::{self, EmitConfig, RunConfig, RunSummary};
use chirp_concord::synth::{generate_fixture, SynthSpec};
use chirp_concord::vizdata::FeatureKind;
use chirp_concord::{Error, Result};

#[derive(Parser)]
#[command(
    name = "chirp-concord",
    version,
    about = "Chirp-feature outlier detection and seizure-onset-zone concordance"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: detection, concordance, cohort tables and emissions.
    Run(RunArgs),
    /// Detection only: write per-patient feature and LOF dumps.
    Detect(DetectArgs),
    /// Concordance from precomputed LOF dumps.
    Match(MatchArgs),
    /// Cohort tables from an existing concordance.csv.
    Report(ReportArgs),
    /// Plot-ready emissions from inputs plus earlier stage outputs.
    Viz(VizArgs),
    /// Generate a seeded synthetic cohort with planted outliers.
    Synth(SynthArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Chirp annotation table (CSV).
    #[arg(long)]
    chirps: PathBuf,
    /// Clinical metadata (JSON).
    #[arg(long)]
    clinical: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalysisArgs {
    /// LOF neighborhood size.
    #[arg(long, default_value_t = 20)]
    k: usize,
    /// Flagged-outlier fraction, in (0, 0.5].
    #[arg(long, default_value_t = 0.2)]
    contamination: f64,
    /// Drop events with R² below this floor (events without R² are kept).
    #[arg(long)]
    r2_min: Option<f64>,
}

#[derive(Args)]
struct EmitArgs {
    /// Also render SVGs for grids and heatmaps.
    #[arg(long)]
    svg: bool,
    /// Additionally emit per-event 3D embeddings.
    #[arg(long)]
    per_event_embedding: bool,
    /// Min-max scale radial radii to [0, 1].
    #[arg(long)]
    radial_scaled: bool,
    /// Radial feature kinds to emit.
    #[arg(long, value_delimiter = ',',
          default_values_t = ["duration".to_string(), "start_freq".to_string(),
                              "end_freq".to_string(), "bandwidth".to_string(),
                              "slope".to_string()])]
    radial_kinds: Vec<String>,
}

impl EmitArgs {
    fn to_emit_config(&self) -> Result<EmitConfig> {
        let mut kinds = Vec::new();
        for name in &self.radial_kinds {
            kinds.push(FeatureKind::parse(name).ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown radial kind `{name}` (expected duration, start_freq, end_freq, bandwidth or slope)"
                ))
            })?);
        }
        Ok(EmitConfig {
            grids: true,
            embeddings: true,
            radial_kinds: kinds,
            radial_scaled: self.radial_scaled,
            svg: self.svg,
            per_event_embeddings: self.per_event_embedding,
        })
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    analysis: AnalysisArgs,
    /// Clinical features for cohort grouping.
    #[arg(long, value_delimiter = ',',
          default_values_t = ["outcome".to_string(), "post_op_progress".to_string()])]
    group_by: Vec<String>,
    #[command(flatten)]
    emit: EmitArgs,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    analysis: AnalysisArgs,
}

#[derive(Args)]
struct MatchArgs {
    /// Clinical metadata (JSON).
    #[arg(long)]
    clinical: PathBuf,
    /// Directory holding lof_*.csv dumps; concordance.csv is written here.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Clinical metadata (JSON).
    #[arg(long)]
    clinical: PathBuf,
    /// Directory holding concordance.csv; cohort tables are written here.
    #[arg(long)]
    out: PathBuf,
    /// Clinical features for cohort grouping.
    #[arg(long, value_delimiter = ',',
          default_values_t = ["outcome".to_string(), "post_op_progress".to_string()])]
    group_by: Vec<String>,
}

#[derive(Args)]
struct VizArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Drop events with R² below this floor (must match the detect run).
    #[arg(long)]
    r2_min: Option<f64>,
    #[command(flatten)]
    emit: EmitArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for chirps.csv and clinical.json.
    #[arg(long)]
    out: PathBuf,
    /// Base RNG seed; per-patient seeds derive from it.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Number of patients in the fixture.
    #[arg(long, default_value_t = 1)]
    patients: usize,
    /// Inlier channels per patient.
    #[arg(long, default_value_t = 20)]
    inliers: usize,
    /// Planted outlier channels per patient (these become the SOZ).
    #[arg(long, default_value_t = 5)]
    outliers: usize,
    /// Outlier displacement in units of the inlier spread.
    #[arg(long, default_value_t = 10.0)]
    displacement: f64,
    /// Chirp events per channel.
    #[arg(long, default_value_t = 8)]
    events_per_channel: usize,
    /// Inlier center: start_freq_hz,end_freq_hz,duration_s.
    #[arg(long, value_delimiter = ',', num_args = 3,
          default_values_t = [10.0, 18.0, 2.0])]
    center: Vec<f64>,
    /// Inlier spread per feature.
    #[arg(long, value_delimiter = ',', num_args = 3,
          default_values_t = [0.8, 0.9, 0.25])]
    spread: Vec<f64>,
    /// Electrode prefixes cycled when naming channels.
    #[arg(long, value_delimiter = ',',
          default_values_t = ["LAT".to_string(), "LAH".to_string(),
                              "PD".to_string(), "ATT".to_string()])]
    prefixes: Vec<String>,
}

fn run_synth(args: &SynthArgs) -> Result<RunSummary> {
    let spec = SynthSpec::<f64> {
        seed: args.seed,
        n_inlier_channels: args.inliers,
        n_outlier_channels: args.outliers,
        inlier_center: [args.center[0], args.center[1], args.center[2]],
        inlier_spread: [args.spread[0], args.spread[1], args.spread[2]],
        outlier_displacement_sigmas: args.displacement,
        events_per_channel: args.events_per_channel,
        label_scheme: args.prefixes.clone(),
    };
    for (i, s) in spec.inlier_spread.iter().enumerate() {
        if *s <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "spread component {i} must be positive, got {s}"
            )));
        }
    }
    let (events, clinical, warnings) = generate_fixture(&spec, args.patients);
    std::fs::create_dir_all(&args.out).map_err(|source| Error::WriteFile {
        path: args.out.clone(),
        source,
    })?;
    let mut files = Vec::new();
    for (name, content) in [
        ("chirps.csv", write_chirp_table(&events)),
        ("clinical.json", write_clinical(&clinical)),
    ] {
        let path = args.out.join(name);
        std::fs::write(&path, content).map_err(|source| Error::WriteFile {
            path: path.clone(),
            source,
        })?;
        files.push(path);
    }
    Ok(RunSummary { warnings, files })
}

fn to_run_config(input: &InputArgs, analysis: &AnalysisArgs) -> Result<RunConfig<f64>> {
    let mut config = RunConfig::new(&input.chirps, &input.clinical, &input.out);
    config.lof = LofConfig::new(analysis.k, analysis.contamination)?;
    config.r2_min = analysis.r2_min;
    Ok(config)
}

fn execute(cli: &Cli) -> Result<RunSummary> {
    match &cli.command {
        Command::Run(args) => {
            let mut config = to_run_config(&args.input, &args.analysis)?;
            config.group_by = args.group_by.clone();
            config.emit = args.emit.to_emit_config()?;
            pipeline::run_pipeline(&config)
        }
        Command::Detect(args) => {
            let config = to_run_config(&args.input, &args.analysis)?;
            pipeline::run_detect(&config)
        }
        Command::Match(args) => pipeline::run_match::<f64>(&args.clinical, &args.out),
        Command::Report(args) => {
            pipeline::run_report::<f64>(&args.clinical, &args.out, &args.group_by)
        }
        Command::Viz(args) => {
            let mut config =
                RunConfig::<f64>::new(&args.input.chirps, &args.input.clinical, &args.input.out);
            config.r2_min = args.r2_min;
            config.emit = args.emit.to_emit_config()?;
            pipeline::run_viz(&config)
        }
        Command::Synth(args) => run_synth(args),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            for warning in &summary.warnings {
                eprintln!("warning: {warning}");
            }
            println!("wrote {} file(s)", summary.files.len());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

//! `farfield`: synthesize scenes, evaluate and fuse detections, and analyze
//! far-field visibility from the command line.
//!
//! Exit codes: 0 on success, 2 on usage or input validation errors, 1 on
//! internal errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

#[derive(Debug, Parser)]
#[command(name = "farfield", version, about = "Far-field 3D detection evaluation and late fusion")]
pub struct Cli {
    /// Seed for synthesis and sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Also print the primary output to stdout.
    #[arg(long, global = true)]
    pub stdout: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic scenes and simulated lidar and camera detections.
    Synth(SynthArgs),
    /// Score detection sets against scene annotations.
    Evaluate(EvaluateArgs),
    /// Fuse lidar and camera detection sets.
    Fuse(FuseArgs),
    /// Zero-lidar statistics and per-annotation occlusion verdicts.
    Visibility(VisibilityArgs),
    /// Annotation density by distance and a random frame sample per scene.
    Audit(AuditArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub num_scenes: Option<usize>,
    #[arg(long)]
    pub frames_per_scene: Option<usize>,
    /// Mean number of objects per scene.
    #[arg(long)]
    pub objects_per_scene: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    /// Mean AP over 0.5, 1, 2 and 4 m.
    Default,
    Fixed4,
    Linear,
    Quadratic,
    Elliptical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GtModeArg {
    DropAllZeroLidar,
    IncludeUnoccludedZeroLidar,
    IncludeAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ApModeArg {
    FullArea,
    Nuscenes,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub scenes: Option<PathBuf>,
    /// Detection file, optionally labelled as NAME=PATH. Repeat to compare methods.
    #[arg(long, value_parser = config::parse_named_path)]
    pub dets: Vec<config::NamedPath>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Distance bands as MIN-MAX pairs, e.g. 0-50,50-80.
    #[arg(long, value_parser = config::parse_bands)]
    pub bands: Option<config::BandList>,
    #[arg(long, value_enum)]
    pub gt_mode: Option<GtModeArg>,
    #[arg(long, value_enum)]
    pub ap_mode: Option<ApModeArg>,
    #[arg(long)]
    pub max_range: Option<f64>,
    /// Comma-separated class names.
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<farfield::ClassId>>,
    /// Cap each class at its legacy evaluation range.
    #[arg(long)]
    pub legacy_ranges: bool,
    /// Skip invalid detection records instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Nms,
    Adanms,
    Distance,
    Bayes,
    Clocs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FarSourceArg {
    Nms,
    Adanms,
    Camera,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IouKindArg {
    Bev,
    #[value(name = "3d")]
    ThreeD,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[arg(long)]
    pub scenes: Option<PathBuf>,
    #[arg(long)]
    pub lidar: Option<PathBuf>,
    #[arg(long)]
    pub camera: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Fixed NMS IoU threshold.
    #[arg(long)]
    pub iou: Option<f64>,
    #[arg(long)]
    pub d1: Option<f64>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub d2: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// Distance gate in meters, applied to every class.
    #[arg(long)]
    pub tc: Option<f64>,
    /// Source of detections beyond the distance gate.
    #[arg(long, value_enum)]
    pub far_source: Option<FarSourceArg>,
    /// IoU above which cross-modality detections pair for score fusion.
    #[arg(long)]
    pub pair_iou: Option<f64>,
    /// Logistic scorer as six comma-separated numbers: five weights, then the bias.
    #[arg(long, value_parser = config::parse_weights, allow_hyphen_values = true)]
    pub scorer_weights: Option<[f64; 6]>,
    #[arg(long, value_enum)]
    pub iou_kind: Option<IouKindArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountModeArg {
    Current,
    TenSweep,
}

#[derive(Debug, Args)]
pub struct VisibilityArgs {
    #[arg(long)]
    pub scenes: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<CountModeArg>,
    #[arg(long, value_parser = config::parse_bands)]
    pub bands: Option<config::BandList>,
    #[arg(long)]
    pub max_range: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub scenes: Option<PathBuf>,
    /// Frames to sample per scene.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long)]
    pub bin_width: Option<f64>,
    #[arg(long)]
    pub max_range: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}

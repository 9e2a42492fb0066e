//! `tactslip` command-line tool.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage or configuration error,
//! 3 input/output error, 4 degenerate initial contact, 5 threshold violated.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tactslip::{Error, Estimator, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "tactslip",
    version,
    about = "Rotational slip estimation from tactile contact masks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a raw frame against a no-contact reference and write the mask.
    Segment(SegmentArgs),
    /// Orientation of the largest region of one mask (or raw frame).
    Angle(AngleArgs),
    /// Track slip over a directory of numbered frames, a batch of
    /// directories, or a length-prefixed PGM stream on stdin.
    Track(TrackArgs),
    /// Dice/IoU between predicted and ground-truth mask directories.
    EvalSeg(EvalSegArgs),
    /// Rotational error of track CSVs against ground-truth CSVs.
    EvalSlip(EvalSlipArgs),
    /// Generate a synthetic sequence or a full campaign corpus.
    Synth(SynthArgs),
    /// Per-stage and end-to-end latency on a synthetic frame.
    Bench(BenchArgs),
}

/// Pipeline settings. Flags override `--config`, which overrides defaults.
#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// Manifest file with `key = value` settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// skeleton, pca or ellipse.
    #[arg(long)]
    estimator: Option<Estimator>,
    #[arg(long)]
    circularity_threshold: Option<f64>,
    #[arg(long)]
    min_area: Option<u64>,
    /// Minimum absolute difference for a contact pixel.
    #[arg(long)]
    threshold: Option<u8>,
    #[arg(long)]
    open_radius: Option<usize>,
    #[arg(long)]
    close_radius: Option<usize>,
    /// Moving-average window over the slip signal (0 = off).
    #[arg(long)]
    smoothing_window: Option<usize>,
    /// Print the effective configuration manifest and exit.
    #[arg(long)]
    print_config: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> tactslip::Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let entries = tactslip::io::read_manifest(path)?;
                PipelineConfig::from_entries(entries.iter().map(|(k, v)| (k.as_str(), v.as_str())))?
            }
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.estimator {
            cfg.estimator = v;
        }
        if let Some(v) = self.circularity_threshold {
            cfg.circularity_threshold = v;
        }
        if let Some(v) = self.min_area {
            cfg.min_area = v;
        }
        if let Some(v) = self.threshold {
            cfg.segment.threshold = v;
        }
        if let Some(v) = self.open_radius {
            cfg.segment.open_radius = v;
        }
        if let Some(v) = self.close_radius {
            cfg.segment.close_radius = v;
        }
        if let Some(v) = self.smoothing_window {
            cfg.smoothing_window = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SegmentArgs {
    /// Raw tactile frame (PGM).
    frame: PathBuf,
    /// No-contact reference frame (PGM).
    #[arg(long)]
    reference: PathBuf,
    /// Output mask (PGM).
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct AngleArgs {
    /// Mask (PGM, >= 128 is contact), or a raw frame when `--reference` is set.
    input: PathBuf,
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Also write the skeleton of the largest region (PGM).
    #[arg(long)]
    skeleton: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct TrackArgs {
    /// Directory of numbered frames (00000.pgm, 00001.pgm, ...).
    #[arg(required_unless_present_any = ["stdin", "batch", "print_config"], conflicts_with_all = ["stdin", "batch"])]
    input: Option<PathBuf>,
    /// Read a length-prefixed PGM stream from stdin and print one row per frame.
    #[arg(long, conflicts_with = "batch")]
    stdin: bool,
    /// Track every directory below this root that holds numbered frames.
    #[arg(long)]
    batch: Option<PathBuf>,
    /// Batch mode: write `<rel>/track.csv` here instead of into each sequence directory.
    #[arg(long, requires = "batch")]
    out_root: Option<PathBuf>,
    /// Reference frame for raw input. In batch mode, a file name inside each sequence directory.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Track CSV destination (default stdout).
    #[arg(long, short, conflicts_with = "batch")]
    out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvalSegArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Per-pair CSV destination.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Fail (exit 5) when the mean Dice is below this.
    #[arg(long)]
    min_dice: Option<f64>,
    /// Fail (exit 5) when the mean IoU is below this.
    #[arg(long)]
    min_iou: Option<f64>,
}

#[derive(Args)]
struct EvalSlipArgs {
    /// Root holding `<object>/<trial>/track.csv`.
    #[arg(long)]
    pred: PathBuf,
    /// Root holding `<object>/<trial>/truth.csv` (may equal `--pred`).
    #[arg(long)]
    truth: PathBuf,
    /// Per-trial CSV destination.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Fail (exit 5) when any object's per-frame mean error exceeds this.
    #[arg(long)]
    max_mean_deg: Option<f64>,
    /// Fail (exit 5) when any object's final-angle mean error exceeds this.
    #[arg(long)]
    max_final_deg: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
    /// Write the built-in 9-object campaign (one directory per object and seed).
    #[arg(long)]
    campaign: bool,
    /// Campaign trials per object (seeds 1..=N).
    #[arg(long, default_value_t = 5)]
    trials: u64,
    /// capsule, rectangle, ellipse or disc.
    #[arg(long, default_value = "capsule")]
    shape: String,
    #[arg(long, default_value_t = 60.0)]
    length: f64,
    #[arg(long, default_value_t = 24.0)]
    width: f64,
    #[arg(long, default_value_t = 320)]
    canvas_width: usize,
    #[arg(long, default_value_t = 240)]
    canvas_height: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    start_deg: f64,
    #[arg(long, default_value_t = 40.0, allow_hyphen_values = true)]
    end_deg: f64,
    #[arg(long, default_value_t = 1.0)]
    step_deg: f64,
    /// Boundary flip probability.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Global salt-and-pepper flip probability.
    #[arg(long, default_value_t = 0.0)]
    salt_pepper: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write raw grey frames brightened by this much over a reference, with masks in `masks/`.
    #[arg(long)]
    gray: Option<u8>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 320)]
    width: usize,
    #[arg(long, default_value_t = 240)]
    height: usize,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 10)]
    warmup: usize,
    /// Fail (exit 5) when the end-to-end median exceeds this many milliseconds.
    #[arg(long)]
    budget_ms: Option<f64>,
    /// Per-stage CSV destination.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

/// Failure of a command: a library error or a violated threshold.
enum Failure {
    Lib(Error),
    Threshold(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::DegenerateInitialContact => 4,
        Error::Config(_)
        | Error::InvalidShape(_)
        | Error::ShapeOutsideCanvas
        | Error::ZeroRadius
        | Error::InvalidDimensions { .. } => 2,
        Error::Io { .. }
        | Error::Format { .. }
        | Error::Csv(_)
        | Error::Unmatched(_)
        | Error::MissingFrame(_)
        | Error::NoComparableFrames
        | Error::DimensionMismatch { .. }
        | Error::BufferLength { .. }
        | Error::NonMonotonicFrame { .. } => 3,
        Error::ThinningIterationCap { .. } => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Segment(a) => commands::segment(a),
        Command::Angle(a) => commands::angle(a),
        Command::Track(a) => commands::track(a),
        Command::EvalSeg(a) => commands::eval_seg(a),
        Command::EvalSlip(a) => commands::eval_slip(a),
        Command::Synth(a) => commands::synth(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Threshold(msg)) => {
            eprintln!("threshold violated: {msg}");
            ExitCode::from(5)
        }
    }
}

//! `vcr`: generate corruption test sets, measure visual change, estimate and
//! compare robustness curves.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data errors. Data goes
//! to files or standard output; logs go to standard error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vcr_core::metrics::Property;

#[derive(Parser)]
#[command(name = "vcr", version, about = "Visually-continuous corruption robustness toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corrupt a corpus into a test set (images + manifest.jsonl)
    Generate(GenerateArgs),
    /// Print the visual change between an original and a corrupted image
    DeltaV(DeltaVArgs),
    /// Report how evenly a manifest covers the visual change range
    Coverage(CoverageArgs),
    /// Estimate VCR from a manifest and a subject's predictions
    Estimate(EstimateArgs),
    /// Compare a model report against a human report (HMRI, MRSI)
    Compare(CompareArgs),
    /// Decide visual similarity from distinguishability trials or curve bands
    Similar(SimilarArgs),
    /// Merge report curves into one CSV for plotting
    PlotData(PlotDataArgs),
}

#[derive(Args)]
struct VifArgs {
    /// VIF scales
    #[arg(long, default_value_t = 4)]
    vif_scales: u32,
    /// Variance of the visual noise model
    #[arg(long, default_value_t = 2.0)]
    vif_sigma_nsq: f64,
}

#[derive(Args)]
struct GenerateArgs {
    /// Directory of source images (.png, .ppm, .pgm)
    #[arg(long)]
    corpus: PathBuf,
    /// Built-in corruption name
    #[arg(long)]
    corruption: Option<String>,
    /// JSON corruption spec overriding the parameter domains
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Number of samples
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    vif: VifArgs,
}

#[derive(Args)]
struct DeltaVArgs {
    original: PathBuf,
    corrupted: PathBuf,
    #[command(flatten)]
    vif: VifArgs,
}

#[derive(Args)]
struct CoverageArgs {
    manifest: PathBuf,
    #[arg(long, default_value_t = 40)]
    bins: usize,
    #[arg(long, default_value_t = 20)]
    min_per_bin: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    /// Visual change bins (M)
    #[arg(long, default_value_t = 40)]
    bins: usize,
    /// Minimum observations for a bin to count (L)
    #[arg(long, default_value_t = 20)]
    min_per_bin: u64,
    /// Confidence level of the per-bin band
    #[arg(long, default_value_t = 0.83)]
    level: f64,
    /// Pin the curve at v = 1: a value in [0, 1] or `chance`
    #[arg(long)]
    anchor_right: Option<String>,
    /// Value at v = 0: `auto` (clean accuracy / 1 for consistency), `none`, or a number
    #[arg(long, default_value = "auto")]
    anchor_left: String,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// CSV `sample_id,label`, optionally followed by an `image_id,label` section
    #[arg(long)]
    predictions: PathBuf,
    /// Separate clean-image predictions, `image_id,label`
    #[arg(long)]
    clean: Option<PathBuf>,
    /// Ground truth `image_id,label` (accuracy only)
    #[arg(long)]
    truth: Option<PathBuf>,
    /// CSV `fine_label,entry_label`
    #[arg(long)]
    label_map: Option<PathBuf>,
    #[arg(long, default_value_t = Property::Accuracy)]
    property: Property,
    /// Subject name (defaults to the predictions file stem)
    #[arg(long)]
    subject: Option<String>,
    #[command(flatten)]
    curve: CurveArgs,
    /// Report JSON path (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Curve CSV path (default: the report path with a .csv extension)
    #[arg(long)]
    curve_out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Reference (human) report
    human: PathBuf,
    /// Model report
    model: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimilarArgs {
    /// Trials CSV `corruption_a,corruption_b,n,k`
    #[arg(long, conflicts_with = "curves", required_unless_present = "curves")]
    trials: Option<PathBuf>,
    /// Two curve CSVs with bands
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    curves: Option<Vec<PathBuf>>,
    /// Smallest visual change considered by the curve overlap check
    #[arg(long, default_value_t = 0.0)]
    v_min: f64,
    /// p-value at or above which a pair counts as indistinguishable
    #[arg(long, default_value_t = vcr_core::similarity::DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotDataArgs {
    /// VCR report JSON files
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failures split by exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
}

impl From<vcr_core::Error> for Failure {
    fn from(e: vcr_core::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::DeltaV(a) => commands::delta_v(a),
        Command::Coverage(a) => commands::coverage(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Compare(a) => commands::compare(a),
        Command::Similar(a) => commands::similar(a),
        Command::PlotData(a) => commands::plot_data(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

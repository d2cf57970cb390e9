//! `tablesieve`: classify HTML tables as genuine or layout.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 external tool error.

mod artifacts;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Context;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "tablesieve", version, about = "Genuine vs. layout web table classification")]
struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized step; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one table per page from WARC archives into a manifest.
    Ingest(IngestArgs),
    /// Render manifest tables to PNG images with the external renderer.
    Render(RenderArgs),
    /// Compute HTML or visual feature CSVs.
    Featurize(FeaturizeArgs),
    /// Assign stratified train/val/test splits to labeled manifest entries.
    Split(SplitArgs),
    /// Train a random forest or MLP on feature CSVs.
    Train(TrainArgs),
    /// Write predictions for feature rows or rendered images.
    Classify(ClassifyArgs),
    /// Score prediction files against gold labels.
    Evaluate(EvaluateArgs),
    /// Generate a labeled synthetic corpus.
    Synth(SynthArgs),
    /// Write a small random-weight ONNX model with a backbone's tap layout.
    StubModel(StubModelArgs),
}

#[derive(Args)]
pub struct IngestArgs {
    /// WARC files, optionally gzip-compressed.
    #[arg(required = true)]
    pub warcs: Vec<PathBuf>,
    /// Output manifest (`dataset.jsonl`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep tables whose text is not detected as English.
    #[arg(long)]
    pub keep_non_english: bool,
}

#[derive(Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Image directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the updated manifest here instead of in place.
    #[arg(long)]
    pub out_manifest: Option<PathBuf>,
    #[arg(long)]
    pub render_timeout_secs: Option<f64>,
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Download linked stylesheets and images before rendering.
    #[arg(long)]
    pub fetch_assets: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureKind {
    Html,
    VisualTop,
    VisualAll,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Html => "html",
            FeatureKind::VisualTop => "visual-top",
            FeatureKind::VisualAll => "visual-all",
        }
    }
}

#[derive(Args)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: FeatureKind,
    /// Configured model name or path to a `model.json` (visual kinds).
    #[arg(long)]
    pub model: Option<String>,
    /// Output CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep only the k features chosen by correlation-based selection.
    #[arg(long)]
    pub cfs: Option<usize>,
}

#[derive(Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub test_frac: f64,
    #[arg(long, default_value_t = 0.0)]
    pub val_frac: f64,
    /// Write the updated manifest here instead of in place.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierKind {
    Rf,
    Mlp,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Feature CSVs; several files are joined on id into one joint vector.
    #[arg(long, required = true, num_args = 1..)]
    pub features: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "rf")]
    pub classifier: ClassifierKind,
    /// `dwtc-retrained` or `dwtc-original` for rf, `mlp-joint` for mlp.
    #[arg(long)]
    pub preset: Option<String>,
    /// Manifest whose splits select training (and validation) rows.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// html, visual_top, visual_all or joint; inferred when omitted.
    #[arg(long)]
    pub scope: Option<String>,
    /// Model file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ClassifyArgs {
    /// Model file written by `train`.
    #[arg(long, conflicts_with = "visual_model")]
    pub model: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    pub features: Vec<PathBuf>,
    /// Classify rendered images with a CNN head instead (needs --manifest).
    #[arg(long)]
    pub visual_model: Option<String>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Label tables containing nested tables as layout (HTML models only).
    #[arg(long)]
    pub nested_default_layout: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Predictions CSV; repeat to compare classifiers.
    #[arg(long = "pred", required = true)]
    pub preds: Vec<PathBuf>,
    /// Gold labels: a manifest (`.jsonl`) or an `id,label` CSV.
    #[arg(long)]
    pub gold: PathBuf,
    /// Restrict gold entries of a manifest to one split.
    #[arg(long)]
    pub split: Option<String>,
    /// Directory for report.csv and mcnemar.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n_genuine: usize,
    #[arg(long)]
    pub n_layout: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackboneArg {
    Vgg16,
    Resnet50,
}

#[derive(Args)]
pub struct StubModelArgs {
    #[arg(long, value_enum)]
    pub backbone: BackboneArg,
    /// Fixed head output in (0, 1).
    #[arg(long)]
    pub constant_probability: Option<f32>,
    #[arg(long)]
    pub out: PathBuf,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Context::load(cli.config.as_deref(), cli.seed)?;
    match cli.command {
        Command::Ingest(a) => commands::ingest::run(&ctx, a),
        Command::Render(a) => commands::render::run(&ctx, a),
        Command::Featurize(a) => commands::featurize::run(&ctx, a),
        Command::Split(a) => commands::split::run(&ctx, a),
        Command::Train(a) => commands::train::run(&ctx, a),
        Command::Classify(a) => commands::classify::run(&ctx, a),
        Command::Evaluate(a) => commands::evaluate::run(&ctx, a),
        Command::Synth(a) => commands::synth::run(&ctx, a),
        Command::StubModel(a) => commands::synth::stub_model(&ctx, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

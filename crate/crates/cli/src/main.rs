//! `swipegan`: corpus synthesis, GAN training and transfer, recognizer
//! training and evaluation, composition experiments and rendering.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status 2: bad flags, config or inputs. Exit status 1: anything else.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    /// Classifies a library error raised while processing the given flag.
    pub fn from_core(context: &str, e: swipegan::Error) -> Self {
        use swipegan::Error as E;
        let message = format!("{context}: {e}");
        match e {
            E::Io(_) => CliError::runtime(message),
            _ => CliError::validation(message),
        }
    }
}

#[derive(Parser)]
#[command(name = "swipegan", version, about = "Swipe-keyboard path synthesis, style transfer and recognition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    Synthetic,
    User,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a corpus of spline or user-style paths.
    Synth(SynthArgs),
    /// Train the generator, discriminator and classifier.
    TrainGan(TrainGanArgs),
    /// Map every path of a corpus through a trained generator.
    Transfer(TransferArgs),
    /// Train a recognizer on one or more corpora.
    TrainRec(TrainRecArgs),
    /// Top-1 accuracy of a recognizer on a test corpus.
    Eval(EvalArgs),
    /// Train and evaluate one recognizer per training composition.
    Compositions(CompositionsArgs),
    /// Fit the log-log learning-curve slope to `size,error` rows.
    Curve(CurveArgs),
    /// Draw one path over its keyboard as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    /// Keyboard layout JSON (default: built-in QWERTY).
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// One word per line.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub per_word: Option<usize>,
    #[arg(long, value_enum, default_value = "user")]
    pub mode: Mode,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Points per path.
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct TrainGanArgs {
    #[arg(long)]
    pub synthetic: PathBuf,
    #[arg(long)]
    pub user: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for the checkpoint and loss curves.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub pretrain_epochs: Option<usize>,
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
}

#[derive(Args)]
pub struct TransferArgs {
    /// GAN checkpoint written by `train-gan`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for the generator's latent noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct TrainRecArgs {
    /// Training corpus; repeat to mix several.
    #[arg(long = "train", required = true)]
    pub train: Vec<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Recognizer checkpoint written by `train-rec`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write the accuracy as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CompositionsArgs {
    /// JSON array of `{"label", "user", "synthetic", "gan"}` objects.
    #[arg(long)]
    pub specs: PathBuf,
    #[arg(long)]
    pub user: Option<PathBuf>,
    #[arg(long)]
    pub synthetic: Option<PathBuf>,
    #[arg(long)]
    pub gan: Option<PathBuf>,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct CurveArgs {
    /// CSV of `size,error` rows.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RenderArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long)]
    pub layout: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::TrainGan(a) => commands::train_gan(a),
        Command::Transfer(a) => commands::transfer(a),
        Command::TrainRec(a) => commands::train_rec(a),
        Command::Eval(a) => commands::eval(a),
        Command::Compositions(a) => commands::compositions(a),
        Command::Curve(a) => commands::curve(a),
        Command::Render(a) => commands::render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

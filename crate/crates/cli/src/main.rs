//! Command-line frontend: each subcommand is a thin wrapper around one
//! library pipeline.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O error, 4 model/data error.

mod commands;
mod config;
mod registry;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

use clearwave_core::error::Error;

#[derive(Parser)]
#[command(
    name = "clearwave",
    about = "Speech enhancement, scene conversion, and model adaptation toolkit",
    version
)]
struct Cli {
    /// key=value file presetting any flag (flags win over the file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhance a noisy WAV with one of the three methods.
    Enhance(commands::EnhanceArgs),
    /// Train a spectral or waveform enhancer from noisy/clean pairs.
    Train(commands::TrainArgs),
    /// Fine-tune a registered model on recorded noise/speaker audio.
    Adapt(commands::AdaptArgs),
    /// Convert the acoustic scene: enhance, then remix with a new noise.
    Convert(commands::ConvertArgs),
    /// Mix one speech file with one noise file at an exact SNR.
    Mix(commands::MixArgs),
    /// Synthesize a noisy/clean corpus with a replayable manifest.
    Synth(commands::SynthArgs),
    /// Score processed speech (STOI, segmental SNR) and build a report.
    Eval(commands::EvalArgs),
    /// Export a spectrogram raster and dB CSV for a WAV.
    Spectrogram(commands::SpectrogramArgs),
}

/// Failure classes mapped to process exit codes.
pub enum CliError {
    Usage(String),
    Io(String),
    Model(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Model(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Model(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let msg = err.to_string();
        match err {
            Error::IoFailure { .. }
            | Error::MalformedWav { .. }
            | Error::UnsupportedSampleRate { .. }
            | Error::UnsupportedEncoding { .. } => CliError::Io(msg),
            Error::InvalidConfig(_) => CliError::Usage(msg),
            _ => CliError::Model(msg),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let cfg = match config::ConfigMap::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(m) => {
            eprintln!("error: {m}");
            std::process::exit(2);
        }
    };
    let result = match cli.command {
        Command::Enhance(args) => commands::cmd_enhance(args, &cfg),
        Command::Train(args) => commands::cmd_train(args, &cfg),
        Command::Adapt(args) => commands::cmd_adapt(args, &cfg),
        Command::Convert(args) => commands::cmd_convert(args, &cfg),
        Command::Mix(args) => commands::cmd_mix(args, &cfg),
        Command::Synth(args) => commands::cmd_synth(args, &cfg),
        Command::Eval(args) => commands::cmd_eval(args, &cfg),
        Command::Spectrogram(args) => commands::cmd_spectrogram(args, &cfg),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}

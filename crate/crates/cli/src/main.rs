use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sunsky_cli::commands::{changedetect, decompose, metrics, skymerge, synth};
use sunsky_cli::{error_exit_code, Outcome};

/// Sun/sky intrinsic decomposition of outdoor imagery.
///
/// Exit status: 0 success, 1 partial failure, 2 configuration error.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Log verbosity (error, warn, info, debug, trace); RUST_LOG also works.
    #[arg(long, global = true, default_value = "info")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover albedo, shading and confidence for every image in a manifest.
    Decompose(decompose::DecomposeArgs),
    /// Merge a fisheye exposure stack into an equirectangular sky dome.
    Skymerge(skymerge::SkymergeArgs),
    /// Detect changes between albedo images from a fixed camera.
    Changedetect(changedetect::ChangedetectArgs),
    /// PSNR and SSIM against ground truth.
    Metrics(metrics::MetricsArgs),
    /// Generate a synthetic scene with full ground truth.
    Synth(synth::SynthArgs),
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Decompose(args) => decompose::run_decompose(&args.resolve()?),
        Command::Skymerge(args) => skymerge::run_skymerge(args),
        Command::Changedetect(args) => changedetect::run_changedetect(args),
        Command::Metrics(args) => metrics::run_metrics(args),
        Command::Synth(args) => synth::run_synth(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(&cli.log_level)).init();
    match run(&cli) {
        Ok(outcome) => {
            if outcome.failed > 0 {
                log::warn!("{} of {} items failed", outcome.failed, outcome.failed + outcome.succeeded);
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}

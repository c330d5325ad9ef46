use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mirror_pr_cli::config::ExperimentKind;
use mirror_pr_cli::run_experiment;

/// Phase retrieval via mirror descent: experiment runner.
#[derive(Parser)]
#[command(name = "mirror-pr", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file (flat key = value with [section] headers).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Recover 1-D signals from Gaussian intensity measurements;
    /// writes one iteration-trace CSV per trial.
    Reconstruct1d(RunArgs),
    /// Success-rate grid over (n, m) for MD-random, MD-spectral, and
    /// WF-spectral; writes phasediagram.csv.
    Phasediagram(RunArgs),
    /// Recover a grayscale image from coded diffraction patterns;
    /// writes the recovered PGM and a JSON summary.
    Cdpimage(RunArgs),
    /// Check the expected landscape: critical points, region covering, and
    /// Hessian concentration; writes landscape_report.txt.
    LandscapeVerify(RunArgs),
    /// Evaluate the noise assumption and convergence constants for one
    /// (truth, noise) draw; writes assumption_report.txt.
    CheckAssumption(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Reconstruct1d(a) => (ExperimentKind::Reconstruct1d, a),
        Command::Phasediagram(a) => (ExperimentKind::Phasediagram, a),
        Command::Cdpimage(a) => (ExperimentKind::Cdpimage, a),
        Command::LandscapeVerify(a) => (ExperimentKind::LandscapeVerify, a),
        Command::CheckAssumption(a) => (ExperimentKind::CheckAssumption, a),
    };
    match run_experiment(kind, &args.config, args.seed, args.out.clone()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

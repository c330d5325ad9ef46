//! Experiment runner for the mirror-descent phase-retrieval library.
//!
//! Everything the `mirror-pr` binary does lives here so integration tests
//! can drive experiments in-process: config parsing ([`config`]), PGM image
//! I/O ([`pgm`]), output formatting ([`report`]), and the five experiment
//! runners ([`experiments`]).

// Validation guards are written `!(x > 0.0)` on purpose: unlike `x <= 0.0`
// they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::path::{Path, PathBuf};

use mirror_pr_core::CoreError;

pub mod config;
pub mod experiments;
pub mod pgm;
pub mod report;

/// Process-level error classification; the binary maps each variant to an
/// exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unusable configuration (bad file, unknown key, out-of-range value):
    /// exit code 2.
    Config(String),
    /// Filesystem trouble writing results: exit code 1.
    Io(String),
    /// The computation itself failed (non-finite values, stalled
    /// backtracking, violated noise assumption, ...): exit code 3.
    Numerical(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
            CliError::Numerical(e) => write!(f, "numerical error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            // parameter values flow straight from the config file
            CoreError::InvalidParameter { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

/// Read and parse a config file.
pub fn load_config(path: &Path) -> Result<config::RawConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(config::RawConfig::parse(&text)?)
}

/// Run one experiment end to end. `seed`/`out` override the corresponding
/// config keys when present.
pub fn run_experiment(
    kind: config::ExperimentKind,
    config_path: &Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let raw = load_config(config_path)?;
    match kind {
        config::ExperimentKind::Reconstruct1d => {
            let cfg = config::Reconstruct1dCfg::parse(&raw, seed, out)?;
            let outcomes = experiments::reconstruct1d::run(&cfg)?;
            for o in &outcomes {
                match o.final_rel_error {
                    Some(rel) => println!(
                        "trial {}: f = {:.3e}, rel_error = {:.3e} -> {}",
                        o.trial,
                        o.final_f,
                        rel,
                        o.csv_path.display()
                    ),
                    None => println!(
                        "trial {}: f = {:.3e} -> {}",
                        o.trial,
                        o.final_f,
                        o.csv_path.display()
                    ),
                }
            }
        }
        config::ExperimentKind::Phasediagram => {
            let cfg = config::PhasediagramCfg::parse(&raw, seed, out)?;
            let path = experiments::phasediagram::run(&cfg)?;
            println!("phase diagram -> {}", path.display());
        }
        config::ExperimentKind::Cdpimage => {
            let cfg = config::CdpimageCfg::parse(&raw, seed, out)?;
            let outcome = experiments::cdpimage::run(&cfg)?;
            println!(
                "{{\n  \"rel_error\": {},\n  \"iterations\": {}\n}}",
                report::fmt_float(outcome.rel_error),
                outcome.iterations
            );
            println!("recovered image -> {}", outcome.recovered_path.display());
        }
        config::ExperimentKind::LandscapeVerify => {
            let cfg = config::LandscapeVerifyCfg::parse(&raw, seed, out)?;
            let outcome = experiments::landscape_verify::run(&cfg)?;
            if !outcome.pass {
                return Err(CliError::Numerical(CoreError::SnrViolated(
                    "landscape verification reported a failing check (see report)".into(),
                )));
            }
        }
        config::ExperimentKind::CheckAssumption => {
            let cfg = config::CheckAssumptionCfg::parse(&raw, seed, out)?;
            experiments::check_assumption::run(&cfg)?;
        }
    }
    Ok(())
}

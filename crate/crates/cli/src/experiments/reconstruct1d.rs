//! 1-D signal recovery: a batch of independent trials on Gaussian sensing,
//! each writing one iteration-trace CSV.

use std::path::PathBuf;

use mirror_pr_core::solver::{self, SolverTrace};

use super::{
    default_gamma_gaussian, gaussian_instance, init_seed, instance_seed, random_init,
    spectral_start, Algorithm,
};
use crate::config::{AlgorithmKind, InitKind, Reconstruct1dCfg};
use crate::report::{self, trace_to_csv};
use crate::CliError;

pub struct TrialOutcome {
    pub trial: usize,
    pub csv_path: PathBuf,
    pub final_f: f64,
    pub final_rel_error: Option<f64>,
}

/// Run one trial and return its trace (shared by the CLI runner and tests).
pub fn run_trial(cfg: &Reconstruct1dCfg, trial: usize) -> Result<SolverTrace, CliError> {
    let n = cfg.n;
    let m = cfg.effective_m();
    let iseed = instance_seed(cfg.common.seed, n, m, trial);
    let meas = gaussian_instance(n, m, &cfg.noise, iseed)?;

    let alg = match (cfg.algorithm, cfg.init) {
        (AlgorithmKind::MirrorDescent, InitKind::Random) => Algorithm::MdRandom,
        (AlgorithmKind::MirrorDescent, InitKind::Spectral) => Algorithm::MdSpectral,
        (AlgorithmKind::WirtingerFlow, InitKind::Spectral) => Algorithm::WfSpectral,
        (AlgorithmKind::WirtingerFlow, InitKind::Random) => Algorithm::WfRandom,
    };
    let iseed_init = init_seed(cfg.common.seed, n, m, trial, alg);
    let x0 = match cfg.init {
        InitKind::Random => random_init(n, iseed_init),
        InitKind::Spectral => spectral_start(&meas, cfg.power_iters, iseed_init)?,
    };

    let solver_cfg = cfg.solver.to_config(default_gamma_gaussian(cfg.noise.mean));
    let trace = match cfg.algorithm {
        AlgorithmKind::MirrorDescent => solver::mirror_descent(&meas, &x0, &solver_cfg)?,
        AlgorithmKind::WirtingerFlow => solver::wirtinger_flow(&meas, &x0, &solver_cfg)?,
    };
    Ok(trace)
}

pub fn run(cfg: &Reconstruct1dCfg) -> Result<Vec<TrialOutcome>, CliError> {
    let mut outcomes = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials {
        let trace = run_trial(cfg, trial)?;
        let csv_path = cfg.common.out.join(format!("reconstruct1d_trial{trial}.csv"));
        report::write_text(&csv_path, &trace_to_csv(&trace))
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", csv_path.display())))?;
        outcomes.push(TrialOutcome {
            trial,
            csv_path,
            final_f: *trace.f_values.last().expect("trace has at least x0"),
            final_rel_error: trace.final_rel_error(),
        });
    }
    Ok(outcomes)
}

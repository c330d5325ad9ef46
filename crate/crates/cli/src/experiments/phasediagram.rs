//! Phase diagram: success fraction over an (n, m) grid for three
//! algorithm/initialization pairs sharing each problem instance.
//!
//! Cells are evaluated in parallel; the output CSV is sorted by
//! (n, m, algorithm) so it is byte-identical regardless of scheduling.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;

use mirror_pr_core::metrics;
use mirror_pr_core::solver::{self, SolverConfig, StepPolicy};
use mirror_pr_core::CoreError;

use super::{
    gaussian_instance, init_seed, instance_seed, instance_threshold, random_init, spectral_start,
    Algorithm,
};
use crate::config::PhasediagramCfg;
use crate::report::{self, GridCell};
use crate::CliError;

pub const ALGORITHMS: [Algorithm; 3] = [
    Algorithm::MdRandom,
    Algorithm::MdSpectral,
    Algorithm::WfSpectral,
];

/// One (instance, algorithm) result.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub algorithm: Algorithm,
    pub n: usize,
    pub m: usize,
    pub trial: usize,
    pub rel_error: f64,
    pub success: bool,
}

fn run_cell(cfg: &PhasediagramCfg, n: usize, m: usize, trial: usize) -> Result<Vec<TrialRecord>, CliError> {
    let iseed = instance_seed(cfg.common.seed, n, m, trial);
    let meas = gaussian_instance(n, m, &cfg.noise, iseed)?;
    let threshold = instance_threshold(&meas);
    let truth = meas.truth.as_ref().expect("gaussian_instance stores truth");

    // The diagram sweeps deep into the under-sampled regime, where no
    // single constant step is stable; the line search adapts L_k per cell.
    let md_cfg = SolverConfig {
        step_policy: StepPolicy::backtracking(),
        max_iters: cfg.max_iters,
        grad_tol: 0.0,
        record_every: cfg.max_iters.max(1),
    };
    let wf_cfg = SolverConfig {
        // backtracking tag selects the WF ramp schedule
        step_policy: StepPolicy::backtracking(),
        ..md_cfg
    };

    let mut records = Vec::with_capacity(ALGORITHMS.len());
    for alg in ALGORITHMS {
        let seed_i = init_seed(cfg.common.seed, n, m, trial, alg);
        let x0 = match alg {
            Algorithm::MdRandom => random_init(n, seed_i),
            Algorithm::MdSpectral | Algorithm::WfSpectral => {
                spectral_start(&meas, cfg.power_iters, seed_i)?
            }
            Algorithm::WfRandom => unreachable!("not part of the phase diagram"),
        };
        let result = match alg {
            Algorithm::MdRandom | Algorithm::MdSpectral => {
                solver::mirror_descent(&meas, &x0, &md_cfg)
            }
            Algorithm::WfSpectral | Algorithm::WfRandom => {
                solver::wirtinger_flow(&meas, &x0, &wf_cfg)
            }
        };
        let (rel_error, success) = match result {
            Ok(trace) => {
                let rep = metrics::evaluate(&trace.final_x, truth, threshold)
                    .expect("final iterate has the instance dimension");
                (rep.rel_error, rep.success)
            }
            // divergence on an under-sampled cell is a graded failure,
            // not a reason to abort the grid
            Err(CoreError::NonFinite { .. }) | Err(CoreError::BacktrackingStalled { .. }) => {
                (f64::INFINITY, false)
            }
            Err(e) => return Err(e.into()),
        };
        records.push(TrialRecord {
            algorithm: alg,
            n,
            m,
            trial,
            rel_error,
            success,
        });
    }
    Ok(records)
}

/// Run the whole grid and return per-trial records (unaggregated).
pub fn run_grid(cfg: &PhasediagramCfg) -> Result<Vec<TrialRecord>, CliError> {
    let mut tasks = Vec::new();
    for &n in &cfg.n_grid {
        for m in cfg.m_axis.ms_for(n) {
            for trial in 0..cfg.trials {
                tasks.push((n, m, trial));
            }
        }
    }
    let results: Vec<Result<Vec<TrialRecord>, CliError>> = tasks
        .par_iter()
        .map(|&(n, m, trial)| run_cell(cfg, n, m, trial))
        .collect();
    let mut records = Vec::with_capacity(results.len() * ALGORITHMS.len());
    for r in results {
        records.extend(r?);
    }
    Ok(records)
}

/// Aggregate per-trial records into one cell per (n, m, algorithm).
pub fn aggregate(records: &[TrialRecord]) -> Vec<GridCell> {
    let mut groups: BTreeMap<(usize, usize, &'static str), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.n, r.m, r.algorithm.name()))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((n, m, algorithm), rs)| {
            let rels: Vec<f64> = rs.iter().map(|r| r.rel_error).collect();
            GridCell {
                algorithm: algorithm.to_string(),
                n,
                m,
                trials: rs.len(),
                successes: rs.iter().filter(|r| r.success).count(),
                median_rel_error: report::median(&rels),
            }
        })
        .collect()
}

pub fn run(cfg: &PhasediagramCfg) -> Result<PathBuf, CliError> {
    let records = run_grid(cfg)?;
    let mut cells = aggregate(&records);
    let csv = report::grid_to_csv(&mut cells);
    let path = cfg.common.out.join("phasediagram.csv");
    report::write_text(&path, &csv)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

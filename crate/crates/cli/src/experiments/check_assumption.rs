//! Desk check of the noise assumption: draw a (truth, noise) pair at the
//! configured sizes, evaluate the admissibility conditions, and report the
//! resulting convergence constants as `key = value` lines.

use std::path::PathBuf;

use mirror_pr_core::landscape::{self, LandscapeParams, SnrReport};
use mirror_pr_core::rng::{self, Stream};
use mirror_pr_core::CoreError;

use crate::config::CheckAssumptionCfg;
use crate::report::{self, fmt_float};
use crate::CliError;

pub struct AssumptionOutcome {
    pub snr: SnrReport,
    /// Present only when the assumption holds and the radii are positive.
    pub params: Option<LandscapeParams>,
    pub report_path: PathBuf,
}

pub fn run(cfg: &CheckAssumptionCfg) -> Result<AssumptionOutcome, CliError> {
    let iseed = rng::mix(&[cfg.common.seed, cfg.n as u64, cfg.m as u64]);
    let truth = {
        let mut r = rng::substream(iseed, Stream::Truth);
        rng::unit_sphere_vector(cfg.n, &mut r) * cfg.truth_norm
    };
    let eps = cfg.noise.to_spec(iseed).draw(cfg.m)?;

    let snr = landscape::snr_check(&truth, &eps, cfg.lambda)?;

    // A failed SNR check is a *finding*, not an error; only parameter misuse
    // (bad lambda/varrho/kappa) aborts.
    let params = if snr.pass {
        match landscape::convergence_params(&truth, &eps, cfg.lambda, cfg.varrho, cfg.kappa, cfg.m)
        {
            Ok(p) => Some(p),
            Err(CoreError::SnrViolated(_)) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };

    let mut text = String::new();
    text.push_str(&format!("n = {}\n", cfg.n));
    text.push_str(&format!("m = {}\n", cfg.m));
    text.push_str(&format!("truth_norm = {}\n", fmt_float(cfg.truth_norm)));
    text.push_str(&format!("lambda = {}\n", fmt_float(snr.lambda)));
    text.push_str(&format!("eps_mean = {}\n", fmt_float(snr.eps_mean)));
    text.push_str(&format!("eps_inf = {}\n", fmt_float(snr.eps_inf)));
    text.push_str(&format!("c_s_actual = {}\n", fmt_float(snr.c_s_actual)));
    text.push_str(&format!("c_s_limit = {}\n", fmt_float(snr.c_s_limit)));
    text.push_str(&format!("mean_ok = {}\n", snr.mean_ok));
    text.push_str(&format!("inf_ok = {}\n", snr.inf_ok));
    text.push_str(&format!("assumption_holds = {}\n", snr.pass));
    text.push_str(&format!(
        "dist_argmin_bound = {}\n",
        fmt_float(landscape::dist_argmin_bound(&eps, &truth, cfg.m))
    ));
    match &params {
        Some(p) => {
            text.push_str(&format!("sigma = {}\n", fmt_float(p.sigma)));
            text.push_str(&format!("rho = {}\n", fmt_float(p.rho)));
            text.push_str(&format!("r = {}\n", fmt_float(p.r)));
            text.push_str(&format!("l = {}\n", fmt_float(p.l)));
            text.push_str(&format!("nu = {}\n", fmt_float(p.nu)));
            text.push_str(&format!("varsigma = {}\n", fmt_float(p.varsigma)));
            text.push_str(&format!("theta_rho = {}\n", fmt_float(p.theta_rho)));
        }
        None => {
            text.push_str("params_available = false\n");
        }
    }

    let report_path = cfg.common.out.join("assumption_report.txt");
    report::write_text(&report_path, &text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", report_path.display())))?;
    print!("{text}");

    Ok(AssumptionOutcome {
        snr,
        params,
        report_path,
    })
}

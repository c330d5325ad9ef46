//! Image recovery from coded diffraction patterns: flatten a grayscale
//! image to a 1-D signal, measure it through P masked DFTs, recover with
//! spectrally-initialized mirror descent, and write the result back as PGM.

use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::DVector;

use mirror_pr_core::rng;
use mirror_pr_core::sensing;
use mirror_pr_core::solver::{self, SolverTrace};

use super::{default_gamma_cdp, spectral_start, Algorithm};
use crate::config::CdpimageCfg;
use crate::pgm::{self, GrayImage};
use crate::report::{self, fmt_float};
use crate::CliError;

pub struct CdpOutcome {
    pub rel_error: f64,
    pub iterations: usize,
    pub recovered_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Recover the (possibly synthetic) image; returns the trace plus the
/// source image so callers can post-process.
pub fn recover(cfg: &CdpimageCfg) -> Result<(SolverTrace, GrayImage), CliError> {
    let img = match &cfg.image {
        Some(path) => pgm::read_path(path).map_err(|e| CliError::Config(e.to_string()))?,
        None => pgm::synthetic_image(),
    };
    let n = img.len();
    let truth = DVector::from_vec(img.pixels.clone());

    let iseed = rng::mix(&[cfg.common.seed, n as u64, cfg.p as u64, 0]);
    let ensemble = Arc::new(sensing::cdp_ensemble(n, cfg.p, iseed)?);
    let meas = sensing::measure(ensemble, &truth, &cfg.noise.to_spec(iseed))?;

    let seed_init = rng::mix(&[
        cfg.common.seed,
        n as u64,
        cfg.p as u64,
        0,
        Algorithm::MdSpectral.id(),
    ]);
    let x0 = spectral_start(&meas, cfg.power_iters, seed_init)?;

    let solver_cfg = cfg.solver.to_config(default_gamma_cdp(cfg.noise.mean));
    let trace = solver::mirror_descent(&meas, &x0, &solver_cfg)?;
    Ok((trace, img))
}

pub fn run(cfg: &CdpimageCfg) -> Result<CdpOutcome, CliError> {
    let (trace, img) = recover(cfg)?;
    let truth = DVector::from_vec(img.pixels.clone());

    // resolve the global sign before writing the image back out
    let mut recovered = trace.final_x.clone();
    if recovered.dot(&truth) < 0.0 {
        recovered.neg_mut();
    }
    let out_img = GrayImage {
        width: img.width,
        height: img.height,
        maxval: img.maxval,
        format: img.format,
        pixels: recovered.iter().copied().collect(),
    };
    let recovered_path = cfg.common.out.join("cdp_recovered.pgm");
    if let Some(parent) = recovered_path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", parent.display())))?;
    }
    pgm::write_path(&recovered_path, &out_img).map_err(|e| CliError::Io(e.to_string()))?;

    let rel_error = trace
        .final_rel_error()
        .expect("measurement set carries the truth");
    let iterations = trace.iterations_run;
    let summary = format!(
        "{{\n  \"rel_error\": {},\n  \"iterations\": {}\n}}\n",
        fmt_float(rel_error),
        iterations
    );
    let summary_path = cfg.common.out.join("cdp_summary.json");
    report::write_text(&summary_path, &summary)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", summary_path.display())))?;

    Ok(CdpOutcome {
        rel_error,
        iterations,
        recovered_path,
        summary_path,
    })
}

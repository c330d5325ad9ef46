//! Landscape verification: check the closed-form critical catalogue, the
//! four-region covering, and Monte-Carlo concentration of the sample
//! Hessian around its expectation.

use std::path::PathBuf;

use nalgebra::{DVector, SymmetricEigen};
use rand::Rng;

use mirror_pr_core::landscape::{self, CoveringReport};
use mirror_pr_core::objective::{self, ExpectedModel};
use mirror_pr_core::rng::{self, Stream};

use super::{gaussian_instance, instance_seed};
use crate::config::{LandscapeVerifyCfg, NoiseCfg, NoiseModelKind};
use crate::report::{self, fmt_float};
use crate::CliError;

pub struct CatalogueCheck {
    pub origin_grad_norm: f64,
    pub minimizer_grad_norm: f64,
    pub saddle_grad_norm_max: f64,
    pub origin_hessian_max_eig: f64,
    pub minimizer_hessian_min_eig: f64,
    pub saddle_ascent_curvature_min: f64,
    pub saddle_descent_curvature_max: f64,
    pub pass: bool,
}

/// Tolerance for the closed-form critical points: their expected gradient
/// should vanish to numerical precision.
pub const CATALOGUE_GRAD_TOL: f64 = 1e-10;

pub fn check_catalogue(
    truth: &DVector<f64>,
    eps_mean: f64,
    saddle_samples: usize,
    seed: u64,
) -> Result<CatalogueCheck, CliError> {
    let catalogue = landscape::critical_catalogue(truth, eps_mean)?;
    let model = ExpectedModel::new(truth.clone(), eps_mean, 0.0)?;

    let grad_at = |x: &DVector<f64>| objective::expected_grad(&model, x).norm();
    let origin_grad_norm = grad_at(&catalogue.origin);
    let minimizer_grad_norm = catalogue.minimizers.iter().map(&grad_at).fold(0.0, f64::max);

    let hess_origin = objective::expected_hessian(&model, &catalogue.origin);
    let origin_hessian_max_eig = SymmetricEigen::new(hess_origin)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let hess_min = objective::expected_hessian(&model, &catalogue.minimizers[0]);
    let minimizer_hessian_min_eig = SymmetricEigen::new(hess_min)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);

    let saddles = catalogue.sample_saddles(saddle_samples, seed);
    let mut saddle_grad_norm_max: f64 = 0.0;
    let mut saddle_ascent_curvature_min = f64::INFINITY;
    let mut saddle_descent_curvature_max = f64::NEG_INFINITY;
    for s in &saddles {
        saddle_grad_norm_max = saddle_grad_norm_max.max(grad_at(s));
        let h = objective::expected_hessian(&model, s);
        let along = (s.transpose() * &h * s)[(0, 0)] / s.norm_squared();
        let toward = (truth.transpose() * &h * truth)[(0, 0)] / truth.norm_squared();
        saddle_ascent_curvature_min = saddle_ascent_curvature_min.min(along);
        saddle_descent_curvature_max = saddle_descent_curvature_max.max(toward);
    }
    if saddles.is_empty() {
        saddle_ascent_curvature_min = f64::NAN;
        saddle_descent_curvature_max = f64::NAN;
    }

    let pass = origin_grad_norm <= CATALOGUE_GRAD_TOL
        && minimizer_grad_norm <= CATALOGUE_GRAD_TOL
        && saddle_grad_norm_max <= CATALOGUE_GRAD_TOL
        && origin_hessian_max_eig < 0.0
        && minimizer_hessian_min_eig > 0.0
        && (saddles.is_empty()
            || (saddle_ascent_curvature_min > 0.0 && saddle_descent_curvature_max < 0.0));

    Ok(CatalogueCheck {
        origin_grad_norm,
        minimizer_grad_norm,
        saddle_grad_norm_max,
        origin_hessian_max_eig,
        minimizer_hessian_min_eig,
        saddle_ascent_curvature_min,
        saddle_descent_curvature_max,
        pass,
    })
}

pub struct ConcentrationCheck {
    pub n: usize,
    pub m_low: usize,
    pub m_high: usize,
    pub deviation_low: f64,
    pub deviation_high: f64,
    pub pass: bool,
}

/// Median (over trials) of the normalized Hessian deviation
/// `‖∇²f(x) − E∇²f(x)‖ / (‖x‖² + ‖x̄‖²/3 + ‖ε‖∞)` at one sampled point per
/// trial.
pub fn concentration_deviation(
    n: usize,
    m: usize,
    trials: usize,
    noise: &NoiseCfg,
    master_seed: u64,
) -> Result<f64, CliError> {
    let mut deviations = Vec::with_capacity(trials);
    for trial in 0..trials {
        let iseed = instance_seed(master_seed, n, m, trial);
        let meas = gaussian_instance(n, m, noise, iseed)?;
        let truth = meas.truth.as_ref().expect("instance carries truth");
        let model = ExpectedModel::from_measurements(&meas)?;

        let x = {
            let mut r = rng::substream(iseed, Stream::Sampling);
            let radius = 2.0 * truth.norm() * r.gen::<f64>();
            rng::unit_sphere_vector(n, &mut r) * radius
        };

        let sample = objective::f_hessian(&meas, &x)?;
        let expected = objective::expected_hessian(&model, &x);
        let diff = sample - expected;
        let spectral_norm = SymmetricEigen::new(diff)
            .eigenvalues
            .iter()
            .map(|e| e.abs())
            .fold(0.0, f64::max);
        let denom = x.norm_squared() + truth.norm_squared() / 3.0 + meas.noise_inf();
        deviations.push(spectral_norm / denom);
    }
    Ok(report::median(&deviations))
}

pub struct VerifyOutcome {
    pub catalogue: CatalogueCheck,
    pub covering: CoveringReport,
    pub concentration: Option<ConcentrationCheck>,
    pub report_path: PathBuf,
    pub pass: bool,
}

pub fn run(cfg: &LandscapeVerifyCfg) -> Result<VerifyOutcome, CliError> {
    // deterministic unit truth for the closed-form checks
    let truth = {
        let mut r = rng::substream(rng::mix(&[cfg.common.seed, cfg.n as u64]), Stream::Truth);
        rng::unit_sphere_vector(cfg.n, &mut r)
    };

    let catalogue = check_catalogue(
        &truth,
        cfg.eps_mean,
        cfg.saddle_samples,
        rng::mix(&[cfg.common.seed, 41]),
    )?;

    let covering = landscape::verify_covering(
        &truth,
        cfg.eps_mean,
        cfg.lambda,
        cfg.samples,
        rng::mix(&[cfg.common.seed, 42]),
    )?;

    let concentration = if cfg.concentration_trials > 0 {
        let n = cfg.concentration_n;
        let noise = if cfg.eps_mean > 0.0 {
            NoiseCfg {
                model: NoiseModelKind::UniformNonneg,
                mean: cfg.eps_mean,
            }
        } else {
            NoiseCfg {
                model: NoiseModelKind::None,
                mean: 0.0,
            }
        };
        let m_low = cfg.concentration_low * n;
        let m_high = cfg.concentration_high * n;
        let deviation_low =
            concentration_deviation(n, m_low, cfg.concentration_trials, &noise, cfg.common.seed)?;
        let deviation_high =
            concentration_deviation(n, m_high, cfg.concentration_trials, &noise, cfg.common.seed)?;
        Some(ConcentrationCheck {
            n,
            m_low,
            m_high,
            deviation_low,
            deviation_high,
            pass: deviation_high < deviation_low,
        })
    } else {
        None
    };

    let covering_pass = covering.uncovered_count == 0;
    let pass = catalogue.pass && covering_pass && concentration.as_ref().is_none_or(|c| c.pass);

    let mut text = String::new();
    text.push_str(&format!("n = {}\n", cfg.n));
    text.push_str(&format!("eps_mean = {}\n", fmt_float(cfg.eps_mean)));
    text.push_str(&format!("lambda = {}\n", fmt_float(cfg.lambda)));
    text.push_str(&format!(
        "catalogue.origin_grad_norm = {}\n",
        fmt_float(catalogue.origin_grad_norm)
    ));
    text.push_str(&format!(
        "catalogue.minimizer_grad_norm = {}\n",
        fmt_float(catalogue.minimizer_grad_norm)
    ));
    text.push_str(&format!(
        "catalogue.saddle_grad_norm_max = {}\n",
        fmt_float(catalogue.saddle_grad_norm_max)
    ));
    text.push_str(&format!(
        "catalogue.origin_hessian_max_eig = {}\n",
        fmt_float(catalogue.origin_hessian_max_eig)
    ));
    text.push_str(&format!(
        "catalogue.minimizer_hessian_min_eig = {}\n",
        fmt_float(catalogue.minimizer_hessian_min_eig)
    ));
    text.push_str(&format!(
        "catalogue.saddle_ascent_curvature_min = {}\n",
        fmt_float(catalogue.saddle_ascent_curvature_min)
    ));
    text.push_str(&format!(
        "catalogue.saddle_descent_curvature_max = {}\n",
        fmt_float(catalogue.saddle_descent_curvature_max)
    ));
    text.push_str(&format!("catalogue.pass = {}\n", catalogue.pass));
    text.push_str(&format!("covering.samples = {}\n", covering.samples_checked));
    text.push_str(&format!("covering.uncovered = {}\n", covering.uncovered_count));
    text.push_str(&format!("covering.r1 = {}\n", covering.r1_count));
    text.push_str(&format!("covering.r2x = {}\n", covering.r2x_count));
    text.push_str(&format!("covering.r2h = {}\n", covering.r2h_count));
    text.push_str(&format!("covering.r3 = {}\n", covering.r3_count));
    text.push_str(&format!("covering.pass = {covering_pass}\n"));
    if let Some(c) = &concentration {
        text.push_str(&format!("concentration.n = {}\n", c.n));
        text.push_str(&format!("concentration.m_low = {}\n", c.m_low));
        text.push_str(&format!("concentration.m_high = {}\n", c.m_high));
        text.push_str(&format!(
            "concentration.deviation_low = {}\n",
            fmt_float(c.deviation_low)
        ));
        text.push_str(&format!(
            "concentration.deviation_high = {}\n",
            fmt_float(c.deviation_high)
        ));
        text.push_str(&format!("concentration.pass = {}\n", c.pass));
    }
    text.push_str(&format!("pass = {pass}\n"));

    let report_path = cfg.common.out.join("landscape_report.txt");
    report::write_text(&report_path, &text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", report_path.display())))?;
    print!("{text}");

    Ok(VerifyOutcome {
        catalogue,
        covering,
        concentration,
        report_path,
        pass,
    })
}

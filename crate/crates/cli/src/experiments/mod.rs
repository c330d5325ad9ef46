//! One submodule per experiment, plus the instance-construction helpers
//! they share.
//!
//! Seeding convention: every (n, m, trial) cell derives an instance seed
//! `mix([master, n, m, trial])` that fixes the ensemble, the ground truth,
//! and the noise draw. Initial points use `mix([master, n, m, trial, alg])`
//! so different algorithms on the same cell share the instance but not the
//! initialization randomness.

pub mod cdpimage;
pub mod check_assumption;
pub mod landscape_verify;
pub mod phasediagram;
pub mod reconstruct1d;

use std::sync::Arc;

use nalgebra::DVector;

use mirror_pr_core::rng::{self, Stream};
use mirror_pr_core::sensing::{self, MeasurementSet};
use mirror_pr_core::spectral;
use mirror_pr_core::Result as CoreResult;

use crate::config::NoiseCfg;

/// Algorithm tags used in the init-seed derivation (and, for the phase
/// diagram, in the output CSV).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    MdRandom,
    MdSpectral,
    WfSpectral,
    WfRandom,
}

impl Algorithm {
    pub fn id(&self) -> u64 {
        match self {
            Algorithm::MdRandom => 1,
            Algorithm::MdSpectral => 2,
            Algorithm::WfSpectral => 3,
            Algorithm::WfRandom => 4,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::MdRandom => "MD-random",
            Algorithm::MdSpectral => "MD-spectral",
            Algorithm::WfSpectral => "WF-spectral",
            Algorithm::WfRandom => "WF-random",
        }
    }
}

/// Seed shared by everything that defines one problem instance.
pub fn instance_seed(master: u64, n: usize, m: usize, trial: usize) -> u64 {
    rng::mix(&[master, n as u64, m as u64, trial as u64])
}

/// Seed for one algorithm's initialization on one instance.
pub fn init_seed(master: u64, n: usize, m: usize, trial: usize, alg: Algorithm) -> u64 {
    rng::mix(&[master, n as u64, m as u64, trial as u64, alg.id()])
}

/// Gaussian instance with a unit-norm ground truth.
pub fn gaussian_instance(
    n: usize,
    m: usize,
    noise: &NoiseCfg,
    seed: u64,
) -> CoreResult<MeasurementSet> {
    let ensemble = Arc::new(sensing::gaussian_ensemble(n, m, seed)?);
    let truth = {
        let mut r = rng::substream(seed, Stream::Truth);
        rng::unit_sphere_vector(n, &mut r)
    };
    sensing::measure(ensemble, &truth, &noise.to_spec(seed))
}

/// Default fixed step for mirror descent: `0.99 / (3 + ε̃)` for Gaussian
/// sensing and `0.99 / (2 + ε̃)` for coded diffraction patterns.
pub fn default_gamma_gaussian(noise_mean: f64) -> f64 {
    0.99 / (3.0 + noise_mean)
}

pub fn default_gamma_cdp(noise_mean: f64) -> f64 {
    0.99 / (2.0 + noise_mean)
}

/// Random initialization: a uniform unit-sphere point.
pub fn random_init(n: usize, seed: u64) -> DVector<f64> {
    let mut r = rng::substream(seed, Stream::Init);
    rng::unit_sphere_vector(n, &mut r)
}

/// Spectral initialization (returns just the initial point).
pub fn spectral_start(
    meas: &MeasurementSet,
    power_iters: usize,
    seed: u64,
) -> CoreResult<DVector<f64>> {
    Ok(spectral::spectral_init(meas, power_iters, seed)?.x0)
}

/// Success threshold for one instance: the noise-floor radius
/// `2‖ε‖/√(mσ)` with σ evaluated at the default parameters (λ = 1/3,
/// ϱ = 0.01), or the exact-recovery tolerance when noiseless. σ is computed
/// directly from its closed form here (no SNR gate) so the phase diagram can
/// grade cells even when the formal noise assumption is out of range.
pub fn instance_threshold(meas: &MeasurementSet) -> f64 {
    let truth = meas
        .truth
        .as_ref()
        .expect("instances built by the runners always carry the truth");
    let eps = meas.noise.clone().unwrap_or_else(|| DVector::zeros(meas.m()));
    let ts = truth.norm_squared();
    let eps_mean = meas.noise_mean();
    let eps_inf = meas.noise_inf();
    let maxterm = (ts / 3.0 + eps_inf).max(1.0);
    let sigma = ((1.0 / 3.0) * ts.min(1.0) - eps_mean - 0.01 * maxterm).max(1e-6);
    mirror_pr_core::metrics::success_threshold(&eps, meas.m(), sigma)
}

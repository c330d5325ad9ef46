//! End-to-end solver behavior: monotonicity, convergence quality, rate,
//! saddle avoidance, and the exact sign symmetry of the whole pipeline.

use mirror_pr_core::landscape;
use mirror_pr_core::metrics;
use mirror_pr_core::objective::f_value;
use mirror_pr_core::rng::{self, Stream};
use mirror_pr_core::sensing::{self, MeasurementSet, NoiseSpec};
use mirror_pr_core::solver::{self, SolverConfig, StepPolicy};
use mirror_pr_core::spectral;
use nalgebra::DVector;
use std::sync::Arc;

fn gaussian_instance(
    n: usize,
    m: usize,
    seed: u64,
    noise: &NoiseSpec,
) -> (MeasurementSet, DVector<f64>) {
    let e = Arc::new(sensing::gaussian_ensemble(n, m, seed).unwrap());
    let mut r = rng::substream(seed, Stream::Truth);
    let truth = rng::unit_sphere_vector(n, &mut r);
    (sensing::measure(e, &truth, noise).unwrap(), truth)
}

fn cdp_instance(n: usize, p: usize, seed: u64, noise: &NoiseSpec) -> (MeasurementSet, DVector<f64>) {
    let e = Arc::new(sensing::cdp_ensemble(n, p, seed).unwrap());
    let mut r = rng::substream(seed, Stream::Truth);
    let truth = rng::unit_sphere_vector(n, &mut r);
    (sensing::measure(e, &truth, noise).unwrap(), truth)
}

fn random_unit_init(n: usize, seed: u64) -> DVector<f64> {
    let mut r = rng::substream(seed, Stream::Init);
    rng::unit_sphere_vector(n, &mut r)
}

#[test]
fn backtracking_descends_monotonically_on_both_ensembles() {
    let cfg = SolverConfig {
        max_iters: 150,
        ..Default::default()
    };
    for seed in 0..10u64 {
        let (gauss, _) = gaussian_instance(16, 160, 100 + seed, &NoiseSpec::uniform_nonneg(1e-4, seed));
        let trace = solver::mirror_descent(&gauss, &random_unit_init(16, seed), &cfg).unwrap();
        for w in trace.f_values.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "gaussian seed {seed}: {} -> {}", w[0], w[1]);
        }

        let (cdp, _) = cdp_instance(16, 8, 200 + seed, &NoiseSpec::uniform_nonneg(1e-4, seed));
        let trace = solver::mirror_descent(&cdp, &random_unit_init(16, 999 + seed), &cfg).unwrap();
        for w in trace.f_values.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "cdp seed {seed}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn noiseless_spectral_md_reaches_tight_accuracy() {
    // constant step 0.99/3 (the relative-smoothness constant is 3 + noise
    // terms); spectral start lands inside the attraction region at m = 40n
    let n = 32;
    let (meas, truth) = gaussian_instance(n, 40 * n, 7, &NoiseSpec::none());
    let init = spectral::spectral_init(&meas, 200, 7).unwrap();
    let cfg = SolverConfig {
        step_policy: StepPolicy::constant(0.99 / 3.0),
        max_iters: 500,
        record_every: 100,
        ..Default::default()
    };
    let trace = solver::mirror_descent(&meas, &init.x0, &cfg).unwrap();
    let rel = metrics::dist_to_signs(&trace.final_x, &truth).unwrap() / truth.norm();
    assert!(rel < 1e-7, "noiseless MD stalled at rel={rel:e}");
}

#[test]
fn wirtinger_flow_desk_run_converges() {
    // gradient-descent baseline with the ramp step: n=64, m=10n, noiseless,
    // spectral start → relative error below 1e-5 within 2000 iterations
    let n = 64;
    let (meas, truth) = gaussian_instance(n, 10 * n, 13, &NoiseSpec::none());
    let init = spectral::spectral_init(&meas, 200, 13).unwrap();
    let cfg = SolverConfig {
        step_policy: StepPolicy::backtracking(), // selects the ramp for WF
        max_iters: 2000,
        record_every: 500,
        ..Default::default()
    };
    let trace = solver::wirtinger_flow(&meas, &init.x0, &cfg).unwrap();
    let rel = metrics::dist_to_signs(&trace.final_x, &truth).unwrap() / truth.norm();
    assert!(rel < 1e-5, "WF desk run stalled at rel={rel:e}");
}

#[test]
fn local_convergence_is_geometric() {
    // once inside the attraction region the relative error contracts
    // geometrically; require at least a halving every 25 iterations on
    // average over a 100-iteration window
    let n = 32;
    let (meas, _truth) = gaussian_instance(n, 40 * n, 17, &NoiseSpec::none());
    let init = spectral::spectral_init(&meas, 200, 17).unwrap();
    let cfg = SolverConfig {
        step_policy: StepPolicy::constant(0.99 / 3.0),
        max_iters: 400,
        ..Default::default()
    };
    let trace = solver::mirror_descent(&meas, &init.x0, &cfg).unwrap();
    let rels = &trace.rel_errors;
    let start = rels
        .iter()
        .position(|&r| r < 1e-2)
        .expect("never entered the locality");
    let end = (start + 100).min(rels.len() - 1);
    assert!(end > start + 20, "too few iterations in the local regime");
    let factor = rels[end] / rels[start];
    let per_25 = factor.powf(25.0 / (end - start) as f64);
    assert!(
        per_25 <= 0.5,
        "local rate too slow: shrink per 25 iters = {per_25}"
    );
}

#[test]
fn solver_avoids_saddle_sphere() {
    // the saddle points sit on {x ⊥ truth, ‖x‖² = (‖x̄‖²+ε̃)/3}; random
    // initializations must never end up near that set
    let n = 16;
    let noise = NoiseSpec::uniform_nonneg(1e-4, 5);
    let (meas, truth) = gaussian_instance(n, 40 * n, 23, &noise);
    let eps_mean = meas.noise_mean();
    let cat = landscape::critical_catalogue(&truth, eps_mean).unwrap();
    let saddle_radius = cat.saddle_radius_sq.sqrt();
    let unit_truth = &truth / truth.norm();
    let cfg = SolverConfig {
        max_iters: 400,
        record_every: 400,
        ..Default::default()
    };
    for seed in 0..100u64 {
        let trace = solver::mirror_descent(&meas, &random_unit_init(n, 10_000 + seed), &cfg).unwrap();
        let x = &trace.final_x;
        let along = unit_truth.dot(x);
        let mut perp = x.clone();
        perp.axpy(-along, &unit_truth, 1.0);
        let dist_to_saddles = (along * along + (perp.norm() - saddle_radius).powi(2)).sqrt();
        assert!(
            dist_to_saddles > 1e-3,
            "seed {seed}: converged within {dist_to_saddles:e} of the saddle sphere"
        );
    }
}

#[test]
fn final_value_is_near_optimal_on_noisy_instances() {
    // f(x̄) − min f ≤ ‖ε‖²/m, so the solved value can undershoot f(x̄) by at
    // most that much (and must not exceed it after convergence)
    let n = 24;
    for seed in 0..5u64 {
        let noise = NoiseSpec::uniform_nonneg(1e-3, 40 + seed);
        let (meas, truth) = gaussian_instance(n, 40 * n, 50 + seed, &noise);
        let init = spectral::spectral_init(&meas, 200, 50 + seed).unwrap();
        let cfg = SolverConfig {
            max_iters: 800,
            record_every: 800,
            ..Default::default()
        };
        let trace = solver::mirror_descent(&meas, &init.x0, &cfg).unwrap();
        let f_truth = f_value(&meas, &truth).unwrap();
        let f_final = *trace.f_values.last().unwrap();
        let gap_bound = meas.noise_sq_norm() / meas.m() as f64;
        assert!(
            f_truth - f_final <= gap_bound + 1e-12,
            "seed {seed}: f(truth)={f_truth:e}, f(final)={f_final:e}, bound={gap_bound:e}"
        );
    }
}

#[test]
fn recovered_point_obeys_argmin_distance_bound() {
    // noisy recovery accuracy: dist(x_final, ±x̄) ≤ 8‖ε‖/(√m·‖x̄‖)
    let n = 64;
    let m = 40 * n;
    let mut passes = 0;
    let seeds = 5u64;
    for seed in 0..seeds {
        let noise = NoiseSpec::uniform_nonneg(1e-5, 60 + seed);
        let (meas, truth) = gaussian_instance(n, m, 70 + seed, &noise);
        let init = spectral::spectral_init(&meas, 200, 70 + seed).unwrap();
        let cfg = SolverConfig {
            step_policy: StepPolicy::constant(0.99 / (3.0 + meas.noise_mean())),
            max_iters: 3000,
            record_every: 3000,
            ..Default::default()
        };
        let trace = solver::mirror_descent(&meas, &init.x0, &cfg).unwrap();
        let eps = meas.noise.as_ref().unwrap();
        let bound = landscape::dist_argmin_bound(eps, &truth, m);
        let dist = metrics::dist_to_signs(&trace.final_x, &truth).unwrap();
        if dist <= bound {
            passes += 1;
        }
    }
    assert!(
        passes >= seeds - 1,
        "argmin distance bound failed too often: {passes}/{seeds}"
    );
}

#[test]
fn whole_pipeline_is_sign_equivariant() {
    let n = 12;
    let (meas, _) = gaussian_instance(n, 120, 91, &NoiseSpec::uniform_nonneg(1e-4, 8));
    let x0 = random_unit_init(n, 3);
    let cfg = SolverConfig {
        max_iters: 50,
        ..Default::default()
    };
    let md_plus = solver::mirror_descent(&meas, &x0, &cfg).unwrap();
    let md_minus = solver::mirror_descent(&meas, &(-&x0), &cfg).unwrap();
    assert_eq!(md_plus.final_x, -md_minus.final_x);
    assert_eq!(md_plus.f_values, md_minus.f_values);
    assert_eq!(md_plus.l_history, md_minus.l_history);
    assert_eq!(md_plus.rel_errors, md_minus.rel_errors);

    let wf_plus = solver::wirtinger_flow(&meas, &x0, &cfg).unwrap();
    let wf_minus = solver::wirtinger_flow(&meas, &(-&x0), &cfg).unwrap();
    assert_eq!(wf_plus.final_x, -wf_minus.final_x);
    assert_eq!(wf_plus.f_values, wf_minus.f_values);
}

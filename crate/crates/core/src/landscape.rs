//! Landscape analysis of the expected objective: signal-to-noise assumption
//! checking, convergence-parameter calculation, the critical-point
//! catalogue, region classification, and randomized covering verification.
//!
//! Everything here works on the closed-form expectation of the objective
//! (see [`crate::objective::ExpectedModel`]), so all checks are
//! deterministic given a seed.

use nalgebra::DVector;

use crate::bregman::theta_bound;
use crate::error::{CoreError, Result};
use crate::rng::{self, Stream};

/// Lower end of the admissible noise-ratio parameter λ: the practical bound
/// on c_s attains 1/(9√2) at ‖x̄‖ = 1, λ = 1/3, ε̃ = 0, and the covering
/// argument needs λ strictly above this value.
pub const LAMBDA_MIN: f64 = 0.078567420131838;

/// Norm tolerance below which a vector is treated as coincident with ±x̄
/// when forming the region direction d_x.
const DIRECTION_DEGENERATE: f64 = 1e-14;

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > LAMBDA_MIN && lambda < 1.0) {
        return Err(CoreError::InvalidParameter {
            name: "lambda",
            value: lambda,
            constraint: "in (1/(9*sqrt(2)), 1)",
        });
    }
    Ok(())
}

fn check_truth(truth: &DVector<f64>, op: &'static str) -> Result<f64> {
    let ts = truth.norm_squared();
    if !(ts > 0.0) {
        return Err(CoreError::InvalidParameter {
            name: op,
            value: ts,
            constraint: "requires ||truth|| > 0",
        });
    }
    Ok(ts)
}

fn vector_stats(eps: &DVector<f64>) -> (f64, f64, f64) {
    if eps.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mean = eps.mean();
    let inf = eps.amax();
    (mean, inf, eps.norm())
}

/// Result of checking the noise assumption for a given (truth, noise, λ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport {
    pub lambda: f64,
    /// Noise mean ε̃.
    pub eps_mean: f64,
    /// Sup-norm ‖ε‖∞.
    pub eps_inf: f64,
    /// Realized ratio ‖ε‖∞ / min(‖x̄‖², 1).
    pub c_s_actual: f64,
    /// Admissible ratio (1−λ)‖x̄‖√(λ·min(‖x̄‖²,1)−ε̃) / (2√6·min(‖x̄‖²,1)).
    pub c_s_limit: f64,
    /// 0 ≤ ε̃ < λ·min(‖x̄‖²,1).
    pub mean_ok: bool,
    /// c_s_actual < c_s_limit.
    pub inf_ok: bool,
    pub pass: bool,
}

/// Checks the noise assumption: the mean condition
/// `0 ≤ ε̃ < λ·min(‖x̄‖²,1)` and the sup-norm condition
/// `‖ε‖∞/min(‖x̄‖²,1) < c_s_limit`.
pub fn snr_check(truth: &DVector<f64>, eps: &DVector<f64>, lambda: f64) -> Result<SnrReport> {
    check_lambda(lambda)?;
    let ts = check_truth(truth, "snr_check")?;
    let min_part = ts.min(1.0);
    let (eps_mean, eps_inf, _) = vector_stats(eps);
    let c_s_actual = eps_inf / min_part;
    let slack = (lambda * min_part - eps_mean).max(0.0);
    let c_s_limit = (1.0 - lambda) * ts.sqrt() * slack.sqrt() / (2.0 * 6.0_f64.sqrt() * min_part);
    let mean_ok = eps_mean >= 0.0 && eps_mean < lambda * min_part;
    let inf_ok = c_s_actual < c_s_limit;
    Ok(SnrReport {
        lambda,
        eps_mean,
        eps_inf,
        c_s_actual,
        c_s_limit,
        mean_ok,
        inf_ok,
        pass: mean_ok && inf_ok,
    })
}

/// Constants governing the convergence guarantee for one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeParams {
    /// Relative strong convexity modulus σ on the attraction region.
    pub sigma: f64,
    /// Radius ρ = (1−λ)‖x̄‖/√3 of the attraction region around ±x̄.
    pub rho: f64,
    /// Initialization radius r (spectral initialization is expected to land
    /// within distance r of ±x̄).
    pub r: f64,
    /// Relative smoothness constant L = 3 + ε̃ + ϱ·max(‖x̄‖²/3 + ‖ε‖∞, 1).
    pub l: f64,
    /// Linear convergence factor ν = (1−κ)σ/L ∈ [0, 1).
    pub nu: f64,
    /// Noise-floor radius ς: iterates contract until the dist² ≲ ς² floor.
    pub varsigma: f64,
    /// Bregman-comparison bound Θ(ρ) = 6(‖x̄‖² + ρ²) + 1.
    pub theta_rho: f64,
}

/// Computes the convergence constants (σ, ρ, r, L, ν, ς, Θ(ρ)) for an
/// instance with the given truth, realized noise, and parameters λ
/// (noise-ratio), ϱ (concentration slack), κ (step safety margin).
///
/// Fails when the noise assumption does not hold ([`CoreError::SnrViolated`]),
/// when ϱ or κ are out of range, or when the implied initialization radius
/// satisfies r² ≤ 0 (too much noise for the given m).
pub fn convergence_params(
    truth: &DVector<f64>,
    eps: &DVector<f64>,
    lambda: f64,
    varrho: f64,
    kappa: f64,
    m: usize,
) -> Result<LandscapeParams> {
    let snr = snr_check(truth, eps, lambda)?;
    if !snr.pass {
        return Err(CoreError::SnrViolated(format!(
            "noise assumption fails: mean_ok={} (eps_mean={:.3e}), inf_ok={} \
             (c_s_actual={:.3e} vs c_s_limit={:.3e})",
            snr.mean_ok, snr.eps_mean, snr.inf_ok, snr.c_s_actual, snr.c_s_limit
        )));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(CoreError::InvalidParameter {
            name: "kappa",
            value: kappa,
            constraint: "in (0, 1)",
        });
    }
    if m == 0 {
        return Err(CoreError::InvalidParameter {
            name: "m",
            value: 0.0,
            constraint: ">= 1",
        });
    }

    let ts = truth.norm_squared();
    let min_part = ts.min(1.0);
    let (eps_mean, eps_inf, eps_norm) = vector_stats(eps);
    let maxterm = (ts / 3.0 + eps_inf).max(1.0);
    let varrho_cap = (lambda * min_part - eps_mean) / (2.0 * maxterm);
    if !(varrho > 0.0 && varrho < varrho_cap) {
        return Err(CoreError::InvalidParameter {
            name: "varrho",
            value: varrho,
            constraint: "in (0, (lambda*min(||truth||^2,1) - eps_mean)/(2*max(...)))",
        });
    }

    let sigma = lambda * min_part - eps_mean - varrho * maxterm;
    let rho = (1.0 - lambda) * ts.sqrt() / 3.0_f64.sqrt();
    let l = 3.0 + eps_mean + varrho * maxterm;
    let nu = (1.0 - kappa) * sigma / l;
    let varsigma = if eps_norm == 0.0 {
        0.0
    } else {
        // c_s·min(‖x̄‖²,1) equals the realized ‖ε‖∞.
        2.0 * 2.0_f64.sqrt() * eps_norm / (m as f64 * (eps_inf - eps_mean)).sqrt()
    };
    let theta_rho = theta_bound(rho, ts.sqrt());
    let r_sq = (rho * rho - 4.0 * eps_norm * eps_norm / (m as f64 * sigma)) / theta_rho.max(1.0);
    if !(r_sq > 0.0) {
        return Err(CoreError::SnrViolated(format!(
            "initialization radius vanished: rho^2 = {:.3e} but noise term \
             4||eps||^2/(m sigma) = {:.3e}",
            rho * rho,
            4.0 * eps_norm * eps_norm / (m as f64 * sigma)
        )));
    }

    Ok(LandscapeParams {
        sigma,
        rho,
        r: r_sq.sqrt(),
        l,
        nu,
        varsigma,
        theta_rho,
    })
}

/// The critical points of the expected objective: the origin (local
/// maximizer), the two global minimizers ±x̄·√(1 + ε̃/(3‖x̄‖²)), and a sphere
/// of strict saddle points {x ⊥ x̄, ‖x‖² = (‖x̄‖² + ε̃)/3}.
#[derive(Debug, Clone)]
pub struct CriticalCatalogue {
    truth: DVector<f64>,
    pub origin: DVector<f64>,
    pub minimizers: [DVector<f64>; 2],
    /// Squared radius of the saddle sphere; its membership constraint
    /// x̄ᵀx = 0 is implicit.
    pub saddle_radius_sq: f64,
}

/// Builds the critical-point catalogue for a truth vector and noise mean.
pub fn critical_catalogue(truth: &DVector<f64>, eps_mean: f64) -> Result<CriticalCatalogue> {
    let ts = check_truth(truth, "critical_catalogue")?;
    if !(eps_mean >= 0.0) {
        return Err(CoreError::InvalidParameter {
            name: "eps_mean",
            value: eps_mean,
            constraint: ">= 0",
        });
    }
    let beta = (1.0 + eps_mean / (3.0 * ts)).sqrt();
    let plus = truth * beta;
    let minus = -&plus;
    Ok(CriticalCatalogue {
        truth: truth.clone(),
        origin: DVector::zeros(truth.len()),
        minimizers: [plus, minus],
        saddle_radius_sq: (ts + eps_mean) / 3.0,
    })
}

impl CriticalCatalogue {
    /// Draws points from the saddle sphere: uniformly random directions in
    /// the orthogonal complement of the truth, scaled to the saddle radius.
    /// Empty when n < 2 (the complement sphere is empty).
    pub fn sample_saddles(&self, count: usize, seed: u64) -> Vec<DVector<f64>> {
        let n = self.truth.len();
        if n < 2 {
            return Vec::new();
        }
        let mut rng = rng::substream(seed, Stream::Sampling);
        let radius = self.saddle_radius_sq.sqrt();
        let unit_truth = &self.truth / self.truth.norm();
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let mut v = rng::normal_vector(n, &mut rng);
            let along = unit_truth.dot(&v);
            v.axpy(-along, &unit_truth, 1.0);
            let norm = v.norm();
            if norm > 1e-9 {
                out.push(v * (radius / norm));
            }
        }
        out
    }
}

/// Membership flags for one point; the four regions are not mutually
/// exclusive and their union covers the sampled ball (see
/// [`verify_covering`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RegionSet {
    /// Strong negative curvature along the truth direction.
    pub r1: bool,
    /// Large gradient correlation with x itself.
    pub r2x: bool,
    /// Large gradient correlation with the direction d_x away from the
    /// nearest signed truth.
    pub r2h: bool,
    /// Within the attraction radius ρ of {±x̄}.
    pub r3: bool,
}

impl RegionSet {
    pub fn covered(&self) -> bool {
        self.r1 || self.r2x || self.r2h || self.r3
    }
}

/// Direction used by the R2ʰ test: from the nearest signed truth toward x,
/// i.e. (x − s·x̄)/‖x − s·x̄‖ with s = argmin_{±1} ‖s·x̄ − x‖. The expected
/// gradient has a positive component along this direction throughout the
/// R2ʰ band, which is what the test checks. At x = ±x̄ the direction
/// degenerates and e₁ is returned.
fn r2h_direction(x: &DVector<f64>, truth: &DVector<f64>) -> DVector<f64> {
    let s = if truth.dot(x) >= 0.0 { 1.0 } else { -1.0 };
    let mut d = x.clone();
    d.axpy(-s, truth, 1.0);
    let norm = d.norm();
    if norm <= DIRECTION_DEGENERATE * truth.norm().max(1.0) {
        let mut e1 = DVector::zeros(x.len());
        e1[0] = 1.0;
        return e1;
    }
    d / norm
}

fn expected_grad_closed(
    x: &DVector<f64>,
    truth: &DVector<f64>,
    eps_mean: f64,
    xs: f64,
    ts: f64,
    corr: f64,
) -> DVector<f64> {
    let mut g = x * (3.0 * xs - ts - eps_mean);
    g.axpy(-2.0 * corr, truth, 1.0);
    g
}

/// Classifies a point against the four landscape regions using the
/// closed-form expected gradient and Hessian.
pub fn classify_region(
    x: &DVector<f64>,
    truth: &DVector<f64>,
    eps_mean: f64,
    lambda: f64,
) -> Result<RegionSet> {
    check_lambda(lambda)?;
    let ts = check_truth(truth, "classify_region")?;
    if x.len() != truth.len() {
        return Err(CoreError::DimensionMismatch {
            context: "classify_region",
            expected: truth.len(),
            got: x.len(),
        });
    }
    Ok(region_set(x, truth, eps_mean, lambda, ts))
}

fn region_set(
    x: &DVector<f64>,
    truth: &DVector<f64>,
    eps_mean: f64,
    lambda: f64,
    ts: f64,
) -> RegionSet {
    let xs = x.norm_squared();
    let corr = truth.dot(x);
    let x_norm = xs.sqrt();
    let t_norm = ts.sqrt();

    // R1: ⟨x̄, E[∇²f(x)] x̄⟩ ≤ −(1/100)‖x‖²‖x̄‖² − (1/50)‖x̄‖⁴
    let curvature = 6.0 * corr * corr + 3.0 * xs * ts - 3.0 * ts * ts - eps_mean * ts;
    let r1 = curvature <= -(xs * ts) / 100.0 - (ts * ts) / 50.0;

    // R2ˣ: ⟨x, E[∇f(x)]⟩ ≥ (1/500)‖x‖²‖x̄‖² + (1/100)‖x‖⁴
    let radial = 3.0 * xs * xs - 2.0 * corr * corr - ts * xs - eps_mean * xs;
    let r2x = radial >= (xs * ts) / 500.0 + (xs * xs) / 100.0;

    // R3: dist(x, {±x̄}) ≤ ρ
    let dist = crate::metrics::dist_to_signs(x, truth).expect("lengths checked");
    let rho = (1.0 - lambda) * t_norm / 3.0_f64.sqrt();
    let r3 = dist <= rho;

    // R2ʰ: norm band, distance floor, and gradient correlation with d_x.
    let in_band = (11.0 / 20.0) * t_norm <= x_norm && x_norm <= t_norm;
    let far_enough = dist >= t_norm / 3.0;
    let r2h = if in_band && far_enough {
        let d = r2h_direction(x, truth);
        let g = expected_grad_closed(x, truth, eps_mean, xs, ts, corr);
        d.dot(&g) >= x_norm * ts / 250.0
    } else {
        false
    };

    RegionSet { r1, r2x, r2h, r3 }
}

/// Outcome of [`verify_covering`]: region tallies are non-exclusive counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoveringReport {
    pub samples_checked: usize,
    pub uncovered_count: usize,
    pub r1_count: usize,
    pub r2x_count: usize,
    pub r2h_count: usize,
    pub r3_count: usize,
}

/// Samples points with uniformly random direction and radius uniform on
/// [0, 2‖x̄‖], classifies each, and counts samples outside R1 ∪ R2ˣ ∪ R2ʰ ∪ R3
/// (the expected count is zero — the regions cover the ball).
pub fn verify_covering(
    truth: &DVector<f64>,
    eps_mean: f64,
    lambda: f64,
    n_samples: usize,
    seed: u64,
) -> Result<CoveringReport> {
    check_lambda(lambda)?;
    let ts = check_truth(truth, "verify_covering")?;
    let mean_cap = ts * LAMBDA_MIN;
    if !(eps_mean >= 0.0 && eps_mean <= mean_cap) {
        return Err(CoreError::InvalidParameter {
            name: "eps_mean",
            value: eps_mean,
            constraint: "in [0, ||truth||^2/(9*sqrt(2))]",
        });
    }

    let n = truth.len();
    let t_norm = ts.sqrt();
    let mut rng = rng::substream(seed, Stream::Sampling);
    let mut report = CoveringReport {
        samples_checked: n_samples,
        uncovered_count: 0,
        r1_count: 0,
        r2x_count: 0,
        r2h_count: 0,
        r3_count: 0,
    };
    for _ in 0..n_samples {
        let radius = 2.0 * t_norm * rand::Rng::gen::<f64>(&mut rng);
        let x = rng::unit_sphere_vector(n, &mut rng) * radius;
        let set = region_set(&x, truth, eps_mean, lambda, ts);
        report.r1_count += set.r1 as usize;
        report.r2x_count += set.r2x as usize;
        report.r2h_count += set.r2h as usize;
        report.r3_count += set.r3 as usize;
        if !set.covered() {
            report.uncovered_count += 1;
        }
    }
    Ok(report)
}

/// Upper bound 8‖ε‖/(√m·‖x̄‖) on the distance from any minimizer of the
/// sampled objective to {±x̄}; used as a success gate for noisy recovery.
///
/// Panics if `truth` is zero or `m` is zero.
pub fn dist_argmin_bound(eps: &DVector<f64>, truth: &DVector<f64>, m: usize) -> f64 {
    let t_norm = truth.norm();
    assert!(t_norm > 0.0, "dist_argmin_bound requires ||truth|| > 0");
    assert!(m > 0, "dist_argmin_bound requires m >= 1");
    8.0 * eps.norm() / ((m as f64).sqrt() * t_norm)
}

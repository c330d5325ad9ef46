//! The noise-aware least-squares objective and its analytic expectations.
//!
//! Given intensities `y[r] = |<a_r, x̄>|² + ε[r]`, the objective is
//!
//! ```text
//! f(x) = 1/(4m) Σ_r (y[r] - |(Ax)[r]|²)²,
//! ```
//!
//! which keeps the noise inside the square instead of fitting the noiseless
//! model. Its value at the truth is exactly `||ε||²/(4m)`, and ±x̄ are
//! `||ε||²/m`-minimizers, which is what makes the noise-aware formulation
//! stable without any denoising step.
//!
//! For Gaussian sensing the population (expected) landscape has a short
//! closed form; [`expected_f`], [`expected_grad`] and [`expected_hessian`]
//! implement it and power all landscape verification in this crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::sensing::{MeasurementSet, SensingEnsemble};

/// Dense Hessians are refused above this dimension; use [`f_hessian_vec`].
pub const HESSIAN_DENSE_LIMIT: usize = 512;

fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(CoreError::DimensionMismatch {
            context,
            expected,
            got,
        });
    }
    Ok(())
}

/// Objective value `f(x) = 1/(4m) Σ (y[r] - |(Ax)[r]|²)²`.
pub fn f_value(meas: &MeasurementSet, x: &DVector<f64>) -> Result<f64> {
    check_len("f_value", meas.n(), x.len())?;
    let c = meas.ensemble.apply(x)?;
    let m = meas.m() as f64;
    let mut acc = 0.0;
    for r in 0..meas.m() {
        let d = meas.y[r] - c[r].norm_sqr();
        acc += d * d;
    }
    Ok(acc / (4.0 * m))
}

/// Objective value and gradient from a single forward pass.
///
/// The gradient is `(1/m) A^*( (|Ax|² - y) ⊙ Ax )` restricted to real
/// signals; the solver calls this once per iteration.
pub fn f_value_and_grad(meas: &MeasurementSet, x: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
    check_len("f_value_and_grad", meas.n(), x.len())?;
    let c = meas.ensemble.apply(x)?;
    let m = meas.m() as f64;
    let mut acc = 0.0;
    let mut weighted = DVector::from_element(meas.m(), Complex64::new(0.0, 0.0));
    for r in 0..meas.m() {
        let d = c[r].norm_sqr() - meas.y[r];
        acc += d * d;
        weighted[r] = c[r] * d;
    }
    let grad = meas.ensemble.adjoint_apply(&weighted)? / m;
    Ok((acc / (4.0 * m), grad))
}

/// Gradient `∇f(x) = (1/m) Σ (|<a_r,x>|² - y[r]) Re(a_r <a_r,x>)`.
pub fn f_gradient(meas: &MeasurementSet, x: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(f_value_and_grad(meas, x)?.1)
}

/// Dense Hessian `∇²f(x) = (1/m) Σ (3|<a_r,x>|² - y[r]) a_r a_rᵀ`.
///
/// Only Gaussian ensembles at moderate dimension are materialized (the
/// landscape checks need eigenvalues at toy scale); everything else should
/// use [`f_hessian_vec`].
pub fn f_hessian(meas: &MeasurementSet, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    check_len("f_hessian", meas.n(), x.len())?;
    let n = meas.n();
    if n > HESSIAN_DENSE_LIMIT {
        return Err(CoreError::HessianTooLarge {
            n,
            limit: HESSIAN_DENSE_LIMIT,
        });
    }
    let rows = meas.ensemble.gaussian_rows().ok_or(CoreError::UnsupportedEnsemble {
        op: "f_hessian",
        reason: "dense Hessian assembly requires explicit Gaussian rows; use f_hessian_vec",
    })?;
    let m = meas.m();
    let c = meas.ensemble.apply(x)?;
    let mut scaled = rows.clone();
    for r in 0..m {
        let w = (3.0 * c[r].norm_sqr() - meas.y[r]) / m as f64;
        let mut row = scaled.row_mut(r);
        row *= w;
    }
    let h = rows.tr_mul(&scaled);
    // force exact symmetry (gemm accumulation order differs per entry)
    Ok(0.5 * (&h + h.transpose()))
}

/// Hessian-vector product, valid for both ensembles at any dimension.
///
/// With `c = Ax` and `b = Av`, the directional derivative of the gradient is
/// `(1/m) A^*( 2 Re(conj(c) ⊙ b) ⊙ c + (|c|² - y) ⊙ b )`; for real Gaussian
/// rows this reduces to the familiar `(1/m) Σ (3 c_r² - y_r) a_r (a_rᵀ v)`.
pub fn f_hessian_vec(
    meas: &MeasurementSet,
    x: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_len("f_hessian_vec (x)", meas.n(), x.len())?;
    check_len("f_hessian_vec (v)", meas.n(), v.len())?;
    let c = meas.ensemble.apply(x)?;
    let b = meas.ensemble.apply(v)?;
    let m = meas.m() as f64;
    let mut u = DVector::from_element(meas.m(), Complex64::new(0.0, 0.0));
    for r in 0..meas.m() {
        let cross = 2.0 * (c[r].conj() * b[r]).re;
        u[r] = c[r] * cross + b[r] * (c[r].norm_sqr() - meas.y[r]);
    }
    Ok(meas.ensemble.adjoint_apply(&u)? / m)
}

/// Bregman divergence of f: `D_f(x, z) = f(x) - f(z) - <∇f(z), x - z>`.
/// May be negative (f is nonconvex); the backtracking test compares it
/// against `ξ L_k D_ψ`.
pub fn bregman_f(meas: &MeasurementSet, x: &DVector<f64>, z: &DVector<f64>) -> Result<f64> {
    check_len("bregman_f", x.len(), z.len())?;
    let fx = f_value(meas, x)?;
    let (fz, gz) = f_value_and_grad(meas, z)?;
    Ok(fx - fz - gz.dot(&(x - z)))
}

/// Crude but always-valid relative-smoothness constant
/// `(1/m) Σ ||a_r||² (3 ||a_r||² + eps_inf)`; `D_f ≤ L D_ψ` holds globally
/// for any `L` at least this large.
pub fn crude_smoothness_bound(ensemble: &SensingEnsemble, eps_inf: f64) -> f64 {
    assert!(eps_inf >= 0.0, "eps_inf must be nonnegative");
    let norms = ensemble.row_squared_norms();
    let m = ensemble.m() as f64;
    norms.iter().map(|&sq| sq * (3.0 * sq + eps_inf)).sum::<f64>() / m
}

/// Parameters of the expected (population) landscape under Gaussian sensing.
#[derive(Debug, Clone)]
pub struct ExpectedModel {
    pub truth: DVector<f64>,
    /// Empirical noise mean ε̃ (enters the quadratic term).
    pub noise_mean: f64,
    /// ||ε||²/m (enters only the constant offset of the value).
    pub noise_sq_norm_over_m: f64,
}

impl ExpectedModel {
    pub fn new(truth: DVector<f64>, noise_mean: f64, noise_sq_norm_over_m: f64) -> Result<Self> {
        if noise_mean < 0.0 || !noise_mean.is_finite() {
            return Err(CoreError::InvalidParameter {
                name: "noise_mean",
                value: noise_mean,
                constraint: "finite and >= 0",
            });
        }
        Ok(ExpectedModel {
            truth,
            noise_mean,
            noise_sq_norm_over_m,
        })
    }

    /// Build the model from a measurement set that carries its truth.
    pub fn from_measurements(meas: &MeasurementSet) -> Result<Self> {
        let truth = meas.truth.clone().ok_or(CoreError::UnsupportedEnsemble {
            op: "ExpectedModel::from_measurements",
            reason: "measurement set does not carry the ground truth",
        })?;
        ExpectedModel::new(
            truth,
            meas.noise_mean(),
            meas.noise_sq_norm() / meas.m() as f64,
        )
    }
}

/// Expected objective
/// `E[f(x)] = ¾(||x||⁴+||x̄||⁴) − ½||x̄||²||x||² − (x̄ᵀx)² + ||ε||²/(4m) − ε̃(||x||²−||x̄||²)/2`.
pub fn expected_f(model: &ExpectedModel, x: &DVector<f64>) -> f64 {
    let xs = x.norm_squared();
    let ts = model.truth.norm_squared();
    let corr = model.truth.dot(x);
    0.75 * (xs * xs + ts * ts) - 0.5 * ts * xs - corr * corr
        + 0.25 * model.noise_sq_norm_over_m
        - 0.5 * model.noise_mean * (xs - ts)
}

/// Expected gradient `3||x||²x − 2x̄(x̄ᵀx) − ||x̄||²x − ε̃x`.
pub fn expected_grad(model: &ExpectedModel, x: &DVector<f64>) -> DVector<f64> {
    let xs = x.norm_squared();
    let ts = model.truth.norm_squared();
    let corr = model.truth.dot(x);
    x * (3.0 * xs - ts - model.noise_mean) - &model.truth * (2.0 * corr)
}

/// Expected Hessian `6xxᵀ + 3||x||²I − 2x̄x̄ᵀ − (||x̄||² + ε̃)I`.
pub fn expected_hessian(model: &ExpectedModel, x: &DVector<f64>) -> DMatrix<f64> {
    let n = x.len();
    let xs = x.norm_squared();
    let ts = model.truth.norm_squared();
    let mut h = DMatrix::identity(n, n) * (3.0 * xs - ts - model.noise_mean);
    h.ger(6.0, x, x, 1.0);
    h.ger(-2.0, &model.truth, &model.truth, 1.0);
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, Stream};
    use crate::sensing::{self, NoiseSpec};
    use std::sync::Arc;

    fn toy_instance(noise: &NoiseSpec) -> (MeasurementSet, DVector<f64>) {
        let e = Arc::new(sensing::gaussian_ensemble(4, 24, 13).unwrap());
        let truth = {
            let mut r = rng::substream(5, Stream::Truth);
            rng::unit_sphere_vector(4, &mut r)
        };
        (sensing::measure(e, &truth, noise).unwrap(), truth)
    }

    #[test]
    fn f_at_truth_noiseless_is_zero() {
        let (meas, truth) = toy_instance(&NoiseSpec::none());
        assert_eq!(f_value(&meas, &truth).unwrap(), 0.0);
        assert_eq!(f_gradient(&meas, &truth).unwrap(), DVector::zeros(4));
    }

    #[test]
    fn f_at_truth_noisy_matches_noise_norm() {
        let (meas, truth) = toy_instance(&NoiseSpec::uniform_nonneg(1e-4, 8));
        let expect = meas.noise_sq_norm() / (4.0 * meas.m() as f64);
        let got = f_value(&meas, &truth).unwrap();
        assert!(
            (got - expect).abs() <= 1e-12 * expect,
            "f(truth)={got:e} vs ||eps||²/(4m)={expect:e}"
        );
    }

    #[test]
    fn f_at_zero_is_quarter_mean_square_y() {
        let (meas, _) = toy_instance(&NoiseSpec::uniform_nonneg(1e-3, 2));
        let expect = meas.y.iter().map(|v| v * v).sum::<f64>() / (4.0 * meas.m() as f64);
        assert_eq!(f_value(&meas, &DVector::zeros(4)).unwrap(), expect);
    }

    #[test]
    fn f_sign_symmetry_is_exact() {
        let (meas, _) = toy_instance(&NoiseSpec::uniform_nonneg(1e-3, 2));
        let mut r = rng::substream(77, Stream::Sampling);
        for _ in 0..20 {
            let x = rng::normal_vector(4, &mut r);
            assert_eq!(
                f_value(&meas, &x).unwrap(),
                f_value(&meas, &(-&x)).unwrap()
            );
        }
    }

    #[test]
    fn hessian_single_row_example() {
        // one row a = e1, y = 1, x = e1: weight 3|1|² - 1 = 2
        let e = Arc::new(sensing::gaussian_from_rows(DMatrix::from_row_slice(
            1,
            2,
            &[1.0, 0.0],
        )));
        let truth = DVector::from_vec(vec![1.0, 0.0]);
        let meas = sensing::measure(e, &truth, &NoiseSpec::none()).unwrap();
        let h = f_hessian(&meas, &truth).unwrap();
        assert_eq!(h[(0, 0)], 2.0);
        assert_eq!(h[(0, 1)], 0.0);
        assert_eq!(h[(1, 0)], 0.0);
        assert_eq!(h[(1, 1)], 0.0);
    }

    #[test]
    fn hessian_is_exactly_symmetric_and_matches_hvp() {
        let (meas, _) = toy_instance(&NoiseSpec::uniform_nonneg(1e-3, 6));
        let mut r = rng::substream(3, Stream::Sampling);
        let x = rng::normal_vector(4, &mut r);
        let h = f_hessian(&meas, &x).unwrap();
        assert_eq!(h, h.transpose());
        for _ in 0..5 {
            let v = rng::normal_vector(4, &mut r);
            let hv = f_hessian_vec(&meas, &x, &v).unwrap();
            let dense = &h * &v;
            assert!((&hv - &dense).norm() <= 1e-12 * (1.0 + dense.norm()));
        }
    }

    #[test]
    fn hessian_rejects_cdp_and_large_n() {
        let e = Arc::new(sensing::cdp_ensemble(4, 2, 1).unwrap());
        let truth = DVector::from_element(4, 0.5);
        let meas = sensing::measure(e, &truth, &NoiseSpec::none()).unwrap();
        assert!(f_hessian(&meas, &truth).is_err());
        // but the HVP works on CDP
        assert!(f_hessian_vec(&meas, &truth, &truth).is_ok());
    }

    #[test]
    fn bregman_f_vanishes_on_diagonal() {
        let (meas, truth) = toy_instance(&NoiseSpec::uniform_nonneg(1e-4, 1));
        assert_eq!(bregman_f(&meas, &truth, &truth).unwrap(), 0.0);
    }

    #[test]
    fn crude_bound_examples() {
        let single = sensing::gaussian_from_rows(DMatrix::from_row_slice(1, 2, &[1.0, 0.0]));
        assert_eq!(crude_smoothness_bound(&single, 0.0), 3.0);
        let two_unit = sensing::gaussian_from_rows(DMatrix::from_row_slice(
            2,
            2,
            &[1.0, 0.0, 0.0, 1.0],
        ));
        assert_eq!(crude_smoothness_bound(&two_unit, 1.0), 4.0);
    }

    #[test]
    fn expected_values_at_reference_points() {
        let truth = DVector::from_vec(vec![0.6, -0.8]); // unit norm
        let clean = ExpectedModel::new(truth.clone(), 0.0, 0.0).unwrap();
        assert!(expected_f(&clean, &truth).abs() < 1e-15);
        assert_eq!(expected_f(&clean, &DVector::zeros(2)), 0.75);
        assert_eq!(expected_grad(&clean, &DVector::zeros(2)), DVector::zeros(2));
        assert!(expected_grad(&clean, &truth).norm() < 1e-15);

        let noisy = ExpectedModel::new(truth.clone(), 2e-3, 0.0).unwrap();
        let h0 = expected_hessian(&noisy, &DVector::zeros(2));
        // <x̄, H(0) x̄> = -3||x̄||⁴ - ε̃||x̄||²
        let quad = truth.dot(&(&h0 * &truth));
        assert!((quad - (-3.0 - 2e-3)).abs() < 1e-12);
        // H(0) = -2 x̄x̄ᵀ - (||x̄||²+ε̃) I
        let expect = -2.0 * &truth * truth.transpose()
            - DMatrix::identity(2, 2) * (1.0 + 2e-3);
        assert!((h0 - expect).norm() < 1e-12);
    }

    #[test]
    fn expected_model_rejects_negative_mean() {
        assert!(ExpectedModel::new(DVector::zeros(2), -1.0, 0.0).is_err());
    }
}

//! Spectral initialization: scale estimate plus top eigenvector of
//! `Y = (1/m) Σ_r y[r] a_r a_rᵀ`, computed matrix-free by power iteration.

use nalgebra::DVector;

use crate::error::{CoreError, Result};
use crate::rng::{self, Stream};
use crate::sensing::MeasurementSet;

/// Relative residual at which power iteration stops early; far below any
/// accuracy the initializer needs, so the cap `iters` is the usual stop.
const POWER_RESIDUAL_TOL: f64 = 1e-13;

/// Output of [`spectral_init`].
///
/// The returned `x0` is the top-eigenvector estimate rescaled to
/// `||x0|| = scale` where `scale² = n·Σ y[r] / Σ ||a_r||²`. Its sign is
/// arbitrary (both signs of the truth are equally good); score against
/// `{±truth}`.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub x0: DVector<f64>,
    /// Rayleigh quotient of the returned direction under Y.
    pub eigenvalue: f64,
    pub scale: f64,
    pub power_iters_used: usize,
    /// Number of negative measurement entries clamped to zero inside Y
    /// (possible under symmetric noise); the measurement set itself is
    /// never modified.
    pub clamped_negatives: usize,
}

/// Power iteration for the top eigenpair of a symmetric PSD operator given
/// by its action. Returns a unit vector and its Rayleigh quotient.
///
/// The start vector is drawn from the seeded substream, so results are
/// deterministic given `seed`. Stops after `iters` steps or earlier once the
/// eigen-residual is negligible.
pub fn power_iteration<F>(
    matvec: F,
    n: usize,
    iters: usize,
    seed: u64,
) -> Result<(DVector<f64>, f64)>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let (v, lambda, _) = power_iteration_counted(matvec, n, iters, seed)?;
    Ok((v, lambda))
}

fn power_iteration_counted<F>(
    matvec: F,
    n: usize,
    iters: usize,
    seed: u64,
) -> Result<(DVector<f64>, f64, usize)>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    if n == 0 {
        return Err(CoreError::InvalidParameter {
            name: "n",
            value: 0.0,
            constraint: ">= 1",
        });
    }
    if iters == 0 {
        return Err(CoreError::InvalidParameter {
            name: "iters",
            value: 0.0,
            constraint: ">= 1",
        });
    }

    let mut rng = rng::substream(seed, Stream::PowerStart);
    let mut v = rng::unit_sphere_vector(n, &mut rng);
    let mut used = 0;
    for k in 1..=iters {
        let w = matvec(&v);
        if w.len() != n {
            return Err(CoreError::DimensionMismatch {
                context: "power_iteration matvec",
                expected: n,
                got: w.len(),
            });
        }
        if !w.iter().all(|c| c.is_finite()) {
            return Err(CoreError::non_finite_at(
                "power_iteration",
                format!("matvec output at iteration {k}"),
            ));
        }
        used = k;
        let lambda = v.dot(&w);
        let w_norm = w.norm();
        if w_norm <= f64::MIN_POSITIVE {
            // v is (numerically) in the kernel; any unit vector with
            // Rayleigh quotient 0 is a valid answer for a PSD operator.
            return Ok((v, 0.0, used));
        }
        let mut residual = w.clone();
        residual.axpy(-lambda, &v, 1.0);
        v = w / w_norm;
        if residual.norm() <= POWER_RESIDUAL_TOL * lambda.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    // Recompute the Rayleigh quotient at the vector actually returned.
    let w = matvec(&v);
    let lambda = v.dot(&w);
    Ok((v, lambda, used))
}

/// Spectral initialization: `x0 = scale · v` with `v` the top eigenvector of
/// `Y = (1/m) Σ max(y[r], 0) a_r a_rᵀ` and `scale² = n·Σ y[r] / Σ ||a_r||²`
/// (the raw sum, not the clamped one).
///
/// Y is never materialized; each power-iteration step is one forward and one
/// adjoint application of the ensemble.
pub fn spectral_init(
    meas: &MeasurementSet,
    power_iters: usize,
    seed: u64,
) -> Result<SpectralResult> {
    let n = meas.n();
    let m = meas.m();
    let row_sq = meas.ensemble.row_squared_norms();
    let denom: f64 = row_sq.iter().sum();
    if denom <= 0.0 {
        return Err(CoreError::InvalidParameter {
            name: "sum ||a_r||^2",
            value: denom,
            constraint: "> 0",
        });
    }
    let sum_y: f64 = meas.y.iter().sum();
    let scale_sq = n as f64 * sum_y / denom;
    if scale_sq < 0.0 {
        return Err(CoreError::InvalidParameter {
            name: "sum y",
            value: sum_y,
            constraint: ">= 0 (scale² = n·Σy / Σ||a_r||² must be nonnegative)",
        });
    }
    let scale = scale_sq.sqrt();

    let mut y_plus = meas.y.clone();
    let mut clamped_negatives = 0usize;
    for v in y_plus.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
            clamped_negatives += 1;
        }
    }

    let ensemble = meas.ensemble.clone();
    let inv_m = 1.0 / m as f64;
    let matvec = move |v: &DVector<f64>| {
        let mut c = ensemble
            .apply(v)
            .expect("dimensions fixed by the ensemble");
        for (cr, &yr) in c.iter_mut().zip(y_plus.iter()) {
            *cr *= yr;
        }
        ensemble
            .adjoint_apply(&c)
            .expect("dimensions fixed by the ensemble")
            * inv_m
    };

    let (direction, eigenvalue, power_iters_used) =
        power_iteration_counted(matvec, n, power_iters, seed)?;
    // Renormalize so that ||x0|| = scale holds to rounding even after the
    // final power step's division.
    let dir_norm = direction.norm();
    let x0 = if scale == 0.0 || dir_norm == 0.0 {
        DVector::zeros(n)
    } else {
        direction * (scale / dir_norm)
    };

    Ok(SpectralResult {
        x0,
        eigenvalue,
        scale,
        power_iters_used,
        clamped_negatives,
    })
}

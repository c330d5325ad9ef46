//! Sensing ensembles and noisy intensity measurements.
//!
//! Two measurement models are supported for a real unknown signal x in R^n:
//!
//! * **Gaussian** — m dense rows drawn i.i.d. from N(0, I_n); the forward map
//!   is the ordinary matrix product (embedded in complex with zero imaginary
//!   part so both ensembles share one interface).
//! * **CDP** (coded diffraction patterns) — P random ternary masks
//!   `d_p ∈ {-1,0,1}^n` with probabilities {1/4, 1/2, 1/4}; the forward map
//!   stacks the *unnormalized* DFTs of the masked signals `d_p ⊙ x`,
//!   giving m = n·P measurements in mask-major order.
//!
//! Intensities are `y[r] = |(Ax̄)[r]|² + ε[r]`. The stored noise vector is
//! defined as the floating-point difference `y[r] - |(Ax̄)[r]|²` after `y` is
//! rounded, so the identity between `y`, the truth, and the noise is exact in
//! f64 arithmetic, not just up to rounding.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{CoreError, Result};
use crate::rng::{self, Stream};

enum Kind {
    Gaussian {
        /// m×n matrix whose r-th row is the sensing vector a_r.
        rows: DMatrix<f64>,
    },
    Cdp {
        masks: Vec<DVector<f64>>,
        n: usize,
        fft_fwd: Arc<dyn Fft<f64>>,
        fft_inv: Arc<dyn Fft<f64>>,
    },
}

/// An immutable sensing operator; construct with [`gaussian_ensemble`] or
/// [`cdp_ensemble`]. All methods are read-only and safe to share across
/// threads.
pub struct SensingEnsemble {
    kind: Kind,
    seed: u64,
}

impl std::fmt::Debug for SensingEnsemble {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            Kind::Gaussian { rows } => f
                .debug_struct("SensingEnsemble")
                .field("kind", &"Gaussian")
                .field("m", &rows.nrows())
                .field("n", &rows.ncols())
                .field("seed", &self.seed)
                .finish(),
            Kind::Cdp { masks, n, .. } => f
                .debug_struct("SensingEnsemble")
                .field("kind", &"Cdp")
                .field("masks", &masks.len())
                .field("n", n)
                .field("seed", &self.seed)
                .finish(),
        }
    }
}

/// Wrap an explicit row matrix as a Gaussian-kind ensemble.
///
/// Intended for deterministic fixtures (tests, worked examples); the random
/// constructors are [`gaussian_ensemble`] and [`cdp_ensemble`].
pub fn gaussian_from_rows(rows: DMatrix<f64>) -> SensingEnsemble {
    SensingEnsemble {
        kind: Kind::Gaussian { rows },
        seed: 0,
    }
}

/// Dense Gaussian ensemble: m rows i.i.d. N(0, I_n), drawn row-major from the
/// ensemble substream of `seed`.
pub fn gaussian_ensemble(n: usize, m: usize, seed: u64) -> Result<SensingEnsemble> {
    if n == 0 || m == 0 {
        return Err(CoreError::InvalidParameter {
            name: "n*m",
            value: (n * m) as f64,
            constraint: "n >= 1 and m >= 1",
        });
    }
    let mut gen = rng::substream(seed, Stream::Ensemble);
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        data.push(gen.sample::<f64, _>(rand_distr::StandardNormal));
    }
    Ok(SensingEnsemble {
        kind: Kind::Gaussian {
            rows: DMatrix::from_row_slice(m, n, &data),
        },
        seed,
    })
}

/// CDP ensemble with `p` ternary masks of length `n` (m = n·p measurements).
pub fn cdp_ensemble(n: usize, p: usize, seed: u64) -> Result<SensingEnsemble> {
    if n == 0 || p == 0 {
        return Err(CoreError::InvalidParameter {
            name: "n*P",
            value: (n * p) as f64,
            constraint: "n >= 1 and P >= 1",
        });
    }
    let mut gen = rng::substream(seed, Stream::Ensemble);
    let masks: Vec<DVector<f64>> = (0..p)
        .map(|_| {
            DVector::from_fn(n, |_, _| {
                let u: f64 = gen.gen();
                if u < 0.25 {
                    -1.0
                } else if u < 0.75 {
                    0.0
                } else {
                    1.0
                }
            })
        })
        .collect();
    let mut planner = FftPlanner::new();
    Ok(SensingEnsemble {
        kind: Kind::Cdp {
            fft_fwd: planner.plan_fft_forward(n),
            fft_inv: planner.plan_fft_inverse(n),
            masks,
            n,
        },
        seed,
    })
}

impl SensingEnsemble {
    /// Signal length n.
    pub fn n(&self) -> usize {
        match &self.kind {
            Kind::Gaussian { rows } => rows.ncols(),
            Kind::Cdp { n, .. } => *n,
        }
    }

    /// Number of measurements m (= n·P for CDP).
    pub fn m(&self) -> usize {
        match &self.kind {
            Kind::Gaussian { rows } => rows.nrows(),
            Kind::Cdp { masks, n, .. } => masks.len() * n,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.kind, Kind::Gaussian { .. })
    }

    /// Gaussian row matrix, when available (dense Hessian assembly needs it).
    pub(crate) fn gaussian_rows(&self) -> Option<&DMatrix<f64>> {
        match &self.kind {
            Kind::Gaussian { rows } => Some(rows),
            Kind::Cdp { .. } => None,
        }
    }

    /// The masks of a CDP ensemble.
    pub fn masks(&self) -> Option<&[DVector<f64>]> {
        match &self.kind {
            Kind::Cdp { masks, .. } => Some(masks),
            Kind::Gaussian { .. } => None,
        }
    }

    /// Forward map `A x` as a complex vector of length m.
    ///
    /// Gaussian entries have zero imaginary part; CDP entries are the
    /// unnormalized DFT of each masked signal, mask-major.
    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<Complex64>> {
        if x.len() != self.n() {
            return Err(CoreError::DimensionMismatch {
                context: "apply",
                expected: self.n(),
                got: x.len(),
            });
        }
        match &self.kind {
            Kind::Gaussian { rows } => {
                let mut real = DVector::zeros(rows.nrows());
                real.gemv(1.0, rows, x, 0.0);
                Ok(real.map(|v| Complex64::new(v, 0.0)))
            }
            Kind::Cdp {
                masks, n, fft_fwd, ..
            } => {
                let mut out = DVector::from_element(masks.len() * n, Complex64::new(0.0, 0.0));
                let mut buf = vec![Complex64::new(0.0, 0.0); *n];
                for (p, mask) in masks.iter().enumerate() {
                    for l in 0..*n {
                        buf[l] = Complex64::new(mask[l] * x[l], 0.0);
                    }
                    fft_fwd.process(&mut buf);
                    out.as_mut_slice()[p * n..(p + 1) * n].copy_from_slice(&buf);
                }
                Ok(out)
            }
        }
    }

    /// Adjoint map restricted to real signals: `Re(A^H v)` of length n.
    ///
    /// For CDP the p-th block contributes `d_p ⊙ Re(F^H v_p)`, where `F^H` is
    /// the unnormalized inverse-DFT kernel (conjugate of the forward kernel,
    /// no 1/n factor).
    pub fn adjoint_apply(&self, v: &DVector<Complex64>) -> Result<DVector<f64>> {
        if v.len() != self.m() {
            return Err(CoreError::DimensionMismatch {
                context: "adjoint_apply",
                expected: self.m(),
                got: v.len(),
            });
        }
        match &self.kind {
            Kind::Gaussian { rows } => {
                let re = v.map(|c| c.re);
                Ok(rows.tr_mul(&re))
            }
            Kind::Cdp {
                masks, n, fft_inv, ..
            } => {
                let mut out = DVector::zeros(*n);
                let mut buf = vec![Complex64::new(0.0, 0.0); *n];
                for (p, mask) in masks.iter().enumerate() {
                    buf.copy_from_slice(&v.as_slice()[p * n..(p + 1) * n]);
                    fft_inv.process(&mut buf);
                    for l in 0..*n {
                        out[l] += mask[l] * buf[l].re;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Squared Euclidean norms of the m rows of A.
    ///
    /// Every CDP row within mask p has squared norm `||d_p||²` (each DFT
    /// entry has modulus one), so the vector is piecewise constant there.
    pub fn row_squared_norms(&self) -> DVector<f64> {
        match &self.kind {
            Kind::Gaussian { rows } => {
                DVector::from_fn(rows.nrows(), |r, _| rows.row(r).norm_squared())
            }
            Kind::Cdp { masks, n, .. } => {
                let mut out = DVector::zeros(masks.len() * n);
                for (p, mask) in masks.iter().enumerate() {
                    let sq = mask.norm_squared();
                    for j in 0..*n {
                        out[p * n + j] = sq;
                    }
                }
                out
            }
        }
    }
}

/// Noise model attached to a measurement draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Exact intensities.
    None,
    /// ε[r] ~ Uniform[0, 2·target_mean]; the empirical mean concentrates at
    /// target_mean and every entry is nonnegative.
    UniformNonneg,
    /// ε[r] ~ Uniform[-1, 1], then shifted by `target_mean - mean(draw)` so
    /// the empirical mean hits target_mean exactly. Entries (and even some
    /// intensities) may be negative.
    UniformSymmetric,
}

/// How to corrupt intensities; `target_mean` is the intended empirical mean
/// of the noise (ε̃ in the analysis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    pub target_mean: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec {
            model: NoiseModel::None,
            target_mean: 0.0,
            seed: 0,
        }
    }

    pub fn uniform_nonneg(target_mean: f64, seed: u64) -> Self {
        NoiseSpec {
            model: NoiseModel::UniformNonneg,
            target_mean,
            seed,
        }
    }

    pub fn uniform_symmetric(target_mean: f64, seed: u64) -> Self {
        NoiseSpec {
            model: NoiseModel::UniformSymmetric,
            target_mean,
            seed,
        }
    }

    /// Draw the raw noise vector of length m from this spec's substream.
    pub fn draw(&self, m: usize) -> Result<DVector<f64>> {
        if self.target_mean < 0.0 || !self.target_mean.is_finite() {
            return Err(CoreError::InvalidParameter {
                name: "target_mean",
                value: self.target_mean,
                constraint: "finite and >= 0",
            });
        }
        let mut gen = rng::substream(self.seed, Stream::Noise);
        Ok(match self.model {
            NoiseModel::None => DVector::zeros(m),
            NoiseModel::UniformNonneg => {
                DVector::from_fn(m, |_, _| gen.gen::<f64>() * 2.0 * self.target_mean)
            }
            NoiseModel::UniformSymmetric => {
                let mut eps = DVector::from_fn(m, |_, _| 2.0 * gen.gen::<f64>() - 1.0);
                let shift = self.target_mean - eps.mean();
                eps.apply(|e| *e += shift);
                eps
            }
        })
    }
}

/// Intensity measurements, optionally carrying the ground truth and the noise
/// that produced them (experiments keep them; a solver only needs `y`).
#[derive(Debug)]
pub struct MeasurementSet {
    pub ensemble: Arc<SensingEnsemble>,
    pub y: DVector<f64>,
    pub truth: Option<DVector<f64>>,
    pub noise: Option<DVector<f64>>,
}

impl MeasurementSet {
    pub fn n(&self) -> usize {
        self.ensemble.n()
    }

    pub fn m(&self) -> usize {
        self.ensemble.m()
    }

    /// ||ε||² of the stored noise (0 when noiseless).
    pub fn noise_sq_norm(&self) -> f64 {
        self.noise.as_ref().map_or(0.0, |e| e.norm_squared())
    }

    /// ||ε||_∞ of the stored noise.
    pub fn noise_inf(&self) -> f64 {
        self.noise.as_ref().map_or(0.0, |e| e.amax())
    }

    /// Empirical mean ε̃ of the stored noise.
    pub fn noise_mean(&self) -> f64 {
        self.noise.as_ref().map_or(0.0, |e| e.mean())
    }
}

/// Measure `truth` through `ensemble` with the given noise.
///
/// The stored noise entry is the floating-point difference
/// `y[r] - |(A truth)[r]|²` (not the raw draw), so downstream identities such
/// as `f(x̄) = ||ε||²/(4m)` hold to machine precision rather than to the
/// rounding error of the addition.
pub fn measure(
    ensemble: Arc<SensingEnsemble>,
    truth: &DVector<f64>,
    noise: &NoiseSpec,
) -> Result<MeasurementSet> {
    if truth.len() != ensemble.n() {
        return Err(CoreError::DimensionMismatch {
            context: "measure",
            expected: ensemble.n(),
            got: truth.len(),
        });
    }
    let m = ensemble.m();
    let intensities = ensemble.apply(truth)?.map(|c| c.norm_sqr());
    let draw = noise.draw(m)?;
    let mut y = DVector::zeros(m);
    let mut eps = DVector::zeros(m);
    for r in 0..m {
        y[r] = intensities[r] + draw[r];
        eps[r] = y[r] - intensities[r];
    }
    Ok(MeasurementSet {
        ensemble,
        y,
        truth: Some(truth.clone()),
        noise: Some(eps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inner_cx(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
        a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn gaussian_determinism_and_shape() {
        let e1 = gaussian_ensemble(2, 3, 7).unwrap();
        let e2 = gaussian_ensemble(2, 3, 7).unwrap();
        assert_eq!(e1.n(), 2);
        assert_eq!(e1.m(), 3);
        assert_eq!(
            e1.gaussian_rows().unwrap().as_slice(),
            e2.gaussian_rows().unwrap().as_slice()
        );
        let e3 = gaussian_ensemble(2, 3, 8).unwrap();
        assert_ne!(
            e1.gaussian_rows().unwrap().as_slice(),
            e3.gaussian_rows().unwrap().as_slice()
        );
    }

    #[test]
    fn gaussian_row_norms_concentrate() {
        // chi-square with n degrees of freedom has mean n
        let n = 128;
        let m = 128 * 24;
        let e = gaussian_ensemble(n, m, 5).unwrap();
        let mean_sq = e.row_squared_norms().mean();
        assert!(
            (mean_sq - n as f64).abs() < 0.05 * n as f64,
            "mean row norm² {mean_sq} far from {n}"
        );
    }

    #[test]
    fn gaussian_entry_variance() {
        let e = gaussian_ensemble(1, 1_000_000, 31).unwrap();
        let rows = e.gaussian_rows().unwrap();
        let var = rows.iter().map(|v| v * v).sum::<f64>() / rows.len() as f64;
        assert!((0.99..=1.01).contains(&var), "variance {var}");
    }

    #[test]
    fn cdp_masks_shape_and_values() {
        let e = cdp_ensemble(4, 2, 3).unwrap();
        let masks = e.masks().unwrap();
        assert_eq!(masks.len(), 2);
        assert_eq!(e.m(), 8);
        for mask in masks {
            assert_eq!(mask.len(), 4);
            assert!(mask.iter().all(|&v| v == -1.0 || v == 0.0 || v == 1.0));
        }
        let e2 = cdp_ensemble(4, 2, 3).unwrap();
        for (a, b) in e.masks().unwrap().iter().zip(e2.masks().unwrap()) {
            assert_eq!(a.as_slice(), b.as_slice());
        }
    }

    #[test]
    fn cdp_zero_fraction() {
        let e = cdp_ensemble(1024, 8, 11).unwrap();
        let zeros: usize = e
            .masks()
            .unwrap()
            .iter()
            .map(|mask| mask.iter().filter(|&&v| v == 0.0).count())
            .sum();
        let frac = zeros as f64 / (1024.0 * 8.0);
        assert!((0.47..=0.53).contains(&frac), "zero fraction {frac}");
    }

    #[test]
    fn apply_gaussian_dot_product() {
        let e = SensingEnsemble {
            kind: Kind::Gaussian {
                rows: DMatrix::from_row_slice(1, 2, &[1.0, 2.0]),
            },
            seed: 0,
        };
        let out = e.apply(&DVector::from_vec(vec![3.0, 4.0])).unwrap();
        assert_eq!(out[0], Complex64::new(11.0, 0.0));
        let back = e
            .adjoint_apply(&DVector::from_element(1, Complex64::new(1.0, 0.0)))
            .unwrap();
        assert_eq!(back.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn apply_cdp_two_point_dft() {
        let mut planner = FftPlanner::new();
        let e = SensingEnsemble {
            kind: Kind::Cdp {
                masks: vec![DVector::from_vec(vec![1.0, 1.0])],
                n: 2,
                fft_fwd: planner.plan_fft_forward(2),
                fft_inv: planner.plan_fft_inverse(2),
            },
            seed: 0,
        };
        let out = e.apply(&DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert!((out[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((out[1] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn adjoint_identity_both_kinds() {
        // Re<Ax, v> == <x, A* v> for random vectors
        let mut gen = rng::substream(17, Stream::Sampling);
        for e in [
            gaussian_ensemble(6, 13, 2).unwrap(),
            cdp_ensemble(6, 3, 2).unwrap(),
        ] {
            for _ in 0..100 {
                let x = rng::normal_vector(e.n(), &mut gen);
                let v = DVector::from_fn(e.m(), |_, _| {
                    Complex64::new(
                        gen.sample(rand_distr::StandardNormal),
                        gen.sample(rand_distr::StandardNormal),
                    )
                });
                let lhs = inner_cx(&e.apply(&x).unwrap(), &v).re;
                let rhs = x.dot(&e.adjoint_apply(&v).unwrap());
                assert!(
                    (lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()),
                    "adjoint identity broke: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn adjoint_of_zero_is_zero() {
        let e = cdp_ensemble(5, 2, 9).unwrap();
        let v = DVector::from_element(10, Complex64::new(0.0, 0.0));
        assert_eq!(e.adjoint_apply(&v).unwrap(), DVector::zeros(5));
    }

    #[test]
    fn cdp_row_norms_match_masks() {
        let e = cdp_ensemble(8, 2, 21).unwrap();
        let norms = e.row_squared_norms();
        let masks = e.masks().unwrap();
        for p in 0..2 {
            for j in 0..8 {
                assert_eq!(norms[p * 8 + j], masks[p].norm_squared());
            }
        }
    }

    #[test]
    fn measure_noiseless_and_zero_truth() {
        let e = Arc::new(gaussian_ensemble(3, 7, 1).unwrap());
        let truth = DVector::from_vec(vec![0.5, -1.0, 2.0]);
        let ms = measure(e.clone(), &truth, &NoiseSpec::none()).unwrap();
        assert!(ms.y.iter().all(|&v| v >= 0.0));
        let c = e.apply(&truth).unwrap();
        for r in 0..7 {
            assert_eq!(ms.y[r], c[r].norm_sqr());
        }
        // zero truth: y equals the noise exactly
        let spec = NoiseSpec::uniform_nonneg(0.1, 4);
        let ms0 = measure(e.clone(), &DVector::zeros(3), &spec).unwrap();
        assert_eq!(ms0.y, spec.draw(7).unwrap());
    }

    #[test]
    fn measure_identity_is_exact() {
        let e = Arc::new(gaussian_ensemble(4, 50, 2).unwrap());
        let truth = DVector::from_vec(vec![0.3, 0.1, -0.7, 0.6]);
        let ms = measure(e.clone(), &truth, &NoiseSpec::uniform_nonneg(1e-5, 9)).unwrap();
        let c = e.apply(&truth).unwrap();
        let eps = ms.noise.as_ref().unwrap();
        for r in 0..50 {
            assert_eq!(ms.y[r], c[r].norm_sqr() + eps[r], "row {r} identity");
        }
    }

    #[test]
    fn noise_mean_targets() {
        let spec = NoiseSpec::uniform_nonneg(1e-5, 3);
        let eps = spec.draw(10_000).unwrap();
        let mean = eps.mean();
        assert!((mean - 1e-5).abs() <= 0.2e-5, "mean {mean}");
        assert!(eps.iter().all(|&v| v >= 0.0));

        let sym = NoiseSpec::uniform_symmetric(5e-3, 3);
        let eps = sym.draw(10_000).unwrap();
        assert!((eps.mean() - 5e-3).abs() < 1e-12);
        assert!(eps.iter().any(|&v| v < 0.0));

        // determinism
        assert_eq!(spec.draw(100).unwrap(), spec.draw(100).unwrap());
    }
}

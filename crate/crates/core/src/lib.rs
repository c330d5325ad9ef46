//! Phase retrieval from quadratic measurements via mirror descent.
//!
//! The library solves instances of the problem
//!
//! ```text
//! find x  such that  y[r] = |⟨a_r, x̄⟩|² + ε[r],   r = 1..m,
//! ```
//!
//! by minimizing the quartic least-squares objective
//! `f(x) = (1/4m) Σ_r (y[r] − |⟨a_r, x⟩|²)²` with mirror descent under the
//! quartic entropy `ψ(x) = ¼‖x‖⁴ + ½‖x‖²`, for which f is relatively smooth
//! and — near the signal — relatively strongly convex.
//!
//! Module map:
//! - [`sensing`]: Gaussian and coded-diffraction-pattern measurement
//!   ensembles, forward/adjoint application, noisy measurement synthesis.
//! - [`bregman`]: the entropy ψ, its gradient, the closed-form mirror map
//!   inverse ∇ψ*, and Bregman divergences.
//! - [`objective`]: value/gradient/Hessian of f plus the closed-form
//!   expectation model used by the landscape toolkit.
//! - [`solver`]: mirror descent (fixed step or backtracking) and a
//!   Wirtinger-flow baseline, both with full iteration traces.
//! - [`spectral`]: spectral initialization by matrix-free power iteration.
//! - [`landscape`]: noise-assumption checks, convergence constants,
//!   critical-point catalogue, region classification, covering verification.
//! - [`metrics`]: sign-invariant distances and success predicates.
//! - [`rng`]: seeded, stream-separated randomness so every run is
//!   reproducible.
//!
//! All randomness is deterministic given a `u64` seed; all vectors are real
//! (`nalgebra::DVector<f64>`), with complex arithmetic internal to the
//! coded-diffraction ensemble.

// Validation guards are written `!(x > 0.0)` on purpose: unlike `x <= 0.0`
// they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bregman;
pub mod error;
pub mod landscape;
pub mod metrics;
pub mod objective;
pub mod rng;
pub mod sensing;
pub mod solver;
pub mod spectral;

pub use error::{CoreError, Result};

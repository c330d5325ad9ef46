//! Mirror descent for the noise-aware objective, plus a gradient-descent
//! baseline (Wirtinger flow) producing the same trace format.
//!
//! One mirror-descent iteration is
//!
//! ```text
//! x_{k+1} = grad_psi_star( grad_psi(x_k) - gamma_k * grad f(x_k) ),
//! ```
//!
//! with either a fixed step `gamma` or backtracking on the relative-
//! smoothness surrogate: a candidate is accepted once
//! `D_f(x_{k+1}, x_k) <= xi * L_k * D_psi(x_{k+1}, x_k)` where
//! `gamma_k = (1 - kappa)/L_k`; each failure multiplies `L_k` by `1/xi`,
//! and after acceptance the estimate relaxes to `L_{k+1} = xi * L_k` (so the
//! estimate may drift below its starting value on easy stretches — that is
//! deliberate and keeps steps large). Accepted steps are monotone in f by
//! construction.

use nalgebra::DVector;

use crate::bregman::{bregman_psi, grad_psi, grad_psi_star};
use crate::error::{CoreError, Result};
use crate::metrics;
use crate::objective::f_value_and_grad;
use crate::sensing::MeasurementSet;

/// Hard cap on step-size trials within one backtracking iteration; hitting it
/// signals a pathological instance (or an absurd L0) and aborts the run.
pub const BACKTRACK_TRIAL_CAP: usize = 200;

/// Absolute slack (scaled by 1 + |f(x_k)|) added to the backtracking
/// acceptance test so that rounding noise cannot stall the inner loop once
/// the iterates sit at the objective's floating-point floor.
const ACCEPT_SLACK: f64 = 1e-13;

/// Step-size policy for [`mirror_descent`]; [`wirtinger_flow`] reuses the
/// type (see its docs for the mapping).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    /// Fixed step `gamma > 0`.
    Constant { gamma: f64 },
    /// Backtracking with initial estimate `l0`, step factor
    /// `gamma_k = (1 - kappa)/L_k`, and relaxation `xi` in (0, 1].
    Backtracking { l0: f64, kappa: f64, xi: f64 },
}

impl StepPolicy {
    pub fn constant(gamma: f64) -> Self {
        StepPolicy::Constant { gamma }
    }

    /// Backtracking with the default parameters (L0=1, kappa=0.01, xi=0.9).
    pub fn backtracking() -> Self {
        StepPolicy::Backtracking {
            l0: 1.0,
            kappa: 0.01,
            xi: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub step_policy: StepPolicy,
    pub max_iters: usize,
    /// Stop once `||grad f(x_k)|| <= grad_tol`; the default 0 only triggers
    /// at exact critical points, matching fixed-iteration experiment runs.
    pub grad_tol: f64,
    /// Keep every `record_every`-th iterate in the trace (the final iterate
    /// is always kept).
    pub record_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step_policy: StepPolicy::backtracking(),
            max_iters: 1000,
            grad_tol: 0.0,
            record_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        match self.step_policy {
            StepPolicy::Constant { gamma } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(CoreError::InvalidParameter {
                        name: "gamma",
                        value: gamma,
                        constraint: "finite and > 0",
                    });
                }
            }
            StepPolicy::Backtracking { l0, kappa, xi } => {
                if !(l0 > 0.0 && l0.is_finite()) {
                    return Err(CoreError::InvalidParameter {
                        name: "L0",
                        value: l0,
                        constraint: "finite and > 0",
                    });
                }
                if !(kappa > 0.0 && kappa < 1.0) {
                    return Err(CoreError::InvalidParameter {
                        name: "kappa",
                        value: kappa,
                        constraint: "in (0, 1)",
                    });
                }
                if !(xi > 0.0 && xi <= 1.0) {
                    return Err(CoreError::InvalidParameter {
                        name: "xi",
                        value: xi,
                        constraint: "in (0, 1]",
                    });
                }
            }
        }
        if self.max_iters == 0 {
            return Err(CoreError::InvalidParameter {
                name: "max_iters",
                value: 0.0,
                constraint: ">= 1",
            });
        }
        if self.record_every == 0 {
            return Err(CoreError::InvalidParameter {
                name: "record_every",
                value: 0.0,
                constraint: ">= 1",
            });
        }
        if !(self.grad_tol >= 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "grad_tol",
                value: self.grad_tol,
                constraint: ">= 0",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    GradTol,
}

/// Iteration history of one solver run.
///
/// `f_values` and `rel_errors` carry one entry per visited iterate
/// (`iterations_run + 1` values, starting at x0); `l_history` and
/// `backtrack_counts` carry one entry per executed step. `rel_errors` is
/// empty when the measurement set has no ground truth.
#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub iterates: Vec<(usize, DVector<f64>)>,
    pub f_values: Vec<f64>,
    pub rel_errors: Vec<f64>,
    pub l_history: Vec<f64>,
    pub backtrack_counts: Vec<usize>,
    pub final_x: DVector<f64>,
    pub iterations_run: usize,
    pub stop_reason: StopReason,
}

impl SolverTrace {
    pub fn final_rel_error(&self) -> Option<f64> {
        self.rel_errors.last().copied()
    }
}

/// One mirror-descent step `grad_psi_star(grad_psi(x) - gamma * grad)`.
pub fn mirror_step(x: &DVector<f64>, gamma: f64, grad: &DVector<f64>) -> Result<DVector<f64>> {
    if x.len() != grad.len() {
        return Err(CoreError::DimensionMismatch {
            context: "mirror_step",
            expected: x.len(),
            got: grad.len(),
        });
    }
    let mut z = grad_psi(x);
    z.axpy(-gamma, grad, 1.0);
    if !z.norm_squared().is_finite() {
        // diverging iterates overflow here first (entries can be finite
        // while the squared norm is not); report instead of letting the
        // mirror-map root finder hit its finiteness assertion
        return Err(CoreError::non_finite_at(
            "mirror_step",
            "mirror point grad_psi(x) - gamma*grad overflowed".to_string(),
        ));
    }
    Ok(grad_psi_star(&z))
}

struct TraceBuilder {
    trace: SolverTrace,
    record_every: usize,
    truth: Option<DVector<f64>>,
}

impl TraceBuilder {
    fn new(meas: &MeasurementSet, x0: &DVector<f64>, f0: f64, record_every: usize) -> Self {
        let truth = meas.truth.clone();
        let mut trace = SolverTrace {
            iterates: vec![(0, x0.clone())],
            f_values: vec![f0],
            rel_errors: Vec::new(),
            l_history: Vec::new(),
            backtrack_counts: Vec::new(),
            final_x: x0.clone(),
            iterations_run: 0,
            stop_reason: StopReason::MaxIters,
        };
        if let Some(t) = &truth {
            trace
                .rel_errors
                .push(metrics::dist_to_signs(x0, t).unwrap() / t.norm());
        }
        TraceBuilder {
            trace,
            record_every,
            truth,
        }
    }

    fn push_step(&mut self, k_next: usize, x: &DVector<f64>, fx: f64) {
        self.trace.f_values.push(fx);
        if let Some(t) = &self.truth {
            self.trace
                .rel_errors
                .push(metrics::dist_to_signs(x, t).unwrap() / t.norm());
        }
        if k_next.is_multiple_of(self.record_every) {
            self.trace.iterates.push((k_next, x.clone()));
        }
        self.trace.iterations_run = k_next;
    }

    fn finish(mut self, x: DVector<f64>, stop_reason: StopReason) -> SolverTrace {
        let k = self.trace.iterations_run;
        if self.trace.iterates.last().map(|(i, _)| *i) != Some(k) {
            self.trace.iterates.push((k, x.clone()));
        }
        self.trace.final_x = x;
        self.trace.stop_reason = stop_reason;
        self.trace
    }
}

fn ensure_finite_state(context: &'static str, k: usize, fx: f64, grad: &DVector<f64>) -> Result<()> {
    if !fx.is_finite() {
        return Err(CoreError::non_finite_at(
            context,
            format!("f(x_{k}) = {fx}"),
        ));
    }
    if !grad.iter().all(|g| g.is_finite()) {
        return Err(CoreError::non_finite_at(
            context,
            format!("gradient at iteration {k}"),
        ));
    }
    Ok(())
}

/// Mirror descent on `f` with the quartic entropy.
///
/// Runs until `max_iters` steps or until the gradient norm drops to
/// `grad_tol`. Backtracking failures beyond [`BACKTRACK_TRIAL_CAP`] and any
/// non-finite value abort with an error rather than returning a poisoned
/// trace.
pub fn mirror_descent(
    meas: &MeasurementSet,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    if x0.len() != meas.n() {
        return Err(CoreError::DimensionMismatch {
            context: "mirror_descent",
            expected: meas.n(),
            got: x0.len(),
        });
    }

    let mut x = x0.clone();
    let (mut fx, mut grad) = f_value_and_grad(meas, &x)?;
    ensure_finite_state("mirror_descent", 0, fx, &grad)?;
    let mut builder = TraceBuilder::new(meas, &x, fx, cfg.record_every);

    let mut l_estimate = match cfg.step_policy {
        StepPolicy::Backtracking { l0, .. } => l0,
        StepPolicy::Constant { .. } => 0.0,
    };

    let mut stop = StopReason::MaxIters;
    for k in 0..cfg.max_iters {
        if grad.norm() <= cfg.grad_tol {
            stop = StopReason::GradTol;
            break;
        }

        let (x_next, f_next, grad_next) = match cfg.step_policy {
            StepPolicy::Constant { gamma } => {
                let cand = mirror_step(&x, gamma, &grad)?;
                let (fc, gc) = f_value_and_grad(meas, &cand)?;
                builder.trace.backtrack_counts.push(0);
                (cand, fc, gc)
            }
            StepPolicy::Backtracking { kappa, xi, .. } => {
                let mut trials = 0usize;
                loop {
                    let gamma = (1.0 - kappa) / l_estimate;
                    let cand = mirror_step(&x, gamma, &grad)?;
                    let (fc, gc) = f_value_and_grad(meas, &cand)?;
                    let d_f = fc - fx - grad.dot(&(&cand - &x));
                    let d_psi = bregman_psi(&cand, &x)?;
                    if d_f <= xi * l_estimate * d_psi + ACCEPT_SLACK * (1.0 + fx.abs()) {
                        builder.trace.l_history.push(l_estimate);
                        builder.trace.backtrack_counts.push(trials);
                        l_estimate *= xi;
                        break (cand, fc, gc);
                    }
                    trials += 1;
                    if trials >= BACKTRACK_TRIAL_CAP {
                        return Err(CoreError::BacktrackingStalled {
                            trials,
                            iteration: k,
                        });
                    }
                    l_estimate /= xi;
                }
            }
        };

        ensure_finite_state("mirror_descent", k + 1, f_next, &grad_next)?;
        x = x_next;
        fx = f_next;
        grad = grad_next;
        builder.push_step(k + 1, &x, fx);
    }

    Ok(builder.finish(x, stop))
}

/// Wirtinger flow: plain gradient descent `x_{k+1} = x_k - (mu_k/||x0||²) grad f(x_k)`
/// on the same objective, as a baseline.
///
/// The step policy is reused as follows: `Constant { gamma }` means a fixed
/// `mu = gamma` (0.1 is the customary default), while `Backtracking { .. }`
/// selects the ramp heuristic `mu_k = min(1 - exp(-(k+1)/330), 0.2)` from the
/// method's original description. No monotonicity of f is guaranteed.
pub fn wirtinger_flow(
    meas: &MeasurementSet,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    if x0.len() != meas.n() {
        return Err(CoreError::DimensionMismatch {
            context: "wirtinger_flow",
            expected: meas.n(),
            got: x0.len(),
        });
    }
    let scale = x0.norm_squared();
    if scale <= 0.0 {
        return Err(CoreError::InvalidParameter {
            name: "||x0||",
            value: 0.0,
            constraint: "> 0 (the step is mu/||x0||²)",
        });
    }

    let mut x = x0.clone();
    let (mut fx, mut grad) = f_value_and_grad(meas, &x)?;
    ensure_finite_state("wirtinger_flow", 0, fx, &grad)?;
    let mut builder = TraceBuilder::new(meas, &x, fx, cfg.record_every);

    let mut stop = StopReason::MaxIters;
    for k in 0..cfg.max_iters {
        if grad.norm() <= cfg.grad_tol {
            stop = StopReason::GradTol;
            break;
        }
        let mu = match cfg.step_policy {
            StepPolicy::Constant { gamma } => gamma,
            StepPolicy::Backtracking { .. } => (1.0 - (-((k + 1) as f64) / 330.0).exp()).min(0.2),
        };
        x.axpy(-mu / scale, &grad, 1.0);
        let (f_next, grad_next) = f_value_and_grad(meas, &x)?;
        ensure_finite_state("wirtinger_flow", k + 1, f_next, &grad_next)?;
        fx = f_next;
        grad = grad_next;
        builder.trace.backtrack_counts.push(0);
        builder.push_step(k + 1, &x, fx);
    }
    let _ = fx;

    Ok(builder.finish(x, stop))
}

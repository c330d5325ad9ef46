use thiserror::Error;

/// Errors surfaced by the library. Numerical routines fail loudly rather than
/// returning poisoned values: any non-finite intermediate aborts the caller.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value encountered in {context}{}", detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default())]
    NonFinite {
        context: &'static str,
        detail: Option<String>,
    },

    #[error("invalid parameter {name}={value}: must satisfy {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("backtracking failed to satisfy the descent test after {trials} step-size trials at iteration {iteration}")]
    BacktrackingStalled { trials: usize, iteration: usize },

    #[error("dense Hessian requested for n={n}, limit is {limit}; use the Hessian-vector product instead")]
    HessianTooLarge { n: usize, limit: usize },

    #[error("{op} is not available for this sensing ensemble: {reason}")]
    UnsupportedEnsemble {
        op: &'static str,
        reason: &'static str,
    },

    #[error("signal-to-noise preconditions violated: {0}")]
    SnrViolated(String),
}

impl CoreError {
    pub(crate) fn non_finite_at(context: &'static str, detail: String) -> Self {
        CoreError::NonFinite {
            context,
            detail: Some(detail),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;

//! Error metrics for a sign-ambiguous recovery problem.
//!
//! Intensities cannot distinguish x from -x, so all scoring is against the
//! pair X̄ = {±x̄}.

use nalgebra::DVector;

use crate::error::{CoreError, Result};

/// Gate used when the instance is exactly noiseless; with ε = 0 the scaled
/// threshold collapses to zero, so success is declared below this relative
/// error instead.
pub const NOISELESS_THRESHOLD: f64 = 1e-5;

/// Outcome of scoring one recovered vector against the truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// min(‖x − x̄‖, ‖x + x̄‖)
    pub dist: f64,
    /// dist / ‖x̄‖
    pub rel_error: f64,
    pub success: bool,
    pub threshold: f64,
}

/// Distance to the sign pair: `min(‖x − truth‖, ‖x + truth‖)`.
pub fn dist_to_signs(x: &DVector<f64>, truth: &DVector<f64>) -> Result<f64> {
    if x.len() != truth.len() {
        return Err(CoreError::DimensionMismatch {
            context: "dist_to_signs",
            expected: truth.len(),
            got: x.len(),
        });
    }
    Ok((x - truth).norm().min((x + truth).norm()))
}

/// Success gate `2‖ε‖ / sqrt(m·σ)`, with the noiseless floor.
pub fn success_threshold(eps: &DVector<f64>, m: usize, sigma: f64) -> f64 {
    assert!(sigma > 0.0, "sigma must be positive");
    let eps_norm = eps.norm();
    if eps_norm == 0.0 {
        NOISELESS_THRESHOLD
    } else {
        2.0 * eps_norm / ((m as f64) * sigma).sqrt()
    }
}

/// Assemble the report: distance, relative error, and the success predicate
/// `rel_error < threshold`.
pub fn evaluate(x: &DVector<f64>, truth: &DVector<f64>, threshold: f64) -> Result<ErrorReport> {
    let dist = dist_to_signs(x, truth)?;
    let rel_error = dist / truth.norm();
    Ok(ErrorReport {
        dist,
        rel_error,
        success: rel_error < threshold,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dist_examples() {
        let truth = DVector::from_vec(vec![3.0, 4.0]);
        assert_eq!(dist_to_signs(&truth, &truth).unwrap(), 0.0);
        assert_eq!(dist_to_signs(&(-&truth), &truth).unwrap(), 0.0);
        assert_eq!(dist_to_signs(&DVector::zeros(2), &truth).unwrap(), 5.0);
        assert!(dist_to_signs(&DVector::zeros(3), &truth).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(success_threshold(&DVector::zeros(4), 100, 1.0), 1e-5);
        let eps = DVector::from_vec(vec![1.0]);
        assert_eq!(success_threshold(&eps, 100, 1.0), 0.2);
        let twice = success_threshold(&(&eps * 2.0), 100, 1.0);
        assert_eq!(twice, 0.4);
    }

    #[test]
    fn evaluate_examples() {
        let truth = DVector::from_vec(vec![0.0, 2.0]);
        let ok = evaluate(&truth, &truth, 0.5).unwrap();
        assert!(ok.success);
        assert_eq!(ok.rel_error, 0.0);
        let bad = evaluate(&DVector::zeros(2), &truth, 0.5).unwrap();
        assert_eq!(bad.rel_error, 1.0);
        assert!(!bad.success);
    }

    proptest! {
        #[test]
        fn report_is_sign_invariant_and_consistent(
            xv in proptest::collection::vec(-5.0f64..5.0, 3),
            tv in proptest::collection::vec(0.1f64..5.0, 3),
            threshold in 1e-6f64..2.0,
        ) {
            let x = DVector::from_vec(xv);
            let truth = DVector::from_vec(tv);
            let a = evaluate(&x, &truth, threshold).unwrap();
            let b = evaluate(&(-&x), &truth, threshold).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!(a.dist >= 0.0);
            prop_assert!((a.rel_error - a.dist / truth.norm()).abs() < 1e-15);
            prop_assert_eq!(a.success, a.rel_error < threshold);
            // dist to the pair never exceeds the one-sign distance
            prop_assert!(a.dist <= (&x - &truth).norm());
        }
    }
}

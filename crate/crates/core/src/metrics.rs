//! Estimation error and support-recovery accuracy.
//!
//! A position counts as positive when the true coefficient is nonzero and as
//! predicted positive when the estimate is nonzero. Both tests are exact.

use crate::error::{GagaError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationReport<T> {
    pub err: T,
    pub acc: T,
    pub true_positives: usize,
    pub true_negatives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

fn check_lengths<T>(estimate: &[T], truth: &[T]) -> Result<()> {
    if estimate.len() != truth.len() {
        return Err(GagaError::DimensionError(format!(
            "estimate has {} entries, truth has {}",
            estimate.len(),
            truth.len()
        )));
    }
    Ok(())
}

/// `‖estimate − truth‖₂`.
pub fn err<T: Real>(estimate: &[T], truth: &[T]) -> Result<T> {
    check_lengths(estimate, truth)?;
    let scale = estimate
        .iter()
        .zip(truth)
        .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
    if scale == T::zero() || !scale.is_finite() {
        return Ok(scale);
    }
    let sum = estimate
        .iter()
        .zip(truth)
        .map(|(&a, &b)| {
            let d = (a - b) / scale;
            d * d
        })
        .fold(T::zero(), |s, v| s + v);
    Ok(scale * sum.sqrt())
}

/// Confusion counts of the zero patterns, `acc = (tp + tn) / p`, and `err`.
pub fn acc<T: Real>(estimate: &[T], truth: &[T]) -> Result<EvaluationReport<T>> {
    let err = err(estimate, truth)?;
    let (mut tp, mut tn, mut fp, mut fneg) = (0, 0, 0, 0);
    for (&e, &t) in estimate.iter().zip(truth) {
        match (t != T::zero(), e != T::zero()) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (false, true) => fp += 1,
            (true, false) => fneg += 1,
        }
    }
    let p = estimate.len();
    let acc = if p == 0 {
        T::one()
    } else {
        T::of_usize(tp + tn) / T::of_usize(p)
    };
    Ok(EvaluationReport {
        err,
        acc,
        true_positives: tp,
        true_negatives: tn,
        false_positives: fp,
        false_negatives: fneg,
    })
}

//! Scalar dynamics of the tuning update on an orthogonal design.
//!
//! With `XᵀX = diag(σ)` each coordinate evolves on its own:
//! `bᵏ⁺¹ = f(bᵏ)` with `f(x) = α (x + σ)² / (x + σ + z)` and `z = (aⱼᵀy)²`.
//! Starting from zero the sequence increases monotonically. It converges to
//! the smaller root of `f(x) = x` when `z ≥ ((2α − 1) + 2√(α(α − 1))) σ`
//! and grows geometrically otherwise. These routines are the independent
//! oracle the solver tests compare against.

use crate::error::{GagaError, Result};
use crate::scalar::Real;

/// Relative step size below which a trajectory counts as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-12;

/// Multiple of the threshold beyond which a trajectory counts as divergent.
pub const ESCAPE_FACTOR: f64 = 1e3;

/// Long-run behaviour predicted for a coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification<T> {
    Convergent { fixed_point: T },
    Divergent,
}

/// One coordinate's `(z, σ, α)` with its threshold and predicted behaviour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarRegime<T> {
    pub z: T,
    pub sigma: T,
    pub alpha: T,
    pub threshold: T,
    pub classification: Classification<T>,
}

impl<T: Real> ScalarRegime<T> {
    pub fn new(z: T, sigma: T, alpha: T) -> Result<Self> {
        if !(z >= T::zero()) || !z.is_finite() {
            return Err(GagaError::InvalidInput(format!("z must be nonnegative, got {z}")));
        }
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(GagaError::InvalidInput(format!("sigma must be positive, got {sigma}")));
        }
        let threshold = convergence_threshold(alpha, sigma)?;
        let mut regime = Self {
            z,
            sigma,
            alpha,
            threshold,
            classification: Classification::Divergent,
        };
        if let Some(fixed_point) = closed_form_fixed_point(&regime) {
            regime.classification = Classification::Convergent { fixed_point };
        }
        Ok(regime)
    }

    /// `(z − (2α − 1)σ)² − 4α(α − 1)σ²`, zero exactly at the threshold.
    pub fn discriminant(&self) -> T {
        let (two, four) = (T::lit(2.0), T::lit(4.0));
        let w = self.z - (two * self.alpha - T::one()) * self.sigma;
        w * w - four * self.alpha * (self.alpha - T::one()) * self.sigma * self.sigma
    }
}

/// `f(x) = α (x + σ)² / (x + σ + z)`.
pub fn map_value<T: Real>(x: T, regime: &ScalarRegime<T>) -> T {
    let s = x + regime.sigma;
    regime.alpha * s * s / (s + regime.z)
}

/// `((2α − 1) + 2√(α(α − 1))) σ`.
pub fn convergence_threshold<T: Real>(alpha: T, sigma: T) -> Result<T> {
    if !(alpha > T::one()) || !alpha.is_finite() {
        return Err(GagaError::InvalidAlpha(alpha.to_f64_lossy()));
    }
    let two = T::lit(2.0);
    Ok(((two * alpha - T::one()) + two * (alpha * (alpha - T::one())).sqrt()) * sigma)
}

/// Smaller root of `f(x) = x` when `z` reaches the threshold.
///
/// Evaluated as `2ασ² / (w + √disc)` with `w = z − (2α − 1)σ`, which equals
/// `(w − √disc) / (2(α − 1))` without the cancellation for large `z`.
pub fn closed_form_fixed_point<T: Real>(regime: &ScalarRegime<T>) -> Option<T> {
    if regime.z < regime.threshold {
        return None;
    }
    let two = T::lit(2.0);
    let w = regime.z - (two * regime.alpha - T::one()) * regime.sigma;
    // rounding can push the discriminant just below zero at the threshold
    let disc = regime.discriminant().max(T::zero());
    Some(two * regime.alpha * regime.sigma * regime.sigma / (w + disc.sqrt()))
}

/// Outcome of iterating the scalar map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryClass<T> {
    Convergent { limit: T },
    Divergent,
    /// Neither criterion met within the iteration budget; near the threshold
    /// convergence is sublinear.
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub classification: TrajectoryClass<T>,
    /// `b⁰ = 0, b¹, …`, strictly increasing.
    pub values: Vec<T>,
}

/// Iterates `bᵏ⁺¹ = f(bᵏ)` from zero for at most `max_iter` steps.
///
/// Converged once `|bᵏ⁺¹ − bᵏ| < 1e-12 (1 + bᵏ)`; divergent once `bᵏ`
/// exceeds `1e3` times the threshold.
pub fn classify_trajectory<T: Real>(regime: &ScalarRegime<T>, max_iter: usize) -> Result<Trajectory<T>> {
    if max_iter == 0 {
        return Err(GagaError::InvalidInput("max_iter must be at least 1".into()));
    }
    let tol = T::lit(CONVERGENCE_TOLERANCE);
    let escape = T::lit(ESCAPE_FACTOR) * regime.threshold;
    let mut values = Vec::with_capacity(max_iter.min(1 << 16) + 1);
    let mut b = T::zero();
    values.push(b);
    for _ in 0..max_iter {
        let next = map_value(b, regime);
        if next <= b {
            // stalled in floating point: b is the limit
            return Ok(Trajectory {
                classification: TrajectoryClass::Convergent { limit: b },
                values,
            });
        }
        values.push(next);
        if next - b < tol * (T::one() + b) {
            return Ok(Trajectory {
                classification: TrajectoryClass::Convergent { limit: next },
                values,
            });
        }
        if next > escape {
            return Ok(Trajectory {
                classification: TrajectoryClass::Divergent,
                values,
            });
        }
        b = next;
    }
    Ok(Trajectory {
        classification: TrajectoryClass::Undecided,
        values,
    })
}

/// Large-sample tuning limit `α / β*²` of a nonzero coefficient.
pub fn asymptotic_tuning_limit<T: Real>(beta_star: T, alpha: T) -> Result<T> {
    if !(alpha > T::one()) {
        return Err(GagaError::InvalidAlpha(alpha.to_f64_lossy()));
    }
    if beta_star == T::zero() || !beta_star.is_finite() {
        return Err(GagaError::InvalidInput(
            "tuning limit diverges for a zero coefficient".into(),
        ));
    }
    Ok(alpha / (beta_star * beta_star))
}

/// Sparsity constant growing like `√(log n)`: `max(2, √(ln n))`.
pub fn sample_size_alpha<T: Real>(n: usize) -> T {
    T::lit(2.0).max(T::of_usize(n.max(1)).ln().sqrt())
}

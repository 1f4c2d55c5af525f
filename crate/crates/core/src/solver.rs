//! Alternating ridge solve / tuning update with hard truncation.
//!
//! Every iteration solves `(XᵀX + Bᵏ) β = Xᵀy` for the current per-coefficient
//! penalties and then moves each penalty to
//! `α / (β̂ⱼ² / τ² + ((XᵀX + Bᵏ)⁻¹)ⱼⱼ)`. Coefficients whose penalty keeps
//! growing are shrunk away; after `K` iterations the final ridge estimate is
//! hard-truncated against the variance gap between the unpenalized and the
//! penalized inverse diagonals.

use crate::error::{GagaError, Result};
use crate::model::{
    build_gram, FitTrace, GagaConfig, GramSystem, IterationRecord, PenalizedSolve, RegressionProblem,
    SignalEstimate, VarianceMode,
};
use crate::scalar::Real;

/// Relative floor applied to a non-positive variance estimate.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Iterate of the solver.
///
/// `tuning` and `variance` are the values the next step will use; `beta` and
/// `inv_diag` come from the previous step's solve (zero before the first).
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState<T> {
    pub iteration: usize,
    pub tuning: Vec<T>,
    pub beta: Vec<T>,
    pub inv_diag: Vec<T>,
    pub variance: T,
}

impl<T: Real> SolverState<T> {
    /// `b⁰ = 0`, `(τ²)⁰ = 1`.
    pub fn initial(p: usize) -> Self {
        Self::with_variance(p, T::one())
    }

    pub fn with_variance(p: usize, variance: T) -> Self {
        Self {
            iteration: 0,
            tuning: vec![T::zero(); p],
            beta: vec![T::zero(); p],
            inv_diag: vec![T::zero(); p],
            variance,
        }
    }
}

/// A variance update and whether it had to be floored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceUpdate<T> {
    pub value: T,
    pub floored: bool,
}

/// `1e-12 (yᵀy / n + 1)`.
pub fn variance_floor<T: Real>(gram: &GramSystem<T>) -> T {
    let n = T::of_usize(gram.observations().max(1));
    T::lit(VARIANCE_FLOOR) * (gram.response_sq_norm() / n + T::one())
}

/// One tuning update: solve with `bᵏ`, then form `bᵏ⁺¹` and `(τ²)ᵏ⁺¹`.
pub fn gaga_step<T: Real>(
    state: &SolverState<T>,
    gram: &GramSystem<T>,
    config: &GagaConfig<T>,
) -> Result<SolverState<T>> {
    config.validate()?;
    if state.tuning.len() != gram.dim() {
        return Err(GagaError::DimensionError(format!(
            "state has {} tuning values for a {}-dimensional system",
            state.tuning.len(),
            gram.dim()
        )));
    }
    let solve = gram.solve_penalized(&state.tuning, config.resolved_rank_tolerance(gram))?;
    let (next, _) = advance(state, solve, gram, config, config.resolved_clamp(gram));
    Ok(next)
}

fn advance<T: Real>(
    state: &SolverState<T>,
    solve: PenalizedSolve<T>,
    gram: &GramSystem<T>,
    config: &GagaConfig<T>,
    clamp: T,
) -> (SolverState<T>, bool) {
    let tau2 = state.variance;
    let tuning = solve
        .solution
        .iter()
        .zip(&solve.inverse_diagonal)
        .map(|(&b, &d)| {
            let t = config.alpha / (b * b / tau2 + d);
            // NaN only from a non-finite solve
            if t.is_nan() { clamp } else { t.min(clamp).max(T::zero()) }
        })
        .collect();
    let (variance, floored) = match config.variance_mode {
        VarianceMode::Fixed => (tau2, false),
        VarianceMode::Estimated => {
            let u = estimate_variance_em(&solve, tau2, gram, gram.observations());
            (u.value, u.floored)
        }
    };
    let next = SolverState {
        iteration: state.iteration + 1,
        tuning,
        beta: solve.solution,
        inv_diag: solve.inverse_diagonal,
        variance,
    };
    (next, floored)
}

/// Residual variance `‖Xβ̂ − y‖² / n`.
pub fn estimate_variance_residual<T: Real>(beta: &[T], problem: &RegressionProblem<T>) -> Result<T> {
    if beta.len() != problem.p() {
        return Err(GagaError::DimensionError(format!(
            "beta has {} entries for {} predictors",
            beta.len(),
            problem.p()
        )));
    }
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(GagaError::InvalidInput("non-finite coefficient".into()));
    }
    let fitted = problem.design().mul_vec(beta);
    let rss = fitted
        .iter()
        .zip(problem.response())
        .fold(T::zero(), |acc, (&f, &y)| acc + (f - y) * (f - y));
    Ok(rss / T::of_usize(problem.n()))
}

/// Expected residual variance under the current posterior:
///
/// `(yᵀy − 2β̂ᵀXᵀy + β̂ᵀXᵀXβ̂ + τ² tr(D XᵀX)) / n` with `D = (XᵀX + B)⁻¹`.
///
/// The trace uses `tr(D XᵀX) = p − Σⱼ Dⱼⱼ bⱼ`, so only the inverse diagonal
/// is needed. Non-positive results are replaced by [`variance_floor`].
pub fn estimate_variance_em<T: Real>(
    solve: &PenalizedSolve<T>,
    variance: T,
    gram: &GramSystem<T>,
    n: usize,
) -> VarianceUpdate<T> {
    let beta = &solve.solution;
    let two = T::lit(2.0);
    let cross_term = beta
        .iter()
        .zip(gram.cross())
        .fold(T::zero(), |acc, (&b, &c)| acc + b * c);
    let shrink = solve
        .inverse_diagonal
        .iter()
        .zip(&solve.penalty)
        .fold(T::zero(), |acc, (&d, &b)| acc + d * b);
    let trace = T::of_usize(beta.len()) - shrink;
    let total = gram.response_sq_norm() - two * cross_term + gram.quadratic_form(beta) + variance * trace;
    let value = total / T::of_usize(n.max(1));
    let floor = variance_floor(gram);
    if value > floor && value.is_finite() {
        VarianceUpdate { value, floored: false }
    } else {
        VarianceUpdate { value: floor, floored: true }
    }
}

/// Hard truncation of a final estimate.
///
/// Coefficient `j` is zeroed when
/// `β̂ⱼ² < τ² ((XᵀX)⁻¹)ⱼⱼ − τ² ((XᵀX + B*)⁻¹)ⱼⱼ`.
pub fn hard_truncate<T: Real>(
    beta_star: &[T],
    tuning_star: &[T],
    gram: &GramSystem<T>,
    variance: T,
) -> Result<SignalEstimate<T>> {
    let p = gram.dim();
    if beta_star.len() != p || tuning_star.len() != p {
        return Err(GagaError::DimensionError(format!(
            "estimate of length {} and tuning of length {} for dimension {p}",
            beta_star.len(),
            tuning_star.len()
        )));
    }
    let tol = gram.default_rank_tolerance();
    let unpenalized = gram
        .solve_penalized(&vec![T::zero(); p], tol)
        .map_err(|e| match e {
            GagaError::SingularSystem { pivot } => GagaError::SingularGram { pivot },
            other => other,
        })?;
    let penalized = gram.solve_penalized(tuning_star, tol)?;
    let (coefficients, support) = truncate(
        beta_star,
        &penalized.inverse_diagonal,
        &unpenalized.inverse_diagonal,
        variance,
    );
    Ok(SignalEstimate {
        coefficients,
        support,
        tuning: tuning_star.to_vec(),
        estimated_variance: variance,
        trace: None,
    })
}

fn truncate<T: Real>(beta: &[T], penalized_inv: &[T], unpenalized_inv: &[T], variance: T) -> (Vec<T>, Vec<bool>) {
    beta.iter()
        .zip(penalized_inv.iter().zip(unpenalized_inv))
        .map(|(&b, (&pen, &unpen))| {
            let gap = variance * unpen - variance * pen;
            if b * b < gap {
                (T::zero(), false)
            } else {
                (b, true)
            }
        })
        .unzip()
}

/// Fits a problem: builds its gram system and runs [`gaga_fit_gram`].
pub fn gaga_fit<T: Real>(problem: &RegressionProblem<T>, config: &GagaConfig<T>) -> Result<SignalEstimate<T>> {
    config.validate()?;
    let gram = build_gram(problem)?;
    gaga_fit_gram(&gram, config)
}

/// Runs `K` iterations from `b⁰ = 0`, forms `b* = b^K / α`, solves once more
/// and truncates.
///
/// In fixed-variance mode `τ²` is the system's known noise variance, or 1.
/// The unpenalized inverse diagonal needed by truncation is the one from the
/// first iteration, whose penalty is zero; a singular first system is
/// therefore reported as [`GagaError::SingularGram`].
pub fn gaga_fit_gram<T: Real>(gram: &GramSystem<T>, config: &GagaConfig<T>) -> Result<SignalEstimate<T>> {
    config.validate()?;
    let p = gram.dim();
    let tol = config.resolved_rank_tolerance(gram);
    let clamp = config.resolved_clamp(gram);
    let initial_variance = match config.variance_mode {
        VarianceMode::Fixed => gram.noise_variance().unwrap_or_else(T::one),
        VarianceMode::Estimated => T::one(),
    };
    let mut state = SolverState::with_variance(p, initial_variance);
    let mut floored = false;
    let mut unpenalized_inv: Option<Vec<T>> = None;
    let mut records = Vec::new();
    for k in 0..config.iterations {
        let solve = gram.solve_penalized(&state.tuning, tol).map_err(|e| match (k, e) {
            (0, GagaError::SingularSystem { pivot }) => GagaError::SingularGram { pivot },
            (_, e) => e,
        })?;
        if k == 0 {
            unpenalized_inv = Some(solve.inverse_diagonal.clone());
        }
        if config.record_trace {
            records.push(IterationRecord {
                iteration: k,
                tuning: state.tuning.clone(),
                beta: solve.solution.clone(),
                variance: state.variance,
                variance_floored: floored,
            });
        }
        let (next, f) = advance(&state, solve, gram, config, clamp);
        state = next;
        floored = f;
    }
    let tuning_star: Vec<T> = state.tuning.iter().map(|&b| b / config.alpha).collect();
    let final_solve = gram.solve_penalized(&tuning_star, tol)?;
    let variance = state.variance;
    let unpenalized_inv = unpenalized_inv.expect("at least one iteration");
    let (coefficients, support) = truncate(
        &final_solve.solution,
        &final_solve.inverse_diagonal,
        &unpenalized_inv,
        variance,
    );
    let trace = config.record_trace.then(|| FitTrace {
        iterations: records,
        final_tuning: state.tuning.clone(),
        final_variance: variance,
    });
    Ok(SignalEstimate {
        coefficients,
        support,
        tuning: tuning_star,
        estimated_variance: variance,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use approx::assert_relative_eq;

    fn orthonormal_system(cross: Vec<f64>, yty: f64, n: usize) -> GramSystem<f64> {
        let p = cross.len();
        GramSystem::from_dense(Matrix::identity(p), cross, yty, n).unwrap()
    }

    #[test]
    fn zero_response_first_step() {
        let gram = orthonormal_system(vec![0.0, 0.0], 0.0, 4);
        let config = GagaConfig::new(1, 2.0);
        let next = gaga_step(&SolverState::initial(2), &gram, &config).unwrap();
        assert_eq!(next.beta, vec![0.0, 0.0]);
        assert_eq!(next.inv_diag, vec![1.0, 1.0]);
        assert_eq!(next.tuning, vec![2.0, 2.0]);
        assert_eq!(next.iteration, 1);
        assert_eq!(next.variance, 1.0);
    }

    #[test]
    fn tuning_update_formula() {
        // b = 1 and cross = 2 give beta = 1, D = 0.5
        let gram = orthonormal_system(vec![2.0], 4.0, 4);
        let state = SolverState {
            iteration: 3,
            tuning: vec![1.0],
            beta: vec![0.0],
            inv_diag: vec![0.0],
            variance: 1.0,
        };
        let next = gaga_step(&state, &gram, &GagaConfig::new(1, 2.0)).unwrap();
        assert_relative_eq!(next.beta[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(next.inv_diag[0], 0.5, max_relative = 1e-15);
        assert_relative_eq!(next.tuning[0], 4.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn step_matches_scalar_recursion_on_orthogonal_design() {
        let sigma = [900.0, 1100.0, 1000.0];
        let cross = [95.0, -3200.0, 11.0];
        let gram = GramSystem::from_dense(Matrix::from_diagonal(&sigma), cross.to_vec(), 0.0, 1000).unwrap();
        let config = GagaConfig::new(1, 2.0).with_tuning_clamp(f64::MAX);
        let mut state = SolverState::initial(3);
        let mut scalar = [0.0f64; 3];
        for _ in 0..30 {
            state = gaga_step(&state, &gram, &config).unwrap();
            for j in 0..3 {
                let z = cross[j] * cross[j];
                scalar[j] = 2.0 * (scalar[j] + sigma[j]).powi(2) / (scalar[j] + sigma[j] + z);
                assert_relative_eq!(state.tuning[j], scalar[j], max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn residual_variance_examples() {
        let x = Matrix::<f64>::identity(2);
        let p = RegressionProblem::new(x.clone(), vec![1.0, 1.0]).unwrap();
        assert_eq!(estimate_variance_residual(&[0.0, 0.0], &p).unwrap(), 1.0);
        assert_eq!(estimate_variance_residual(&[1.0, 1.0], &p).unwrap(), 0.0);
        assert!(estimate_variance_residual(&[1.0], &p).is_err());
    }

    #[test]
    fn em_variance_hand_value() {
        // orthonormal, beta = 0, D = I, tau2 = 1, yᵀy = 4, n = 4, p = 2
        let gram = orthonormal_system(vec![0.0, 0.0], 4.0, 4);
        let solve = PenalizedSolve {
            penalty: vec![0.0, 0.0],
            solution: vec![0.0, 0.0],
            inverse_diagonal: vec![1.0, 1.0],
        };
        let u = estimate_variance_em(&solve, 1.0, &gram, 4);
        assert_eq!(u.value, 1.5);
        assert!(!u.floored);
    }

    #[test]
    fn em_variance_floors_non_positive() {
        let gram = orthonormal_system(vec![0.0], 0.0, 4);
        let solve = PenalizedSolve {
            penalty: vec![1e300],
            solution: vec![0.0],
            inverse_diagonal: vec![1e-300],
        };
        let u = estimate_variance_em(&solve, 1.0, &gram, 4);
        assert!(u.floored);
        assert_eq!(u.value, variance_floor(&gram));
        assert!(u.value > 0.0);
    }

    #[test]
    fn zero_tuning_truncates_nothing() {
        let gram = orthonormal_system(vec![0.1, -0.2, 0.0], 1.0, 5);
        let est = hard_truncate(&[0.1, -0.2, 0.0], &[0.0, 0.0, 0.0], &gram, 1.0).unwrap();
        assert_eq!(est.support, vec![true, true, true]);
        assert_eq!(est.coefficients, vec![0.1, -0.2, 0.0]);
    }

    #[test]
    fn truncation_threshold_hand_example() {
        // threshold = 1 - 1/(1+3) = 0.75
        let gram = orthonormal_system(vec![0.0, 0.0], 1.0, 5);
        let est = hard_truncate(&[0.5, 1.0], &[3.0, 3.0], &gram, 1.0).unwrap();
        assert_eq!(est.coefficients, vec![0.0, 1.0]);
        assert_eq!(est.support, vec![false, true]);
    }

    #[test]
    fn truncation_needs_invertible_gram() {
        let g = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        let gram = GramSystem::from_dense(g, vec![1.0, 1.0], 1.0, 1).unwrap();
        assert!(matches!(
            hard_truncate(&[0.0, 0.0], &[1.0, 1.0], &gram, 1.0),
            Err(GagaError::SingularGram { .. })
        ));
    }

    #[test]
    fn zero_response_gives_empty_support() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, -1.0]]);
        let problem = RegressionProblem::new(x, vec![0.0; 4]).unwrap();
        for mode in [VarianceMode::Fixed, VarianceMode::Estimated] {
            let est = gaga_fit(&problem, &GagaConfig::default().with_variance_mode(mode)).unwrap();
            assert_eq!(est.coefficients, vec![0.0, 0.0]);
            assert_eq!(est.support_size(), 0);
        }
    }

    #[test]
    fn first_iterate_is_least_squares() {
        let x = Matrix::from_rows(&[[1.0, 0.2], [0.3, 1.0], [1.0, 1.0], [2.0, -1.0], [0.5, 0.5]]);
        let y = vec![1.0, 2.0, 2.5, 0.0, 1.2];
        let problem = RegressionProblem::new(x.clone(), y.clone()).unwrap();
        let est = gaga_fit(&problem, &GagaConfig::new(3, 2.0).with_trace(true)).unwrap();
        let trace = est.trace.unwrap();
        let g = x.gram();
        let c = x.transpose_mul_vec(&y);
        // 2x2 normal equations by Cramer's rule
        let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        let ols = [
            (c[0] * g[(1, 1)] - g[(0, 1)] * c[1]) / det,
            (g[(0, 0)] * c[1] - g[(1, 0)] * c[0]) / det,
        ];
        assert_relative_eq!(trace.iterations[0].beta[0], ols[0], max_relative = 1e-12);
        assert_relative_eq!(trace.iterations[0].beta[1], ols[1], max_relative = 1e-12);
        assert_eq!(trace.iterations.len(), 3);
        assert_eq!(trace.tuning_path(0).len(), 4);
    }

    #[test]
    fn more_predictors_than_rows_is_singular_gram() {
        let x = Matrix::from_rows(&[[1.0, 2.0, 3.0], [0.0, 1.0, 1.0]]);
        let problem = RegressionProblem::new(x, vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            gaga_fit(&problem, &GagaConfig::default()),
            Err(GagaError::SingularGram { .. })
        ));
    }

    #[test]
    fn known_noise_variance_is_used_in_fixed_mode() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let y = vec![0.3, 0.1, 0.5];
        let a = RegressionProblem::with_noise_variance(x.clone(), y.clone(), Some(4.0)).unwrap();
        let est = gaga_fit(&a, &GagaConfig::new(5, 2.0)).unwrap();
        assert_eq!(est.estimated_variance, 4.0);
        let b = RegressionProblem::new(x, y).unwrap();
        assert_eq!(gaga_fit(&b, &GagaConfig::new(5, 2.0)).unwrap().estimated_variance, 1.0);
    }
}

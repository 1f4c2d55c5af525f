//! GAGA on an orthogonalized design.
//!
//! Columns are reordered by decreasing `|γ|`, `γ` the least-squares fit, and
//! the reordered design is factored as `Q R`. The fit then runs on `(y, Q)`,
//! whose gram is the identity, so every iteration is a diagonal solve. The
//! rotated estimate `θ` maps back through `β̂ = P R⁻¹ θ`. Because strong
//! columns come first, the zeros of `θ` collect in its tail and back
//! substitution keeps them zero.

use std::cmp::Ordering;

use crate::error::{GagaError, Result};
use crate::linalg::{cholesky_qr2, solve_upper, Cholesky, Matrix};
use crate::model::{build_gram, GagaConfig, GramSystem, RegressionProblem, SignalEstimate};
use crate::scalar::Real;
use crate::solver::gaga_fit_gram;

/// Back-transformed entries at most this times `‖β̂‖∞` are set to zero.
pub const SNAP_TOLERANCE: f64 = 1e-12;

/// Column order, thin QR of the reordered design and the least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct QrPlan<T> {
    /// `permutation[i]` is the original column placed at position `i`.
    pub permutation: Vec<usize>,
    pub q_factor: Matrix<T>,
    pub r_factor: Matrix<T>,
    /// Least-squares coefficients in the original column order.
    pub ols: Vec<T>,
}

impl<T: Real> QrPlan<T> {
    /// Scatters `v`, indexed by position in the reordered design, back to
    /// original column order.
    pub fn unpermute(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); v.len()];
        for (i, &j) in self.permutation.iter().enumerate() {
            out[j] = v[i];
        }
        out
    }

    /// Gathers `v`, indexed by original column, into reordered positions.
    pub fn permute(&self, v: &[T]) -> Vec<T> {
        self.permutation.iter().map(|&j| v[j]).collect()
    }
}

/// Indices sorting `|values|` in decreasing order; ties keep index order.
pub fn decreasing_magnitude_order<T: Real>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .abs()
            .partial_cmp(&values[a].abs())
            .unwrap_or(Ordering::Equal)
    });
    order
}

/// Computes the least-squares fit, the column order and the thin QR.
///
/// `rank_tolerance` is an absolute pivot tolerance on the gram; `None` uses
/// 1e-10 times its largest diagonal.
pub fn plan_qr<T: Real>(problem: &RegressionProblem<T>, rank_tolerance: Option<T>) -> Result<QrPlan<T>> {
    let (n, p) = (problem.n(), problem.p());
    if p > n {
        return Err(GagaError::RankDeficient { column: n });
    }
    let gram = build_gram(problem)?;
    plan_from_gram(problem, &gram, rank_tolerance)
}

fn plan_from_gram<T: Real>(
    problem: &RegressionProblem<T>,
    gram: &GramSystem<T>,
    rank_tolerance: Option<T>,
) -> Result<QrPlan<T>> {
    let tol = rank_tolerance.unwrap_or_else(|| gram.default_rank_tolerance());
    let g = gram.gram_matrix();
    let ols = Cholesky::factor(&g, tol)
        .map_err(|e| GagaError::RankDeficient { column: e.pivot })?
        .solve(gram.cross());
    let permutation = decreasing_magnitude_order(&ols);
    let x_new = problem.design().select_columns(&permutation);
    let g_new = Matrix::from_fn(g.rows(), g.cols(), |i, j| g[(permutation[i], permutation[j])]);
    let qr = cholesky_qr2(&x_new, &g_new, tol).map_err(|e| GagaError::RankDeficient {
        column: permutation[e.pivot],
    })?;
    Ok(QrPlan {
        permutation,
        q_factor: qr.q,
        r_factor: qr.r,
        ols,
    })
}

/// Fits through the QR plan of `problem`.
///
/// The inner fit uses `config` unchanged except for the rank tolerance, which
/// is reset to its default since the inner gram is the identity. Tuning values
/// of the returned estimate are the rotated-basis ones, placed at the
/// original index of the column they belong to; a recorded trace is likewise
/// in the rotated basis.
pub fn gaga_qr_fit<T: Real>(problem: &RegressionProblem<T>, config: &GagaConfig<T>) -> Result<SignalEstimate<T>> {
    config.validate()?;
    let plan = plan_qr(problem, config.rank_tolerance)?;
    gaga_qr_fit_with_plan(problem, &plan, config)
}

/// [`gaga_qr_fit`] with a precomputed plan.
pub fn gaga_qr_fit_with_plan<T: Real>(
    problem: &RegressionProblem<T>,
    plan: &QrPlan<T>,
    config: &GagaConfig<T>,
) -> Result<SignalEstimate<T>> {
    config.validate()?;
    let y = problem.response();
    if plan.q_factor.rows() != y.len() || plan.permutation.len() != problem.p() {
        return Err(GagaError::DimensionError(format!(
            "plan is {}x{} for a problem of {}x{}",
            plan.q_factor.rows(),
            plan.q_factor.cols(),
            problem.n(),
            problem.p()
        )));
    }
    let cross = plan.q_factor.transpose_mul_vec(y);
    let inner = GramSystem::identity(cross, crate::linalg::dot(y, y), problem.n())?
        .with_noise_variance(problem.noise_variance());
    let mut inner_config = config.clone();
    inner_config.rank_tolerance = None;
    let theta = gaga_fit_gram(&inner, &inner_config)?;

    let mut rotated = solve_upper(&plan.r_factor, &theta.coefficients);
    snap_small(&mut rotated);
    let coefficients = plan.unpermute(&rotated);
    let support = coefficients.iter().map(|&v| v != T::zero()).collect();
    Ok(SignalEstimate {
        coefficients,
        support,
        tuning: plan.unpermute(&theta.tuning),
        estimated_variance: theta.estimated_variance,
        trace: theta.trace,
    })
}

fn snap_small<T: Real>(v: &mut [T]) {
    let scale = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let cut = T::lit(SNAP_TOLERANCE) * scale;
    for x in v.iter_mut() {
        if x.abs() <= cut {
            *x = T::zero();
        }
    }
}

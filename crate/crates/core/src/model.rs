//! Shared domain types and the penalized SPD kernel every solver runs on.

use crate::error::{GagaError, Result};
use crate::linalg::{dot, Cholesky, Matrix};
use crate::scalar::Real;

/// Relative pivot tolerance used when the caller does not pick one.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;

/// Default tuning ceiling, relative to the largest gram diagonal.
pub const DEFAULT_TUNING_CLAMP: f64 = 1e12;

/// Linear model data `y = Xβ + ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem<T> {
    design: Matrix<T>,
    response: Vec<T>,
    noise_variance: Option<T>,
}

impl<T: Real> RegressionProblem<T> {
    pub fn new(design: Matrix<T>, response: Vec<T>) -> Result<Self> {
        Self::with_noise_variance(design, response, None)
    }

    /// Problem with a known noise variance `τ²`, used by the fixed-variance mode.
    pub fn with_noise_variance(
        design: Matrix<T>,
        response: Vec<T>,
        noise_variance: Option<T>,
    ) -> Result<Self> {
        if design.rows() == 0 || design.cols() == 0 {
            return Err(GagaError::InvalidInput(format!(
                "design must be at least 1x1, got {}x{}",
                design.rows(),
                design.cols()
            )));
        }
        if response.len() != design.rows() {
            return Err(GagaError::DimensionError(format!(
                "response has {} entries but design has {} rows",
                response.len(),
                design.rows()
            )));
        }
        if !design.is_finite() || response.iter().any(|v| !v.is_finite()) {
            return Err(GagaError::InvalidInput("non-finite entry in design or response".into()));
        }
        if let Some(v) = noise_variance {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(GagaError::InvalidInput(format!("noise variance must be positive, got {v}")));
            }
        }
        Ok(Self {
            design,
            response,
            noise_variance,
        })
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.design.rows()
    }

    /// Number of predictors.
    pub fn p(&self) -> usize {
        self.design.cols()
    }

    pub fn design(&self) -> &Matrix<T> {
        &self.design
    }

    pub fn response(&self) -> &[T] {
        &self.response
    }

    pub fn noise_variance(&self) -> Option<T> {
        self.noise_variance
    }
}

/// How the noise variance `τ²` is handled during the iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceMode {
    /// `τ²` held fixed: the problem's known variance, or 1.
    #[default]
    Fixed,
    /// `τ²` re-estimated every iteration from the expected residual sum of squares.
    Estimated,
}

impl std::str::FromStr for VarianceMode {
    type Err = GagaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed" => Ok(VarianceMode::Fixed),
            "estimated" => Ok(VarianceMode::Estimated),
            other => Err(GagaError::InvalidInput(format!("unknown variance mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for VarianceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VarianceMode::Fixed => "fixed",
            VarianceMode::Estimated => "estimated",
        })
    }
}

/// Solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GagaConfig<T> {
    /// Number of tuning updates `K`.
    pub iterations: usize,
    /// Sparsity constant, must exceed 1.
    pub alpha: T,
    pub variance_mode: VarianceMode,
    /// Ceiling for every tuning value; `None` means 1e12 times the largest gram diagonal.
    pub tuning_clamp: Option<T>,
    /// Pivot tolerance for factorizations; `None` means 1e-10 times the largest gram diagonal.
    pub rank_tolerance: Option<T>,
    /// Keep the per-iteration history in the returned estimate.
    pub record_trace: bool,
}

impl<T: Real> Default for GagaConfig<T> {
    fn default() -> Self {
        Self {
            iterations: 50,
            alpha: T::lit(2.0),
            variance_mode: VarianceMode::Fixed,
            tuning_clamp: None,
            rank_tolerance: None,
            record_trace: false,
        }
    }
}

impl<T: Real> GagaConfig<T> {
    pub fn new(iterations: usize, alpha: T) -> Self {
        Self {
            iterations,
            alpha,
            ..Self::default()
        }
    }

    pub fn with_variance_mode(mut self, mode: VarianceMode) -> Self {
        self.variance_mode = mode;
        self
    }

    pub fn with_tuning_clamp(mut self, clamp: T) -> Self {
        self.tuning_clamp = Some(clamp);
        self
    }

    pub fn with_rank_tolerance(mut self, tol: T) -> Self {
        self.rank_tolerance = Some(tol);
        self
    }

    pub fn with_trace(mut self, record: bool) -> Self {
        self.record_trace = record;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::one()) || !self.alpha.is_finite() {
            return Err(GagaError::InvalidAlpha(self.alpha.to_f64_lossy()));
        }
        if self.iterations == 0 {
            return Err(GagaError::InvalidInput("iterations must be at least 1".into()));
        }
        if let Some(c) = self.tuning_clamp {
            if !(c > T::zero()) {
                return Err(GagaError::InvalidInput(format!("tuning clamp must be positive, got {c}")));
            }
        }
        if let Some(t) = self.rank_tolerance {
            if !(t > T::zero()) || !t.is_finite() {
                return Err(GagaError::InvalidInput(format!("rank tolerance must be positive, got {t}")));
            }
        }
        Ok(())
    }

    pub(crate) fn resolved_clamp(&self, gram: &GramSystem<T>) -> T {
        self.tuning_clamp
            .unwrap_or_else(|| T::lit(DEFAULT_TUNING_CLAMP) * gram.max_diagonal())
    }

    pub(crate) fn resolved_rank_tolerance(&self, gram: &GramSystem<T>) -> T {
        self.rank_tolerance.unwrap_or_else(|| gram.default_rank_tolerance())
    }
}

/// One iteration of the solver as seen by the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    /// Penalty `bᵏ` used in this iteration's solve.
    pub tuning: Vec<T>,
    /// Ridge solution `β̂ᵏ = (XᵀX + Bᵏ)⁻¹Xᵀy`.
    pub beta: Vec<T>,
    /// Noise variance `(τ²)ᵏ` used by this iteration's tuning update.
    pub variance: T,
    /// `(τ²)ᵏ` came out non-positive and was replaced by the floor.
    pub variance_floored: bool,
}

/// Full iteration history of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace<T> {
    pub iterations: Vec<IterationRecord<T>>,
    /// `b^K`, the tuning vector after the last update.
    pub final_tuning: Vec<T>,
    pub final_variance: T,
}

impl<T: Real> FitTrace<T> {
    /// Tuning trajectory `b⁰, …, b^K` of coordinate `j`.
    pub fn tuning_path(&self, j: usize) -> Vec<T> {
        self.iterations
            .iter()
            .map(|r| r.tuning[j])
            .chain(std::iter::once(self.final_tuning[j]))
            .collect()
    }
}

/// Output of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalEstimate<T> {
    pub coefficients: Vec<T>,
    /// `true` where the coefficient survived truncation.
    pub support: Vec<bool>,
    /// `b* = b^K / α`.
    pub tuning: Vec<T>,
    pub estimated_variance: T,
    pub trace: Option<FitTrace<T>>,
}

impl<T: Real> SignalEstimate<T> {
    pub fn support_indices(&self) -> Vec<usize> {
        self.support
            .iter()
            .enumerate()
            .filter_map(|(j, &s)| s.then_some(j))
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.support.iter().filter(|&&s| s).count()
    }
}

/// Gram matrix storage. Diagonal grams (orthogonal designs, the rotated
/// basis of the QR variant) skip factorization entirely.
#[derive(Debug, Clone, PartialEq)]
pub enum Gram<T> {
    Dense(Matrix<T>),
    Diagonal(Vec<T>),
}

/// Sufficient statistics `XᵀX`, `Xᵀy`, `yᵀy` of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSystem<T> {
    gram: Gram<T>,
    cross: Vec<T>,
    response_sq_norm: T,
    observations: usize,
    noise_variance: Option<T>,
}

impl<T: Real> GramSystem<T> {
    /// Dense system from precomputed pieces. The gram is checked for symmetry
    /// (1e-12 relative) and then symmetrized by averaging.
    pub fn from_dense(gram: Matrix<T>, cross: Vec<T>, response_sq_norm: T, observations: usize) -> Result<Self> {
        let p = gram.rows();
        if gram.cols() != p || cross.len() != p || p == 0 {
            return Err(GagaError::DimensionError(format!(
                "gram {}x{} with cross of length {}",
                gram.rows(),
                gram.cols(),
                cross.len()
            )));
        }
        Self::check_finite(gram.as_slice(), &cross, response_sq_norm)?;
        let scale = gram.as_slice().iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let mut sym = gram;
        for i in 0..p {
            for j in 0..i {
                let (a, b) = (sym[(i, j)], sym[(j, i)]);
                if (a - b).abs() > T::lit(1e-12) * scale {
                    return Err(GagaError::InvalidInput(format!("gram is not symmetric at ({i}, {j})")));
                }
                let avg = (a + b) * T::lit(0.5);
                sym[(i, j)] = avg;
                sym[(j, i)] = avg;
            }
        }
        Ok(Self {
            gram: Gram::Dense(sym),
            cross,
            response_sq_norm,
            observations,
            noise_variance: None,
        })
    }

    /// System whose gram is `diag(diagonal)`.
    pub fn diagonal(diagonal: Vec<T>, cross: Vec<T>, response_sq_norm: T, observations: usize) -> Result<Self> {
        if diagonal.len() != cross.len() || diagonal.is_empty() {
            return Err(GagaError::DimensionError(format!(
                "diagonal of length {} with cross of length {}",
                diagonal.len(),
                cross.len()
            )));
        }
        Self::check_finite(&diagonal, &cross, response_sq_norm)?;
        if diagonal.iter().any(|&d| d < T::zero()) {
            return Err(GagaError::InvalidInput("gram diagonal must be nonnegative".into()));
        }
        Ok(Self {
            gram: Gram::Diagonal(diagonal),
            cross,
            response_sq_norm,
            observations,
            noise_variance: None,
        })
    }

    /// System with identity gram, as produced by an orthonormal design.
    pub fn identity(cross: Vec<T>, response_sq_norm: T, observations: usize) -> Result<Self> {
        Self::diagonal(vec![T::one(); cross.len()], cross, response_sq_norm, observations)
    }

    pub fn with_noise_variance(mut self, noise_variance: Option<T>) -> Self {
        self.noise_variance = noise_variance;
        self
    }

    fn check_finite(gram: &[T], cross: &[T], yty: T) -> Result<()> {
        if gram.iter().chain(cross).any(|v| !v.is_finite()) || !yty.is_finite() || yty < T::zero() {
            return Err(GagaError::InvalidInput("non-finite gram statistics".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.cross.len()
    }

    pub fn gram(&self) -> &Gram<T> {
        &self.gram
    }

    /// `XᵀX` as a dense matrix.
    pub fn gram_matrix(&self) -> Matrix<T> {
        match &self.gram {
            Gram::Dense(m) => m.clone(),
            Gram::Diagonal(d) => Matrix::from_diagonal(d),
        }
    }

    pub fn cross(&self) -> &[T] {
        &self.cross
    }

    pub fn response_sq_norm(&self) -> T {
        self.response_sq_norm
    }

    pub fn observations(&self) -> usize {
        self.observations
    }

    pub fn noise_variance(&self) -> Option<T> {
        self.noise_variance
    }

    pub fn gram_diagonal(&self) -> Vec<T> {
        match &self.gram {
            Gram::Dense(m) => m.diagonal(),
            Gram::Diagonal(d) => d.clone(),
        }
    }

    pub fn max_diagonal(&self) -> T {
        match &self.gram {
            Gram::Dense(m) => (0..m.rows()).fold(T::zero(), |acc, i| acc.max(m[(i, i)])),
            Gram::Diagonal(d) => d.iter().fold(T::zero(), |acc, &v| acc.max(v)),
        }
    }

    /// 1e-10 times the largest gram diagonal.
    pub fn default_rank_tolerance(&self) -> T {
        T::lit(DEFAULT_RANK_TOLERANCE) * self.max_diagonal()
    }

    /// `βᵀ (XᵀX) β`.
    pub fn quadratic_form(&self, beta: &[T]) -> T {
        match &self.gram {
            Gram::Dense(m) => dot(beta, &m.mul_vec(beta)),
            Gram::Diagonal(d) => beta
                .iter()
                .zip(d)
                .fold(T::zero(), |acc, (&b, &g)| acc + b * (g * b)),
        }
    }

    /// Solves `(XᵀX + diag(penalty)) β = Xᵀy` and returns the inverse diagonal alongside.
    pub fn solve_penalized(&self, penalty: &[T], pivot_tol: T) -> Result<PenalizedSolve<T>> {
        let (solution, inverse_diagonal) = match &self.gram {
            Gram::Dense(m) => spd_solve_with_tolerance(m, penalty, &self.cross, pivot_tol)?,
            Gram::Diagonal(d) => diagonal_solve(d, penalty, &self.cross, pivot_tol)?,
        };
        Ok(PenalizedSolve {
            penalty: penalty.to_vec(),
            solution,
            inverse_diagonal,
        })
    }
}

/// Result of one penalized solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PenalizedSolve<T> {
    /// Penalty `b` defining the system.
    pub penalty: Vec<T>,
    /// `(XᵀX + B)⁻¹ Xᵀy`.
    pub solution: Vec<T>,
    /// Diagonal of `(XᵀX + B)⁻¹`.
    pub inverse_diagonal: Vec<T>,
}

/// Precomputes `XᵀX` (exactly symmetric), `Xᵀy` and `yᵀy`.
pub fn build_gram<T: Real>(problem: &RegressionProblem<T>) -> Result<GramSystem<T>> {
    let x = problem.design();
    let y = problem.response();
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(GagaError::InvalidInput("non-finite entry in design or response".into()));
    }
    let gram = x.gram();
    let cross = x.transpose_mul_vec(y);
    let yty = dot(y, y);
    GramSystem::check_finite(gram.as_slice(), &cross, yty)?;
    Ok(GramSystem {
        gram: Gram::Dense(gram),
        cross,
        response_sq_norm: yty,
        observations: problem.n(),
        noise_variance: problem.noise_variance(),
    })
}

/// Solves `(gram + diag(penalty)) x = rhs` with one Cholesky factorization and
/// returns `x` together with the diagonal of the inverse.
///
/// The pivot tolerance is 1e-10 times the largest diagonal of `gram`.
pub fn spd_solve_with_inverse_diagonal<T: Real>(
    gram: &Matrix<T>,
    penalty: &[T],
    rhs: &[T],
) -> Result<(Vec<T>, Vec<T>)> {
    let scale = (0..gram.rows().min(gram.cols())).fold(T::zero(), |m, i| m.max(gram[(i, i)]));
    spd_solve_with_tolerance(gram, penalty, rhs, T::lit(DEFAULT_RANK_TOLERANCE) * scale)
}

/// [`spd_solve_with_inverse_diagonal`] with an explicit pivot tolerance.
pub fn spd_solve_with_tolerance<T: Real>(
    gram: &Matrix<T>,
    penalty: &[T],
    rhs: &[T],
    pivot_tol: T,
) -> Result<(Vec<T>, Vec<T>)> {
    let p = gram.rows();
    if gram.cols() != p || penalty.len() != p || rhs.len() != p {
        return Err(GagaError::DimensionError(format!(
            "gram {}x{}, penalty {}, rhs {}",
            gram.rows(),
            gram.cols(),
            penalty.len(),
            rhs.len()
        )));
    }
    if penalty.iter().any(|&b| !(b >= T::zero())) {
        return Err(GagaError::InvalidInput("penalty must be nonnegative".into()));
    }
    let chol = Cholesky::factor_shifted(gram, penalty, pivot_tol)
        .map_err(|e| GagaError::SingularSystem { pivot: e.pivot })?;
    Ok((chol.solve(rhs), chol.inverse_diagonal()))
}

/// Diagonal counterpart of the dense kernel. The arithmetic mirrors what the
/// Cholesky path does on a diagonal matrix, so both agree bit for bit.
fn diagonal_solve<T: Real>(diag: &[T], penalty: &[T], rhs: &[T], pivot_tol: T) -> Result<(Vec<T>, Vec<T>)> {
    if penalty.len() != diag.len() {
        return Err(GagaError::DimensionError(format!(
            "penalty {} for gram of dimension {}",
            penalty.len(),
            diag.len()
        )));
    }
    let mut solution = Vec::with_capacity(diag.len());
    let mut inverse = Vec::with_capacity(diag.len());
    for (j, ((&g, &b), &c)) in diag.iter().zip(penalty).zip(rhs).enumerate() {
        let d = g + b;
        if !(d > pivot_tol) || !d.is_finite() {
            return Err(GagaError::SingularSystem { pivot: j });
        }
        let s = d.sqrt();
        solution.push((c / s) / s);
        let w = T::one() / s;
        inverse.push(w * w);
    }
    Ok((solution, inverse))
}

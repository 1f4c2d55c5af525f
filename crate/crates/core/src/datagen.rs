//! Reproducible simulated designs.
//!
//! Randomness comes from ChaCha20 seeded with the instance seed, one stream
//! per role (`design`, `coefficients`, `support`, `noise`), the stream id
//! being the FNV-1a hash of the role name. Changing how many draws one role
//! consumes never shifts another. Standard normals use the Marsaglia polar
//! method on `random::<f64>()` uniforms, which keeps fixtures bit-identical
//! across platforms with IEEE `sqrt`/`ln`.
//!
//! # CSV pair
//!
//! [`GeneratedInstance::write_csv_pair`] writes
//!
//! * a data file with header `y,x1,…,xp` and one row per observation, and
//! * a metadata file with `# model_tag=…` and `# seed=…` comment lines,
//!   then a header `index,beta_true` and one 1-based row per coefficient.
//!
//! Numbers are written in Rust's shortest round-trip form.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{GagaError, Result};
use crate::linalg::{householder_qr, Cholesky, Matrix};
use crate::model::RegressionProblem;

/// Which simulated design produced an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelTag {
    /// n = 100, p = 8, AR(1) correlation 0.5, three U(0,1) signals.
    Model1,
    /// n = 100, p = 40, equicorrelation 0.5, blocks of ten.
    Model2,
    /// n = 1000, p = 500, equicorrelation 0.5, 250 random zeros.
    HighDim,
    /// p = 8 with three randomly placed signals, i.i.d. predictors, given n.
    Consistency(usize),
    /// Exactly orthogonal columns with prescribed squared norms.
    Orthogonal,
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelTag::Model1 => f.write_str("model1"),
            ModelTag::Model2 => f.write_str("model2"),
            ModelTag::HighDim => f.write_str("highdim"),
            ModelTag::Consistency(n) => write!(f, "consistency-{n}"),
            ModelTag::Orthogonal => f.write_str("orthogonal"),
        }
    }
}

impl FromStr for ModelTag {
    type Err = GagaError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "model1" => Ok(ModelTag::Model1),
            "model2" => Ok(ModelTag::Model2),
            "highdim" => Ok(ModelTag::HighDim),
            "orthogonal" => Ok(ModelTag::Orthogonal),
            _ => s
                .strip_prefix("consistency-")
                .and_then(|n| n.parse().ok())
                .map(ModelTag::Consistency)
                .ok_or_else(|| GagaError::InvalidInput(format!("unknown model tag `{s}`"))),
        }
    }
}

/// A simulated problem together with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub problem: RegressionProblem<f64>,
    pub beta_true: Vec<f64>,
    pub model_tag: ModelTag,
    pub seed: u64,
}

/// Independent ChaCha20 stream for one role of one instance.
pub fn substream(seed: u64, name: &str) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(name));
    rng
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of replicate `index` under `base_seed`: `splitmix64(base ^ splitmix64(index))`.
pub fn replicate_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(index))
}

/// Marsaglia polar sampler for N(0, 1).
#[derive(Debug, Default, Clone)]
pub struct NormalSampler {
    spare: Option<f64>,
}

impl NormalSampler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u = 2.0 * rng.random::<f64>() - 1.0;
            let v = 2.0 * rng.random::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * m);
                return u * m;
            }
        }
    }

    pub fn fill<R: Rng + ?Sized>(&mut self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

/// Uniform draw on the open interval `(lo, hi)`.
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let u: f64 = rng.random();
        let v = lo + (hi - lo) * u;
        if v > lo && v < hi {
            return v;
        }
    }
}

pub fn standard_normal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix<f64> {
    let mut sampler = NormalSampler::new();
    Matrix::from_vec(rows, cols, sampler.fill(rng, rows * cols))
}

/// `ρ^|i−j|`.
pub fn ar1_correlation(p: usize, rho: f64) -> Matrix<f64> {
    Matrix::from_fn(p, p, |i, j| rho.powi(i.abs_diff(j) as i32))
}

/// Unit diagonal, `rho` everywhere else.
pub fn equicorrelation(p: usize, rho: f64) -> Matrix<f64> {
    Matrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho })
}

/// `n` independent rows `L g` with `L Lᵀ = correlation` and `g ~ N(0, I)`.
pub fn correlated_gaussian_rows<R: Rng + ?Sized>(
    correlation: &Matrix<f64>,
    n: usize,
    rng: &mut R,
) -> Result<Matrix<f64>> {
    let p = correlation.rows();
    if correlation.cols() != p || p == 0 {
        return Err(GagaError::DimensionError(format!(
            "correlation must be square and nonempty, got {}x{}",
            correlation.rows(),
            correlation.cols()
        )));
    }
    for i in 0..p {
        for j in 0..i {
            if (correlation[(i, j)] - correlation[(j, i)]).abs() > 1e-12 {
                return Err(GagaError::InvalidCorrelation { pivot: i });
            }
        }
    }
    let chol = Cholesky::factor(correlation, 0.0).map_err(|e| GagaError::InvalidCorrelation { pivot: e.pivot })?;
    let g = standard_normal_matrix(n, p, rng);
    Ok(g.matmul_transposed(chol.factor_matrix()))
}

fn assemble(
    design: Matrix<f64>,
    beta_true: Vec<f64>,
    model_tag: ModelTag,
    seed: u64,
) -> Result<GeneratedInstance> {
    let mut noise_rng = substream(seed, "noise");
    let noise = NormalSampler::new().fill(&mut noise_rng, design.rows());
    let response = design
        .mul_vec(&beta_true)
        .into_iter()
        .zip(noise)
        .map(|(m, e)| m + e)
        .collect();
    Ok(GeneratedInstance {
        problem: RegressionProblem::new(design, response)?,
        beta_true,
        model_tag,
        seed,
    })
}

/// n = 100, p = 8, correlation `0.5^|i−j|`,
/// `β* = (β₁, β₂, 0, 0, β₃, 0, 0, 0)` with `βᵢ ~ U(0, 1)`.
pub fn gen_model1(seed: u64) -> GeneratedInstance {
    let mut coef = substream(seed, "coefficients");
    let mut beta = vec![0.0; 8];
    for &j in &[0, 1, 4] {
        beta[j] = open_uniform(&mut coef, 0.0, 1.0);
    }
    let design = correlated_gaussian_rows(&ar1_correlation(8, 0.5), 100, &mut substream(seed, "design"))
        .expect("AR(1) correlation is positive definite");
    assemble(design, beta, ModelTag::Model1, seed).expect("generated data is finite")
}

/// n = 100, p = 40, pairwise correlation 0.5, `β*` made of four blocks of
/// ten: zeros, `β₁ ~ U(0, 1)`, zeros, `β₂ ~ U(10, 100)`.
pub fn gen_model2(seed: u64) -> GeneratedInstance {
    let mut coef = substream(seed, "coefficients");
    let b1 = open_uniform(&mut coef, 0.0, 1.0);
    let b2 = open_uniform(&mut coef, 10.0, 100.0);
    let mut beta = vec![0.0; 40];
    beta[10..20].fill(b1);
    beta[30..40].fill(b2);
    let design = correlated_gaussian_rows(&equicorrelation(40, 0.5), 100, &mut substream(seed, "design"))
        .expect("equicorrelation 0.5 is positive definite");
    assemble(design, beta, ModelTag::Model2, seed).expect("generated data is finite")
}

/// n = 1000, p = 500, pairwise correlation 0.5, 250 zeros at random
/// positions, the rest `U(0, 5)`.
pub fn gen_highdim(seed: u64) -> GeneratedInstance {
    gen_highdim_sized(seed, 1000, 500).expect("fixed sizes are valid")
}

/// Same construction as [`gen_highdim`] with `n` observations and `p`
/// predictors, `p / 2` of them null.
pub fn gen_highdim_sized(seed: u64, n: usize, p: usize) -> Result<GeneratedInstance> {
    if p == 0 || n == 0 {
        return Err(GagaError::InvalidSize(format!("need n, p >= 1, got n={n}, p={p}")));
    }
    let mut support_rng = substream(seed, "support");
    let zero_positions = index::sample(&mut support_rng, p, p / 2);
    let mut coef = substream(seed, "coefficients");
    let mut beta: Vec<f64> = (0..p).map(|_| open_uniform(&mut coef, 0.0, 5.0)).collect();
    for j in zero_positions.iter() {
        beta[j] = 0.0;
    }
    let design = correlated_gaussian_rows(&equicorrelation(p, 0.5), n, &mut substream(seed, "design"))?;
    assemble(design, beta, ModelTag::HighDim, seed)
}

/// p = 8 with three nonzero `U(0, 1)` coefficients at random positions and
/// i.i.d. standard normal predictors. The coefficient draw depends only on
/// the seed; the design stream also depends on `n`.
pub fn gen_consistency(seed: u64, n: usize) -> Result<GeneratedInstance> {
    let p = 8;
    if n < p {
        return Err(GagaError::InvalidSize(format!("consistency design needs n >= {p}, got {n}")));
    }
    let mut support_rng = substream(seed, "support");
    let positions = index::sample(&mut support_rng, p, 3);
    let mut coef = substream(seed, "coefficients");
    let mut beta = vec![0.0; p];
    let mut sorted: Vec<usize> = positions.into_vec();
    sorted.sort_unstable();
    for j in sorted {
        beta[j] = open_uniform(&mut coef, 0.0, 1.0);
    }
    let design = standard_normal_matrix(n, p, &mut substream(seed, &format!("design/n={n}")));
    assemble(design, beta, ModelTag::Consistency(n), seed)
}

/// Design with exactly orthogonal columns, `XᵀX = diag(n σ*)`: a Gaussian
/// matrix is orthonormalized and its columns rescaled.
pub fn gen_orthogonal(
    seed: u64,
    n: usize,
    p: usize,
    beta_true: &[f64],
    sigma_star: &[f64],
) -> Result<GeneratedInstance> {
    if n < p || p == 0 {
        return Err(GagaError::InvalidSize(format!("orthogonal design needs n >= p >= 1, got n={n}, p={p}")));
    }
    if beta_true.len() != p || sigma_star.len() != p {
        return Err(GagaError::DimensionError(format!(
            "beta has {} and sigma_star has {} entries for p = {p}",
            beta_true.len(),
            sigma_star.len()
        )));
    }
    if sigma_star.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(GagaError::InvalidInput("sigma_star must be positive".into()));
    }
    let g = standard_normal_matrix(n, p, &mut substream(seed, "design"));
    let q = householder_qr(&g, 0.0)
        .map_err(|e| GagaError::RankDeficient { column: e.pivot })?
        .q;
    let scale: Vec<f64> = sigma_star.iter().map(|&s| (n as f64 * s).sqrt()).collect();
    let design = Matrix::from_fn(n, p, |i, j| q[(i, j)] * scale[j]);
    assemble(design, beta_true.to_vec(), ModelTag::Orthogonal, seed)
}

impl GeneratedInstance {
    /// Writes the data and metadata files described in the module docs.
    pub fn write_csv_pair<D: Write, M: Write>(&self, mut data: D, mut meta: M) -> io::Result<()> {
        let x = self.problem.design();
        let header: Vec<String> = std::iter::once("y".to_string())
            .chain((1..=x.cols()).map(|j| format!("x{j}")))
            .collect();
        writeln!(data, "{}", header.join(","))?;
        for (i, y) in self.problem.response().iter().enumerate() {
            let mut line = y.to_string();
            for v in x.row(i) {
                line.push(',');
                line.push_str(&v.to_string());
            }
            writeln!(data, "{line}")?;
        }
        writeln!(meta, "# model_tag={}", self.model_tag)?;
        writeln!(meta, "# seed={}", self.seed)?;
        writeln!(meta, "index,beta_true")?;
        for (j, b) in self.beta_true.iter().enumerate() {
            writeln!(meta, "{},{}", j + 1, b)?;
        }
        Ok(())
    }

    /// Parses a pair written by [`GeneratedInstance::write_csv_pair`].
    pub fn read_csv_pair(data: &str, meta: &str) -> Result<Self> {
        let problem = parse_data_csv(data)?;
        let mut model_tag = None;
        let mut seed = None;
        let mut beta = Vec::new();
        for line in meta.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(c) = line.strip_prefix('#') {
                if let Some((k, v)) = c.split_once('=') {
                    match k.trim() {
                        "model_tag" => model_tag = Some(v.parse()?),
                        "seed" => {
                            seed = Some(v.trim().parse().map_err(|_| bad_field("seed", v))?);
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if line.starts_with("index") {
                continue;
            }
            let (_, v) = line.split_once(',').ok_or_else(|| bad_field("beta row", line))?;
            beta.push(v.trim().parse::<f64>().map_err(|_| bad_field("beta_true", v))?);
        }
        if beta.len() != problem.p() {
            return Err(GagaError::DimensionError(format!(
                "metadata has {} coefficients for {} predictors",
                beta.len(),
                problem.p()
            )));
        }
        Ok(Self {
            problem,
            beta_true: beta,
            model_tag: model_tag.ok_or_else(|| bad_field("model_tag", "missing"))?,
            seed: seed.ok_or_else(|| bad_field("seed", "missing"))?,
        })
    }
}

fn bad_field(what: &str, value: &str) -> GagaError {
    GagaError::InvalidInput(format!("bad {what}: `{}`", value.trim()))
}

/// Parses a `y,x1,…,xp` data file (header row required, `#` lines ignored).
pub fn parse_data_csv(text: &str) -> Result<RegressionProblem<f64>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| bad_field("data file", "empty"))?;
    let width = header.split(',').count();
    if width < 2 {
        return Err(GagaError::InvalidInput("data file needs a response and at least one predictor".into()));
    }
    let mut response = Vec::new();
    let mut values = Vec::new();
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(GagaError::DimensionError(format!(
                "row {} has {} fields, header has {width}",
                row + 1,
                fields.len()
            )));
        }
        for (k, f) in fields.iter().enumerate() {
            let v: f64 = f.trim().parse().map_err(|_| bad_field("number", f))?;
            if k == 0 {
                response.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let n = response.len();
    RegressionProblem::new(Matrix::from_vec(n, width - 1, values), response)
}

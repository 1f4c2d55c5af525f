//! Experiment description and its key-value file format.
//!
//! ```text
//! # Model 1 with both estimators
//! model = model1            # model1 | model2 | highdim | consistency | orthogonal
//! replicates = 100
//! seed = 20240601
//! estimators = gaga, gaga_qr, external:alasso.csv
//! iterations = 50
//! alpha = 2
//! variance_mode = estimated # fixed | estimated
//! output = model1.csv
//! timing = false
//! ```
//!
//! `consistency` takes `n = …` (or `sample_sizes = 30, 60, …` for a sweep);
//! `orthogonal` takes `n`, `beta` and `sigma_star` as comma lists.
//! Text after `#` is ignored. Relative external paths resolve against the
//! config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gaga::datagen::{self, GeneratedInstance};
use gaga::{GagaConfig, VarianceMode};

use crate::error::{HarnessError, Result};

/// Default base seed of experiments.
pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Model1,
    Model2,
    HighDim,
    Consistency(usize),
    Orthogonal {
        n: usize,
        beta: Vec<f64>,
        sigma_star: Vec<f64>,
    },
}

impl ModelSpec {
    pub fn generate(&self, seed: u64) -> gaga::Result<GeneratedInstance> {
        match self {
            ModelSpec::Model1 => Ok(datagen::gen_model1(seed)),
            ModelSpec::Model2 => Ok(datagen::gen_model2(seed)),
            ModelSpec::HighDim => Ok(datagen::gen_highdim(seed)),
            ModelSpec::Consistency(n) => datagen::gen_consistency(seed, *n),
            ModelSpec::Orthogonal { n, beta, sigma_star } => {
                datagen::gen_orthogonal(seed, *n, beta.len(), beta, sigma_star)
            }
        }
    }

    pub fn tag(&self) -> String {
        match self {
            ModelSpec::Model1 => "model1".into(),
            ModelSpec::Model2 => "model2".into(),
            ModelSpec::HighDim => "highdim".into(),
            ModelSpec::Consistency(n) => format!("consistency-{n}"),
            ModelSpec::Orthogonal { n, .. } => format!("orthogonal-{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    Gaga(GagaConfig<f64>),
    GagaQr(GagaConfig<f64>),
    /// Precomputed estimates, one row per replicate.
    External(PathBuf),
}

impl Estimator {
    pub fn label(&self) -> String {
        match self {
            Estimator::Gaga(_) => "gaga".into(),
            Estimator::GagaQr(_) => "gaga_qr".into(),
            Estimator::External(path) => format!(
                "external:{}",
                path.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default()
            ),
        }
    }

    fn config_mut(&mut self) -> Option<&mut GagaConfig<f64>> {
        match self {
            Estimator::Gaga(c) | Estimator::GagaQr(c) => Some(c),
            Estimator::External(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub model: ModelSpec,
    pub replicates: usize,
    pub estimators: Vec<Estimator>,
    pub base_seed: u64,
    pub sample_sizes: Option<Vec<usize>>,
    pub output_path: PathBuf,
    pub record_timing: bool,
}

impl ExperimentSpec {
    pub fn new(model: ModelSpec, replicates: usize, estimators: Vec<Estimator>) -> Self {
        Self {
            model,
            replicates,
            estimators,
            base_seed: DEFAULT_SEED,
            sample_sizes: None,
            output_path: PathBuf::from("results.csv"),
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(HarnessError::Config("replicates must be at least 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(HarnessError::Config("no estimators given".into()));
        }
        for est in &self.estimators {
            if let Estimator::Gaga(c) | Estimator::GagaQr(c) = est {
                c.validate()?;
            }
        }
        if let Some(sizes) = &self.sample_sizes {
            if sizes.is_empty() || sizes.iter().any(|&n| n < 8) {
                return Err(HarnessError::Config("sample_sizes must be nonempty and each >= 8".into()));
            }
        }
        Ok(())
    }

    /// Applies `f` to the configuration of every GAGA estimator.
    pub fn update_configs(&mut self, mut f: impl FnMut(&mut GagaConfig<f64>)) {
        for est in &mut self.estimators {
            if let Some(c) = est.config_mut() {
                f(c);
            }
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent())
    }

    /// Parses the format described in the module docs.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut take = |key: &str| kv.remove(key);

        let iterations = take("iterations").map(|v| parse_num::<usize>("iterations", &v)).transpose()?;
        let alpha = take("alpha").map(|v| parse_num::<f64>("alpha", &v)).transpose()?;
        let mode = take("variance_mode")
            .map(|v| v.parse::<VarianceMode>().map_err(|e| HarnessError::Config(e.to_string())))
            .transpose()?;
        let mut config = GagaConfig::default();
        if let Some(k) = iterations {
            config.iterations = k;
        }
        if let Some(a) = alpha {
            config.alpha = a;
        }
        if let Some(m) = mode {
            config.variance_mode = m;
        }

        let sample_sizes = take("sample_sizes").map(|v| parse_list::<usize>("sample_sizes", &v)).transpose()?;
        let n = take("n").map(|v| parse_num::<usize>("n", &v)).transpose()?;
        let model_name = take("model").ok_or_else(|| HarnessError::Config("missing `model`".into()))?;
        let model = match model_name.to_ascii_lowercase().as_str() {
            "model1" => ModelSpec::Model1,
            "model2" => ModelSpec::Model2,
            "highdim" => ModelSpec::HighDim,
            "consistency" => {
                let n = n
                    .or_else(|| sample_sizes.as_ref().and_then(|s| s.first().copied()))
                    .ok_or_else(|| HarnessError::Config("consistency needs `n` or `sample_sizes`".into()))?;
                ModelSpec::Consistency(n)
            }
            "orthogonal" => {
                let beta = take("beta").ok_or_else(|| HarnessError::Config("orthogonal needs `beta`".into()))?;
                let sigma = take("sigma_star")
                    .ok_or_else(|| HarnessError::Config("orthogonal needs `sigma_star`".into()))?;
                ModelSpec::Orthogonal {
                    n: n.ok_or_else(|| HarnessError::Config("orthogonal needs `n`".into()))?,
                    beta: parse_list("beta", &beta)?,
                    sigma_star: parse_list("sigma_star", &sigma)?,
                }
            }
            other => return Err(HarnessError::Config(format!("unknown model `{other}`"))),
        };

        let estimators = take("estimators")
            .unwrap_or_else(|| "gaga".into())
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| match name {
                "gaga" => Ok(Estimator::Gaga(config.clone())),
                "gaga_qr" => Ok(Estimator::GagaQr(config.clone())),
                _ => match name.strip_prefix("external:") {
                    Some(p) => {
                        let p = PathBuf::from(p.trim());
                        Ok(Estimator::External(match base_dir {
                            Some(dir) if p.is_relative() => dir.join(p),
                            _ => p,
                        }))
                    }
                    None => Err(HarnessError::Config(format!("unknown estimator `{name}`"))),
                },
            })
            .collect::<Result<Vec<_>>>()?;

        let spec = ExperimentSpec {
            model,
            replicates: take("replicates").map(|v| parse_num("replicates", &v)).transpose()?.unwrap_or(100),
            estimators,
            base_seed: take("seed").map(|v| parse_num("seed", &v)).transpose()?.unwrap_or(DEFAULT_SEED),
            sample_sizes,
            output_path: take("output").map(PathBuf::from).unwrap_or_else(|| "results.csv".into()),
            record_timing: take("timing").map(|v| parse_num("timing", &v)).transpose()?.unwrap_or(false),
        };
        if let Some(key) = kv.keys().next() {
            return Err(HarnessError::Config(format!("unknown key `{key}`")));
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("bad value for `{key}`: `{v}`")))
}

/// Comma-separated list.
pub fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "
            # comment
            model = orthogonal
            n = 200
            beta = 5, 0
            sigma_star = 1,1
            replicates = 3   # trailing
            seed = 9
            estimators = gaga, gaga_qr, external:est.csv
            iterations = 20
            alpha = 3
            variance_mode = estimated
            output = out.csv
            timing = true
        ";
        let spec = ExperimentSpec::parse(text, Some(Path::new("/data"))).unwrap();
        assert_eq!(
            spec.model,
            ModelSpec::Orthogonal {
                n: 200,
                beta: vec![5.0, 0.0],
                sigma_star: vec![1.0, 1.0]
            }
        );
        assert_eq!((spec.replicates, spec.base_seed, spec.record_timing), (3, 9, true));
        let expected = GagaConfig::new(20, 3.0).with_variance_mode(VarianceMode::Estimated);
        assert_eq!(spec.estimators[0], Estimator::Gaga(expected.clone()));
        assert_eq!(spec.estimators[1], Estimator::GagaQr(expected));
        assert_eq!(spec.estimators[2], Estimator::External("/data/est.csv".into()));
        assert_eq!(spec.estimators[2].label(), "external:est");
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentSpec::parse("model = model1\nreplicates = 0", None).is_err());
        assert!(ExperimentSpec::parse("model = model9", None).is_err());
        assert!(ExperimentSpec::parse("model = model1\ncolour = red", None).is_err());
        assert!(ExperimentSpec::parse("model = model1\nalpha = 1", None).is_err());
        assert!(ExperimentSpec::parse("model = consistency\nsample_sizes = 5, 30", None).is_err());
        assert!(ExperimentSpec::parse("model = model1\nestimators = lasso", None).is_err());
    }
}

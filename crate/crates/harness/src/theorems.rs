//! Empirical checks of the large-sample behaviour on orthogonal designs.

use std::io::Write;

use gaga::datagen::{gen_orthogonal, replicate_seed};
use gaga::{gaga_fit, GagaConfig, GagaError};
use rayon::prelude::*;

use crate::error::Result;

/// Pooled over replicates and coordinates. Rates are `truncated / zero`
/// and `retained / nonzero`; the counts are kept so callers can recompute.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremValidationReport {
    pub truncation_rate_zero_coef: f64,
    pub retention_rate_nonzero_coef: f64,
    /// Kolmogorov–Smirnov distance of `√(n σ*ⱼ) (β̂ⱼ − β*ⱼ)` over nonzero
    /// coordinates against N(0, 1).
    pub normality_statistic: f64,
    /// Median of `|b*ⱼ − 1/β*ⱼ²|` over nonzero coordinates, `b* = b^K / α`.
    pub tuning_limit_error: f64,
    pub sample_size: usize,
    pub replicates: usize,
    pub zero_coefficients: usize,
    pub zero_truncated: usize,
    pub nonzero_coefficients: usize,
    pub nonzero_retained: usize,
}

/// `Φ(x) = erfc(−x/√2) / 2`.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov–Smirnov distance against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Asymptotic 1% critical value of the KS distance for `m` samples.
pub fn ks_critical_1pct(m: usize) -> f64 {
    1.63 / (m as f64).sqrt()
}

struct ReplicateOutcome {
    zero: usize,
    zero_truncated: usize,
    nonzero: usize,
    retained: usize,
    standardized: Vec<f64>,
    limit_errors: Vec<f64>,
}

/// Fits `replicates` orthogonal-design instances with unit noise and pools
/// the support, normality and tuning-limit statistics.
pub fn validate_theorems(
    n: usize,
    replicates: usize,
    beta_star: &[f64],
    sigma_star: &[f64],
    config: &GagaConfig<f64>,
    base_seed: u64,
) -> Result<TheoremValidationReport> {
    config.validate()?;
    if replicates == 0 {
        return Err(GagaError::InvalidInput("replicates must be at least 1".into()).into());
    }
    let p = beta_star.len();
    let outcomes: Vec<ReplicateOutcome> = (0..replicates)
        .into_par_iter()
        .map(|r| -> gaga::Result<ReplicateOutcome> {
            let seed = replicate_seed(base_seed, r as u64);
            let inst = gen_orthogonal(seed, n, p, beta_star, sigma_star)?.problem;
            let fit = gaga_fit(&inst, config)?;
            let mut out = ReplicateOutcome {
                zero: 0,
                zero_truncated: 0,
                nonzero: 0,
                retained: 0,
                standardized: Vec::new(),
                limit_errors: Vec::new(),
            };
            for j in 0..p {
                if beta_star[j] == 0.0 {
                    out.zero += 1;
                    out.zero_truncated += usize::from(!fit.support[j]);
                } else {
                    out.nonzero += 1;
                    out.retained += usize::from(fit.support[j]);
                    let scale = (n as f64 * sigma_star[j]).sqrt();
                    out.standardized.push(scale * (fit.coefficients[j] - beta_star[j]));
                    out.limit_errors
                        .push((fit.tuning[j] - 1.0 / (beta_star[j] * beta_star[j])).abs());
                }
            }
            Ok(out)
        })
        .collect::<gaga::Result<_>>()?;

    let sum = |f: fn(&ReplicateOutcome) -> usize| outcomes.iter().map(f).sum::<usize>();
    let (zero, zero_truncated) = (sum(|o| o.zero), sum(|o| o.zero_truncated));
    let (nonzero, retained) = (sum(|o| o.nonzero), sum(|o| o.retained));
    let standardized: Vec<f64> = outcomes.iter().flat_map(|o| o.standardized.iter().copied()).collect();
    let mut limit_errors: Vec<f64> = outcomes.iter().flat_map(|o| o.limit_errors.iter().copied()).collect();
    limit_errors.sort_by(f64::total_cmp);
    let rate = |a: usize, b: usize| if b == 0 { f64::NAN } else { a as f64 / b as f64 };
    Ok(TheoremValidationReport {
        truncation_rate_zero_coef: rate(zero_truncated, zero),
        retention_rate_nonzero_coef: rate(retained, nonzero),
        normality_statistic: if standardized.is_empty() {
            f64::NAN
        } else {
            ks_statistic(&standardized, standard_normal_cdf)
        },
        tuning_limit_error: median(&limit_errors),
        sample_size: n,
        replicates,
        zero_coefficients: zero,
        zero_truncated,
        nonzero_coefficients: nonzero,
        nonzero_retained: retained,
    })
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        m if m % 2 == 1 => sorted[m / 2],
        m => 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]),
    }
}

pub fn write_report_csv<W: Write>(out: W, r: &TheoremValidationReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["key", "value"])?;
    let items: [(&str, String); 10] = [
        ("truncation_rate_zero_coef", r.truncation_rate_zero_coef.to_string()),
        ("retention_rate_nonzero_coef", r.retention_rate_nonzero_coef.to_string()),
        ("normality_statistic", r.normality_statistic.to_string()),
        ("tuning_limit_error", r.tuning_limit_error.to_string()),
        ("sample_size", r.sample_size.to_string()),
        ("replicates", r.replicates.to_string()),
        ("zero_coefficients", r.zero_coefficients.to_string()),
        ("zero_truncated", r.zero_truncated.to_string()),
        ("nonzero_coefficients", r.nonzero_coefficients.to_string()),
        ("nonzero_retained", r.nonzero_retained.to_string()),
    ];
    for (k, v) in items {
        w.write_record([k, v.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_values() {
        assert_eq!(standard_normal_cdf(0.0), 0.5);
        assert!((standard_normal_cdf(1.0) - 0.841_344_746_068_543).abs() < 1e-15);
        assert!((standard_normal_cdf(-1.959_963_984_540_054) - 0.025).abs() < 1e-15);
    }

    #[test]
    fn ks_distance_examples() {
        // single sample at the median: max(0.5 - 0, 1 - 0.5)
        assert_eq!(ks_statistic(&[0.0], standard_normal_cdf), 0.5);
        let uniform = |x: f64| x.clamp(0.0, 1.0);
        let d = ks_statistic(&[0.1, 0.4, 0.7], uniform);
        // steps at 1/3, 2/3, 1 against F = 0.1, 0.4, 0.7
        assert!((d - (1.0f64 / 3.0 - 0.1).max(2.0 / 3.0 - 0.4).max(1.0 - 0.7)).abs() < 1e-15);
        assert!((ks_critical_1pct(500) - 0.0729).abs() < 1e-4);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[1.0, 2.0, 10.0]), 2.0);
        assert_eq!(median(&[1.0, 2.0]), 1.5);
    }
}

//! Wall-clock comparison of the two estimators on high-dimensional designs.

use std::io::Write;
use std::time::Instant;

use gaga::datagen::{gen_highdim_sized, replicate_seed};
use gaga::{gaga_fit, gaga_qr_fit, GagaConfig, GagaError};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub p: usize,
    pub n: usize,
    pub estimator: String,
    pub repeats: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
}

/// Times one fit of each estimator per repeat on equicorrelated designs with
/// half the coefficients zero. Only the fit is timed, not data generation.
/// Rows come in `dimensions` order, `gaga` before `gaga_qr`.
pub fn benchmark_timing(
    dimensions: &[usize],
    n: usize,
    repeats: usize,
    config: &GagaConfig<f64>,
    base_seed: u64,
) -> Result<Vec<TimingRow>> {
    config.validate()?;
    if repeats == 0 {
        return Err(GagaError::InvalidInput("repeats must be at least 1".into()).into());
    }
    if let Some(&p) = dimensions.iter().find(|&&p| p > n) {
        return Err(GagaError::InvalidSize(format!("p = {p} exceeds n = {n}")).into());
    }
    let mut rows = Vec::new();
    for &p in dimensions {
        let mut times = [Vec::new(), Vec::new()];
        for r in 0..repeats {
            let inst = gen_highdim_sized(replicate_seed(base_seed, r as u64), n, p)?;
            let start = Instant::now();
            gaga_fit(&inst.problem, config)?;
            times[0].push(start.elapsed().as_secs_f64() * 1e3);
            let start = Instant::now();
            gaga_qr_fit(&inst.problem, config)?;
            times[1].push(start.elapsed().as_secs_f64() * 1e3);
        }
        for (name, mut t) in ["gaga", "gaga_qr"].into_iter().zip(times) {
            let mean = t.iter().sum::<f64>() / t.len() as f64;
            t.sort_by(f64::total_cmp);
            let m = t.len();
            let median = if m % 2 == 1 { t[m / 2] } else { 0.5 * (t[m / 2 - 1] + t[m / 2]) };
            rows.push(TimingRow {
                p,
                n,
                estimator: name.into(),
                repeats,
                mean_ms: mean,
                median_ms: median,
            });
        }
    }
    Ok(rows)
}

pub fn write_timing_csv<W: Write>(out: W, rows: &[TimingRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "n", "estimator", "repeats", "mean_ms", "median_ms"])?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.n.to_string(),
            r.estimator.clone(),
            r.repeats.to_string(),
            r.mean_ms.to_string(),
            r.median_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_benchmark_shape() {
        let rows = benchmark_timing(&[10, 20], 40, 3, &GagaConfig::new(5, 2.0), 1).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[0].p, rows[0].estimator.as_str()), (10, "gaga"));
        assert_eq!((rows[3].p, rows[3].estimator.as_str()), (20, "gaga_qr"));
        assert!(rows.iter().all(|r| r.mean_ms >= 0.0 && r.repeats == 3));
        assert!(benchmark_timing(&[50], 40, 1, &GagaConfig::default(), 1).is_err());
    }
}

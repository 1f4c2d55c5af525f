//! Replicated runs of estimators on simulated data, written as CSV.
//!
//! Data rows have the columns
//! `model_tag,seed,replicate,estimator,err,acc,tp,tn,fp,fn,wall_ms,status,err_sd,acc_sd`.
//! `status` is `ok` or the error kind of a failed fit, in which case the
//! metric columns are empty. `wall_ms` is empty unless timing was requested.
//! One summary row per estimator follows, with `replicate = summary`, the
//! base seed, means over successful replicates in the metric columns, and
//! sample standard deviations in the two trailing columns.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gaga::datagen::{replicate_seed, GeneratedInstance};
use gaga::{acc, gaga_fit, gaga_qr_fit, EvaluationReport};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::external::ExternalEstimates;
use crate::spec::{Estimator, ExperimentSpec, ModelSpec};

/// Outcome of one estimator on one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub model_tag: String,
    pub seed: u64,
    pub replicate: usize,
    pub estimator: String,
    /// Metrics, or the error kind of the failure.
    pub outcome: std::result::Result<EvaluationReport<f64>, String>,
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model_tag: String,
    pub estimator: String,
    pub succeeded: usize,
    pub failed: usize,
    pub err_mean: f64,
    pub err_sd: f64,
    pub acc_mean: f64,
    pub acc_sd: f64,
    pub tp_mean: f64,
    pub tn_mean: f64,
    pub fp_mean: f64,
    pub fn_mean: f64,
    pub wall_ms_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub base_seed: u64,
    pub rows: Vec<ResultRow>,
    pub summaries: Vec<SummaryRow>,
}

impl ExperimentReport {
    pub fn summary(&self, estimator: &str) -> Option<&SummaryRow> {
        self.summaries.iter().find(|s| s.estimator == estimator)
    }
}

/// Averages over a sample-size sweep, one row per `(n, estimator)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub summary: SummaryRow,
}

fn load_externals(spec: &ExperimentSpec) -> Result<HashMap<PathBuf, ExternalEstimates>> {
    let mut out = HashMap::new();
    for est in &spec.estimators {
        if let Estimator::External(path) = est {
            if !out.contains_key(path) {
                out.insert(path.clone(), ExternalEstimates::from_file(path)?);
            }
        }
    }
    Ok(out)
}

fn run_estimator(
    est: &Estimator,
    inst: &GeneratedInstance,
    replicate: usize,
    externals: &HashMap<PathBuf, ExternalEstimates>,
) -> (std::result::Result<EvaluationReport<f64>, String>, f64) {
    let start = Instant::now();
    let coefficients = match est {
        Estimator::Gaga(c) => gaga_fit(&inst.problem, c).map(|f| f.coefficients),
        Estimator::GagaQr(c) => gaga_qr_fit(&inst.problem, c).map(|f| f.coefficients),
        Estimator::External(path) => match externals[path].rows.get(&replicate) {
            Some(b) => Ok(b.clone()),
            None => {
                return (Err("MissingEstimate".into()), 0.0);
            }
        },
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let outcome = coefficients
        .and_then(|b| acc(&b, &inst.beta_true))
        .map_err(|e| e.kind().to_string());
    (outcome, ms)
}

/// Runs every estimator on every replicate, in parallel over replicates.
/// Rows come back in replicate order, estimators in spec order.
pub fn run_replicates(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let externals = load_externals(spec)?;
    let tag = spec.model.tag();
    let per_replicate: Vec<Vec<ResultRow>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(spec.base_seed, r as u64);
            let row = |estimator: &Estimator, outcome, wall_ms| ResultRow {
                model_tag: tag.clone(),
                seed,
                replicate: r,
                estimator: estimator.label(),
                outcome,
                wall_ms,
            };
            match spec.model.generate(seed) {
                Ok(inst) => spec
                    .estimators
                    .iter()
                    .map(|est| {
                        let (outcome, ms) = run_estimator(est, &inst, r, &externals);
                        row(est, outcome, spec.record_timing.then_some(ms))
                    })
                    .collect(),
                Err(e) => spec
                    .estimators
                    .iter()
                    .map(|est| row(est, Err(e.kind().to_string()), None))
                    .collect(),
            }
        })
        .collect();
    Ok(per_replicate.into_iter().flatten().collect())
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Per-estimator means and standard deviations, in order of first appearance.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut order: Vec<&str> = Vec::new();
    for r in rows {
        if !order.contains(&r.estimator.as_str()) {
            order.push(&r.estimator);
        }
    }
    order
        .into_iter()
        .map(|name| {
            let mine: Vec<&ResultRow> = rows.iter().filter(|r| r.estimator == name).collect();
            let ok: Vec<&EvaluationReport<f64>> = mine.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            let col = |f: &dyn Fn(&EvaluationReport<f64>) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<_>>();
            let (err_mean, err_sd) = mean_sd(&col(&|r| r.err));
            let (acc_mean, acc_sd) = mean_sd(&col(&|r| r.acc));
            let times: Vec<f64> = mine
                .iter()
                .filter(|r| r.outcome.is_ok())
                .filter_map(|r| r.wall_ms)
                .collect();
            SummaryRow {
                model_tag: mine[0].model_tag.clone(),
                estimator: name.to_string(),
                succeeded: ok.len(),
                failed: mine.len() - ok.len(),
                err_mean,
                err_sd,
                acc_mean,
                acc_sd,
                tp_mean: mean_sd(&col(&|r| r.true_positives as f64)).0,
                tn_mean: mean_sd(&col(&|r| r.true_negatives as f64)).0,
                fp_mean: mean_sd(&col(&|r| r.false_positives as f64)).0,
                fn_mean: mean_sd(&col(&|r| r.false_negatives as f64)).0,
                wall_ms_mean: (!times.is_empty()).then(|| mean_sd(&times).0),
            }
        })
        .collect()
}

/// Runs the experiment and writes its CSV to `spec.output_path`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let report = execute(spec)?;
    write_experiment_csv(File::create(&spec.output_path)?, &report)?;
    Ok(report)
}

/// [`run_experiment`] without writing.
pub fn execute(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let rows = run_replicates(spec)?;
    let summaries = summarize(&rows);
    Ok(ExperimentReport {
        base_seed: spec.base_seed,
        rows,
        summaries,
    })
}

const HEADER: [&str; 14] = [
    "model_tag", "seed", "replicate", "estimator", "err", "acc", "tp", "tn", "fp", "fn", "wall_ms", "status",
    "err_sd", "acc_sd",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_experiment_csv<W: Write>(out: W, report: &ExperimentReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in &report.rows {
        let mut rec = vec![r.model_tag.clone(), r.seed.to_string(), r.replicate.to_string(), r.estimator.clone()];
        match &r.outcome {
            Ok(e) => {
                rec.extend([
                    e.err.to_string(),
                    e.acc.to_string(),
                    e.true_positives.to_string(),
                    e.true_negatives.to_string(),
                    e.false_positives.to_string(),
                    e.false_negatives.to_string(),
                    opt(r.wall_ms),
                    "ok".into(),
                ]);
            }
            Err(kind) => {
                rec.extend(std::iter::repeat_n(String::new(), 7));
                rec.push(kind.clone());
            }
        }
        rec.extend([String::new(), String::new()]);
        w.write_record(&rec)?;
    }
    for s in &report.summaries {
        w.write_record([
            s.model_tag.clone(),
            report.base_seed.to_string(),
            "summary".into(),
            s.estimator.clone(),
            s.err_mean.to_string(),
            s.acc_mean.to_string(),
            s.tp_mean.to_string(),
            s.tn_mean.to_string(),
            s.fp_mean.to_string(),
            s.fn_mean.to_string(),
            opt(s.wall_ms_mean),
            format!("ok={}/{}", s.succeeded, s.succeeded + s.failed),
            s.err_sd.to_string(),
            s.acc_sd.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the experiment once per entry of `spec.sample_sizes` on
/// consistency designs and writes the averages to `spec.output_path`.
pub fn run_consistency_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    let rows = sweep(spec)?;
    write_sweep_csv(File::create(&spec.output_path)?, &rows)?;
    Ok(rows)
}

/// [`run_consistency_sweep`] without writing.
pub fn sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    let sizes = spec
        .sample_sizes
        .clone()
        .ok_or_else(|| HarnessError::Config("sweep needs sample_sizes".into()))?;
    let mut out = Vec::new();
    for n in sizes {
        let mut one = spec.clone();
        one.model = ModelSpec::Consistency(n);
        one.validate()?;
        for summary in execute(&one)?.summaries {
            out.push(SweepRow { n, summary });
        }
    }
    Ok(out)
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "estimator", "succeeded", "failed", "err", "err_sd", "acc", "acc_sd"])?;
    for r in rows {
        let s = &r.summary;
        w.write_record([
            r.n.to_string(),
            s.estimator.clone(),
            s.succeeded.to_string(),
            s.failed.to_string(),
            s.err_mean.to_string(),
            s.err_sd.to_string(),
            s.acc_mean.to_string(),
            s.acc_sd.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaga::GagaConfig;

    #[test]
    fn summary_means_match_rows() {
        let spec = ExperimentSpec::new(ModelSpec::Model1, 6, vec![Estimator::Gaga(GagaConfig::default())]);
        let report = execute(&spec).unwrap();
        assert_eq!(report.rows.len(), 6);
        let errs: Vec<f64> = report.rows.iter().map(|r| r.outcome.as_ref().unwrap().err).collect();
        let s = &report.summaries[0];
        assert!((s.err_mean - errs.iter().sum::<f64>() / 6.0).abs() <= 1e-12);
        assert_eq!((s.succeeded, s.failed), (6, 0));
        assert!(report.rows.windows(2).all(|w| w[0].replicate < w[1].replicate));
    }

    #[test]
    fn failures_become_status_rows() {
        let spec = ExperimentSpec::new(
            ModelSpec::Orthogonal {
                n: 2,
                beta: vec![1.0; 3],
                sigma_star: vec![1.0; 3],
            },
            2,
            vec![Estimator::Gaga(GagaConfig::default())],
        );
        let report = execute(&spec).unwrap();
        assert!(report.rows.iter().all(|r| r.outcome == Err("InvalidSize".into())));
        let mut buf = Vec::new();
        write_experiment_csv(&mut buf, &report).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(",,,,,,,,InvalidSize,,"));
    }

    #[test]
    fn sample_sd() {
        assert_eq!(mean_sd(&[1.0, 3.0]), (2.0, 2f64.sqrt()));
        assert_eq!(mean_sd(&[4.0]), (4.0, 0.0));
    }
}

use std::fs;
use std::process::Command;

use gaga::datagen::{gen_model1, replicate_seed};
use gaga::GagaConfig;
use gaga_harness::experiment::{execute, sweep, write_experiment_csv};
use gaga_harness::{run_experiment, Estimator, ExperimentSpec, ModelSpec};

#[test]
fn model1_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::new(ModelSpec::Model1, 100, vec![Estimator::Gaga(GagaConfig::default())]);
    spec.output_path = dir.path().join("m1.csv");
    run_experiment(&spec).unwrap();
    let text = fs::read_to_string(&spec.output_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 100 + 1);
    assert!(lines[0].starts_with("model_tag,seed,replicate,estimator,err,acc,tp,tn,fp,fn,wall_ms,status"));
    assert!(lines[101].starts_with("model1,20240601,summary,gaga,"));
}

#[test]
fn oracle_external_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("truth.csv");
    let beta = gen_model1(replicate_seed(5, 0)).beta_true;
    let row: Vec<String> = beta.iter().map(|b| b.to_string()).collect();
    fs::write(&path, format!("# snap_tolerance=0\nreplicate,b1,b2,b3,b4,b5,b6,b7,b8\n0,{}\n", row.join(","))).unwrap();
    let mut spec = ExperimentSpec::new(ModelSpec::Model1, 2, vec![Estimator::External(path)]);
    spec.base_seed = 5;
    let report = execute(&spec).unwrap();
    let first = report.rows[0].outcome.as_ref().unwrap();
    assert_eq!((first.err, first.acc), (0.0, 1.0));
    // replicate 1 has no row
    assert_eq!(report.rows[1].outcome, Err("MissingEstimate".into()));
    assert_eq!((report.summaries[0].succeeded, report.summaries[0].failed), (1, 1));
}

#[test]
fn reruns_are_byte_identical() {
    let spec = ExperimentSpec::new(
        ModelSpec::Model2,
        8,
        vec![Estimator::GagaQr(GagaConfig::default()), Estimator::Gaga(GagaConfig::default())],
    );
    let render = || {
        let mut buf = Vec::new();
        write_experiment_csv(&mut buf, &execute(&spec).unwrap()).unwrap();
        buf
    };
    assert_eq!(render(), render());
    // estimator order does not change the data
    let mut swapped = spec.clone();
    swapped.estimators.reverse();
    let a = execute(&spec).unwrap();
    let b = execute(&swapped).unwrap();
    assert_eq!(a.rows[0].outcome, b.rows[1].outcome);
    assert_eq!(a.rows[0].seed, b.rows[1].seed);
}

#[test]
fn sweep_has_one_row_per_size() {
    let mut spec = ExperimentSpec::new(ModelSpec::Consistency(30), 5, vec![Estimator::Gaga(GagaConfig::default())]);
    spec.sample_sizes = Some(vec![30, 60, 90, 120, 150]);
    let rows = sweep(&spec).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![30, 60, 90, 120, 150]);
    spec.sample_sizes = Some(vec![4]);
    assert!(sweep(&spec).is_err());
}

#[test]
fn cli_fit_and_errors() {
    let exe = env!("CARGO_BIN_EXE_gaga");
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("inst");
    let ok = Command::new(exe)
        .args(["generate", "--model", "model1", "--seed", "4", "--out"])
        .arg(&stem)
        .status()
        .unwrap();
    assert!(ok.success());
    let out = Command::new(exe)
        .args(["fit", "--qr", "--data"])
        .arg(dir.path().join("inst.data.csv"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.starts_with("index,coefficient,support,tuning\n1,"));

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "model = model1\nreplicates = 0\n").unwrap();
    let out = Command::new(exe).args(["experiment", "--config"]).arg(&bad).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error kind=Config message="), "{err}");
}

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gaga::datagen::{self, parse_data_csv, ModelTag};
use gaga::{gaga_fit, gaga_qr_fit, GagaConfig, VarianceMode};
use gaga_harness::experiment::{self, write_experiment_csv, write_sweep_csv};
use gaga_harness::spec::{parse_list, ExperimentSpec, DEFAULT_SEED};
use gaga_harness::{bench, theorems, HarnessError, Result};

#[derive(Parser)]
#[command(name = "gaga", version, about = "Sparse signal recovery experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct FitFlags {
    /// Sparsity constant, > 1.
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of tuning updates K.
    #[arg(long)]
    iterations: Option<usize>,
    /// fixed | estimated
    #[arg(long)]
    variance_mode: Option<VarianceMode>,
}

impl FitFlags {
    fn apply(&self, c: &mut GagaConfig<f64>) {
        if let Some(a) = self.alpha {
            c.alpha = a;
        }
        if let Some(k) = self.iterations {
            c.iterations = k;
        }
        if let Some(m) = self.variance_mode {
            c.variance_mode = m;
        }
    }

    fn config(&self) -> GagaConfig<f64> {
        let mut c = GagaConfig::default();
        self.apply(&mut c);
        c
    }
}

#[derive(Args)]
struct RunFlags {
    /// Experiment config file (key = value lines).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Output CSV, overriding the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fit: FitFlags,
}

impl RunFlags {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::from_file(&self.config)?;
        if let Some(s) = self.seed {
            spec.base_seed = s;
        }
        if let Some(r) = self.replicates {
            spec.replicates = r;
        }
        if let Some(o) = &self.out {
            spec.output_path = o.clone();
        }
        spec.update_configs(|c| self.fit.apply(c));
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit one data file (`y,x1,…,xp`) and write the estimate.
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// Use the QR variant.
        #[arg(long)]
        qr: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        fit: FitFlags,
    },
    /// Write a simulated instance as `<out>.data.csv` and `<out>.meta.csv`.
    Generate {
        /// model1 | model2 | highdim | consistency-<n>
        #[arg(long)]
        model: ModelTag,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replicated experiment from a config file.
    Experiment {
        #[command(flatten)]
        run: RunFlags,
    },
    /// Consistency sweep over sample sizes.
    Sweep {
        #[command(flatten)]
        run: RunFlags,
        /// Comma-separated sample sizes, overriding the config.
        #[arg(long)]
        sizes: Option<String>,
    },
    /// Support, normality and tuning-limit checks on orthogonal designs.
    Validate {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        replicates: usize,
        #[arg(long, default_value = "5,0")]
        beta: String,
        #[arg(long, default_value = "1,1")]
        sigma_star: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        fit: FitFlags,
    },
    /// Mean and median fit time of both estimators.
    Bench {
        #[arg(long, default_value = "500,1000,2000")]
        dims: String,
        #[arg(long, default_value_t = 4000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        fit: FitFlags,
    },
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit { data, qr, out, fit } => {
            let problem = parse_data_csv(&std::fs::read_to_string(&data)?)?;
            let config = fit.config();
            let est = if qr {
                gaga_qr_fit(&problem, &config)?
            } else {
                gaga_fit(&problem, &config)?
            };
            let mut w = csv::Writer::from_writer(sink(out.as_deref())?);
            w.write_record(["index", "coefficient", "support", "tuning"])?;
            for j in 0..problem.p() {
                w.write_record([
                    (j + 1).to_string(),
                    est.coefficients[j].to_string(),
                    u8::from(est.support[j]).to_string(),
                    est.tuning[j].to_string(),
                ])?;
            }
            w.flush()?;
        }
        Command::Generate { model, seed, out } => {
            let inst = match model {
                ModelTag::Model1 => datagen::gen_model1(seed),
                ModelTag::Model2 => datagen::gen_model2(seed),
                ModelTag::HighDim => datagen::gen_highdim(seed),
                ModelTag::Consistency(n) => datagen::gen_consistency(seed, n)?,
                ModelTag::Orthogonal => {
                    return Err(HarnessError::Config(
                        "orthogonal designs are generated by `validate` or an experiment config".into(),
                    ))
                }
            };
            let stem = out.to_string_lossy();
            let data = File::create(format!("{stem}.data.csv"))?;
            let meta = File::create(format!("{stem}.meta.csv"))?;
            inst.write_csv_pair(io::BufWriter::new(data), io::BufWriter::new(meta))?;
        }
        Command::Experiment { run } => {
            let spec = run.spec()?;
            let report = experiment::execute(&spec)?;
            write_experiment_csv(File::create(&spec.output_path)?, &report)?;
        }
        Command::Sweep { run, sizes } => {
            let mut spec = run.spec()?;
            if let Some(s) = sizes {
                spec.sample_sizes = Some(parse_list("sizes", &s)?);
            }
            spec.validate()?;
            let rows = experiment::sweep(&spec)?;
            write_sweep_csv(File::create(&spec.output_path)?, &rows)?;
        }
        Command::Validate {
            n,
            replicates,
            beta,
            sigma_star,
            seed,
            out,
            fit,
        } => {
            let beta: Vec<f64> = parse_list("beta", &beta)?;
            let sigma: Vec<f64> = parse_list("sigma_star", &sigma_star)?;
            let report = theorems::validate_theorems(n, replicates, &beta, &sigma, &fit.config(), seed)?;
            theorems::write_report_csv(sink(out.as_deref())?, &report)?;
        }
        Command::Bench {
            dims,
            n,
            repeats,
            seed,
            out,
            fit,
        } => {
            let dims: Vec<usize> = parse_list("dims", &dims)?;
            let rows = bench::benchmark_timing(&dims, n, repeats, &fit.config(), seed)?;
            bench::write_timing_csv(sink(out.as_deref())?, &rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error kind={} message={:?}", e.kind(), e.to_string());
            ExitCode::FAILURE
        }
    }
}

//! Command-line harness: seeded experiment reproduction and one-off runs.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ampsure::amp::{amp_run, write_trajectory_csv, AmpRunConfig, ThresholdSource};
use ampsure::error::{Error, Result};
use ampsure::experiment::{builtin_experiments, find_preset, run_experiment, ExperimentSpec};
use ampsure::lasso::{lambda_max, lasso_path, write_lasso_path_csv};
use ampsure::prior::SignalPrior;
use ampsure::problem_gen::{generate, GenConfig};
use ampsure::state_evolution::{
    lambda_path, log_grid, write_lambda_path_csv, SeConfig, ThresholdPolicy,
};
use ampsure::sure::{write_tuner_csv, TunerConfig};

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "ampsure", version, about = "AMP sparse recovery with automatic SURE tuning")]
struct Cli {
    /// Root RNG seed.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads for replicate sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (single-table verbs) or directory (`experiment`); stdout if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, clap::Args)]
struct GenArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_w: f64,
}

impl GenArgs {
    fn config(&self, seed: u64) -> Result<GenConfig> {
        Ok(GenConfig {
            p: self.p,
            delta: self.delta,
            rho: self.rho,
            prior: SignalPrior::sparse_ones(self.rho, self.delta)?,
            sigma_w: self.sigma_w,
            seed,
        })
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a problem instance; emits the config container (JSON), or the
    /// full arrays with --full.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        /// Also dump beta_o, w and y (cross-language validation).
        #[arg(long)]
        full: bool,
    },
    /// Run AMP on a fresh instance and emit the per-iteration trajectory.
    Amp {
        #[command(flatten)]
        gen: GenArgs,
        /// Fixed false-alarm threshold tau = chi * sigma_hat.
        #[arg(long, conflicts_with_all = ["sure", "greedy"])]
        chi: Option<f64>,
        /// Parameterless tuning via SURE + modified bisection.
        #[arg(long)]
        sure: bool,
        /// Oracle per-step optimal thresholds from the generating prior.
        #[arg(long, conflicts_with = "sure")]
        greedy: bool,
        #[arg(long, default_value_t = 200)]
        iters: usize,
    },
    /// Asymptotic lambda path from the state-evolution calibration map.
    Se {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma_w: f64,
        #[arg(long, default_value_t = 0.05)]
        chi_lo: f64,
        #[arg(long, default_value_t = 8.0)]
        chi_hi: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Warm-started LASSO solves along a decreasing lambda grid.
    LassoPath {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 100)]
        lambda_points: usize,
    },
    /// Per-iteration tuner diagnostics (gamma_hat, Delta*, risk, eval counts).
    TuneDemo {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 30)]
        iters: usize,
    },
    /// Run a named preset or a JSON experiment spec file.
    Experiment { spec: String },
    /// List the built-in experiment presets.
    ListPresets,
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| Error::invalid(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    }
    match &cli.cmd {
        Cmd::Gen { gen, full } => {
            let config = gen.config(cli.seed)?;
            config.validate()?;
            let body = if *full {
                let inst = generate(&config)?;
                serde_json::json!({
                    "config": config,
                    "beta_o": inst.beta_o.to_vec(),
                    "w": inst.w.to_vec(),
                    "y": inst.y.to_vec(),
                })
            } else {
                serde_json::json!({ "config": config })
            };
            emit(&cli.out, &to_json(&body)?)
        }
        Cmd::Amp {
            gen,
            chi,
            sure,
            greedy,
            iters,
        } => {
            let config = gen.config(cli.seed)?;
            let inst = generate(&config)?;
            let source = if *sure {
                ThresholdSource::SureTuned(TunerConfig::default())
            } else if *greedy {
                ThresholdSource::OracleGreedy(config.prior.clone())
            } else {
                ThresholdSource::FixedChi(chi.ok_or_else(|| {
                    Error::invalid("pass --chi <value>, --sure, or --greedy")
                })?)
            };
            let run = amp_run(
                &inst,
                &AmpRunConfig {
                    max_iters: *iters,
                    threshold_source: source,
                    mse_tolerance: None,
                    sigma_rel_stop: None,
                },
            )?;
            match cli.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_trajectory_csv(&run.records, &mut buf)
                        .map_err(|e| Error::invalid(format!("csv: {e}")))?;
                    emit(&cli.out, &buf)
                }
                Format::Json => emit(&cli.out, &to_json(&run.records)?),
            }
        }
        Cmd::Se {
            delta,
            rho,
            sigma_w,
            chi_lo,
            chi_hi,
            points,
        } => {
            let cfg = SeConfig {
                prior: SignalPrior::sparse_ones(*rho, *delta)?,
                delta: *delta,
                sigma_w: *sigma_w,
                policy: ThresholdPolicy::FixedChi(1.0),
            };
            let path = lambda_path(&cfg, &log_grid(*chi_lo, *chi_hi, *points))?;
            match cli.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_lambda_path_csv(&path, &mut buf)
                        .map_err(|e| Error::invalid(format!("csv: {e}")))?;
                    emit(&cli.out, &buf)
                }
                Format::Json => emit(&cli.out, &to_json(&path)?),
            }
        }
        Cmd::LassoPath { gen, lambda_points } => {
            let config = gen.config(cli.seed)?;
            let inst = generate(&config)?;
            let lmax = lambda_max(&inst);
            let grid: Vec<f64> = (0..*lambda_points)
                .map(|i| lmax * (0.98 - 0.97 * i as f64 / (*lambda_points - 1).max(1) as f64))
                .collect();
            let sols = lasso_path(&inst, &grid)?;
            match cli.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_lasso_path_csv(&inst, &sols, &mut buf)
                        .map_err(|e| Error::invalid(format!("csv: {e}")))?;
                    emit(&cli.out, &buf)
                }
                Format::Json => {
                    let summary: Vec<_> = sols
                        .iter()
                        .map(|s| {
                            serde_json::json!({
                                "lambda": s.lambda,
                                "l0_fraction": s.l0_fraction(),
                                "mse": s.mse(&inst),
                                "kkt_gap": s.kkt_gap,
                                "iterations": s.iterations,
                            })
                        })
                        .collect();
                    emit(&cli.out, &to_json(&summary)?)
                }
            }
        }
        Cmd::TuneDemo { gen, iters } => {
            let (_, diags) = ampsure::experiment::tune_demo(
                gen.p, gen.delta, gen.rho, gen.sigma_w, cli.seed, *iters,
            )?;
            match cli.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_tuner_csv(&diags, &mut buf)
                        .map_err(|e| Error::invalid(format!("csv: {e}")))?;
                    emit(&cli.out, &buf)
                }
                Format::Json => emit(&cli.out, &to_json(&diags)?),
            }
        }
        Cmd::Experiment { spec } => {
            let resolved: ExperimentSpec = match find_preset(spec) {
                Some(preset) => preset,
                None => {
                    let text = std::fs::read_to_string(spec)
                        .map_err(|e| Error::io(spec.clone(), e))?;
                    serde_json::from_str(&text)
                        .map_err(|e| Error::invalid(format!("spec {spec}: {e}")))?
                }
            };
            let out_dir = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("results").join(&resolved.name));
            let files = run_experiment(&resolved, &out_dir)?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(())
        }
        Cmd::ListPresets => {
            for spec in builtin_experiments() {
                println!("{}", spec.name);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Named experiment presets and the file-writing harness behind the CLI.
//!
//! Every experiment writes plain CSV tables plus a JSON manifest carrying the
//! seeds, the full serialized spec, a config hash, the package version and the
//! wall time, so any output file can be regenerated from the manifest alone.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amp::{amp_run, AmpRunConfig, ThresholdSource};
use crate::error::{Error, Result};
use crate::lasso::{lambda_max, lasso_path, write_lasso_path_csv};
use crate::prior::SignalPrior;
use crate::problem_gen::{generate, GenConfig};
use crate::shrinkage::scalar_risk;
use crate::state_evolution::{
    greedy_optimal_taus, lambda_path, log_grid, maximin_chi, optimal_tau, se_fixed_point_at,
    se_step, write_lambda_path_csv, SeConfig, ThresholdPolicy,
};
use crate::sure::{sure_curve, TunerConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub seed: u64,
    pub replicates: usize,
    pub task: Task,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Task {
    /// SURE curve vs Bayes-risk curve across problem sizes (one file per p).
    RiskVsP {
        delta: f64,
        rho: f64,
        sigma_w: f64,
        ps: Vec<usize>,
        iterations: Vec<usize>,
        gamma_points: usize,
    },
    /// Estimated-risk curves with the bisection pick and the oracle optimum
    /// marked, at selected iterations.
    BisectionSnapshots {
        p: usize,
        delta: f64,
        rho: f64,
        sigma_ws: Vec<f64>,
        snapshot_iters: Vec<usize>,
    },
    /// Excess risk of the bisection pick as a function of the forced step.
    DeltaSensitivity {
        p: usize,
        delta: f64,
        rho: f64,
        sigma_w: f64,
        deltas: Vec<f64>,
        iterations: usize,
    },
    /// MSE vs iteration for sure-tuned / maximin / grid-search-constant chi.
    MseCompare {
        p: usize,
        delta: f64,
        rho: f64,
        sigma_w: f64,
        iterations: usize,
    },
    /// Empirical LASSO path: l0 fraction and MSE along a lambda grid.
    LassoPath {
        p: usize,
        delta: f64,
        rho: f64,
        sigma_w: f64,
        lambda_points: usize,
    },
    /// Asymptotic lambda path from the calibration map.
    SeLambdaPath {
        delta: f64,
        rho: f64,
        sigma_w: f64,
        chi_lo: f64,
        chi_hi: f64,
        points: usize,
    },
    /// Greedy per-step thresholds vs exhaustive joint grid search, T = 3.
    GreedyVsJoint {
        delta: f64,
        rho: f64,
        sigma_w: f64,
        grid_points: usize,
    },
}

pub fn builtin_experiments() -> Vec<ExperimentSpec> {
    let risk_vs_p = |name: &str, seed: u64, delta: f64, rho: f64, sigma_w: f64| ExperimentSpec {
        name: name.to_string(),
        seed,
        replicates: 3,
        task: Task::RiskVsP {
            delta,
            rho,
            sigma_w,
            ps: vec![200, 600, 4000, 10_000],
            iterations: vec![1, 10],
            gamma_points: 50,
        },
    };
    vec![
        risk_vs_p("risk-vs-p-case1", 1000, 0.85, 0.25, 0.0),
        risk_vs_p("risk-vs-p-case2", 1100, 0.85, 0.25, 0.5),
        risk_vs_p("risk-vs-p-case3", 1200, 0.2, 0.1, 0.1),
        ExperimentSpec {
            name: "bisection-snapshots".into(),
            seed: 2000,
            replicates: 1,
            task: Task::BisectionSnapshots {
                p: 2000,
                delta: 0.85,
                rho: 0.25,
                sigma_ws: vec![0.0, 0.2],
                snapshot_iters: vec![1, 5, 10, 50],
            },
        },
        ExperimentSpec {
            name: "delta-sensitivity".into(),
            seed: 3000,
            replicates: 3,
            task: Task::DeltaSensitivity {
                p: 4000,
                delta: 0.85,
                rho: 0.25,
                sigma_w: 0.2,
                deltas: vec![1e-3, 1e-2, 1e-1, 1.0],
                iterations: 10,
            },
        },
        ExperimentSpec {
            name: "mse-compare".into(),
            seed: 4000,
            replicates: 5,
            task: Task::MseCompare {
                p: 2000,
                delta: 0.85,
                rho: 0.25,
                sigma_w: 0.0,
                iterations: 40,
            },
        },
        ExperimentSpec {
            name: "lasso-path".into(),
            seed: 5000,
            replicates: 1,
            task: Task::LassoPath {
                p: 2000,
                delta: 0.5,
                rho: 0.1,
                sigma_w: 0.7f64.sqrt(),
                lambda_points: 100,
            },
        },
        ExperimentSpec {
            name: "se-lambda-path".into(),
            seed: 6000,
            replicates: 1,
            task: Task::SeLambdaPath {
                delta: 0.85,
                rho: 0.25,
                sigma_w: 0.2,
                chi_lo: 0.05,
                chi_hi: 8.0,
                points: 200,
            },
        },
        ExperimentSpec {
            name: "greedy-vs-joint".into(),
            seed: 7000,
            replicates: 1,
            task: Task::GreedyVsJoint {
                delta: 0.85,
                rho: 0.25,
                sigma_w: 0.2,
                grid_points: 20,
            },
        },
    ]
}

pub fn find_preset(name: &str) -> Option<ExperimentSpec> {
    builtin_experiments().into_iter().find(|e| e.name == name)
}

fn gen_config(p: usize, delta: f64, rho: f64, sigma_w: f64, seed: u64) -> Result<GenConfig> {
    Ok(GenConfig {
        p,
        delta,
        rho,
        prior: SignalPrior::sparse_ones(rho, delta)?,
        sigma_w,
        seed,
    })
}

fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

struct CsvBuf {
    rows: Vec<String>,
}

impl CsvBuf {
    fn new(header: &str) -> Self {
        CsvBuf {
            rows: vec![header.to_string()],
        }
    }

    fn push(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }

    fn bytes(&self) -> Vec<u8> {
        let mut s = self.rows.join("\n");
        s.push('\n');
        s.into_bytes()
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Run one experiment, writing its tables and manifest under `out_dir`.
/// Returns the paths written.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if spec.replicates < 1 {
        return Err(Error::invalid("replicates must be >= 1"));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let started = Instant::now();
    let mut files = Vec::new();

    match &spec.task {
        Task::RiskVsP {
            delta,
            rho,
            sigma_w,
            ps,
            iterations,
            gamma_points,
        } => {
            for &p in ps {
                let mut csv = CsvBuf::new("kind,replicate,iteration,gamma,sure,bayes");
                let runs: Vec<_> = (0..spec.replicates)
                    .into_par_iter()
                    .map(|r| -> Result<_> {
                        let cfg = gen_config(p, *delta, *rho, *sigma_w, spec.seed + r as u64)?;
                        let inst = generate(&cfg)?;
                        risk_curves_at_iterations(&inst, iterations, *gamma_points)
                    })
                    .collect();
                let mut per_point: Vec<Vec<f64>> = Vec::new();
                let mut layout: Vec<(usize, f64, f64)> = Vec::new(); // iteration, gamma, bayes
                for (r, run) in runs.into_iter().enumerate() {
                    let rows = run?;
                    if layout.is_empty() {
                        layout = rows.iter().map(|&(it, g, _, b)| (it, g, b)).collect();
                        per_point = vec![Vec::new(); rows.len()];
                    }
                    for (i, &(it, g, sure, bayes)) in rows.iter().enumerate() {
                        per_point[i].push(sure);
                        csv.push(&[
                            "replicate".into(),
                            r.to_string(),
                            it.to_string(),
                            g.to_string(),
                            sure.to_string(),
                            bayes.to_string(),
                        ]);
                    }
                }
                for (i, &(it, g, bayes)) in layout.iter().enumerate() {
                    let med = median(&mut per_point[i]);
                    csv.push(&[
                        "median".into(),
                        String::new(),
                        it.to_string(),
                        g.to_string(),
                        med.to_string(),
                        bayes.to_string(),
                    ]);
                }
                let path = out_dir.join(format!("{}_p{p}.csv", spec.name));
                write_file(&path, &csv.bytes())?;
                files.push(path);
            }
        }
        Task::BisectionSnapshots {
            p,
            delta,
            rho,
            sigma_ws,
            snapshot_iters,
        } => {
            let mut csv =
                CsvBuf::new("sigma_w,iteration,gamma,sure,bayes,gamma_hat,gamma_opt");
            for &sw in sigma_ws {
                let cfg = gen_config(*p, *delta, *rho, sw, spec.seed)?;
                let inst = generate(&cfg)?;
                let prior = cfg.prior.clone();
                let mut tuner = TunerConfig::default();
                let mut state = crate::amp::amp_init(&inst);
                let max_iter = *snapshot_iters.iter().max().unwrap_or(&1);
                for _ in 0..max_iter {
                    let want = snapshot_iters.contains(&(state.t + 1));
                    let (next, diag) = crate::sure::tune_and_step(&state, &inst, &mut tuner);
                    if want {
                        let sigma = state.sigma_hat;
                        let gammas: Vec<f64> =
                            (1..=60).map(|i| 0.1 * i as f64).collect();
                        let curve = sure_curve(&state.pseudo_data, sigma, &gammas, tuner.h);
                        let gamma_opt = optimal_tau(&prior, sigma) / sigma;
                        for (g, est) in curve.gammas.iter().zip(&curve.estimates) {
                            csv.push(&[
                                sw.to_string(),
                                next.t.to_string(),
                                g.to_string(),
                                est.to_string(),
                                scalar_risk(&prior, sigma, g * sigma).to_string(),
                                diag.gamma_hat.to_string(),
                                gamma_opt.to_string(),
                            ]);
                        }
                    }
                    state = next;
                }
            }
            let path = out_dir.join(format!("{}.csv", spec.name));
            write_file(&path, &csv.bytes())?;
            files.push(path);
        }
        Task::DeltaSensitivity {
            p,
            delta,
            rho,
            sigma_w,
            deltas,
            iterations,
        } => {
            let mut csv = CsvBuf::new("kind,replicate,delta,iteration,gamma_hat,excess_risk");
            let rows: Vec<_> = (0..spec.replicates)
                .into_par_iter()
                .map(|r| -> Result<_> {
                    let cfg = gen_config(*p, *delta, *rho, *sigma_w, spec.seed + r as u64)?;
                    let inst = generate(&cfg)?;
                    let mut out = Vec::new();
                    for &d in deltas {
                        let mut tuner = TunerConfig {
                            delta_star: Some(d),
                            ..TunerConfig::default()
                        };
                        let mut state = crate::amp::amp_init(&inst);
                        for _ in 0..*iterations {
                            let sigma = state.sigma_hat;
                            let (next, diag) =
                                crate::sure::tune_and_step(&state, &inst, &mut tuner);
                            let opt_tau = optimal_tau(&cfg.prior, sigma);
                            let excess = scalar_risk(&cfg.prior, sigma, diag.tau)
                                - scalar_risk(&cfg.prior, sigma, opt_tau);
                            out.push((r, d, next.t, diag.gamma_hat, excess));
                            state = next;
                        }
                    }
                    Ok(out)
                })
                .collect();
            let mut all = Vec::new();
            for r in rows {
                all.extend(r?);
            }
            for &(r, d, it, gh, ex) in &all {
                csv.push(&[
                    "replicate".into(),
                    r.to_string(),
                    d.to_string(),
                    it.to_string(),
                    gh.to_string(),
                    ex.to_string(),
                ]);
            }
            for &d in deltas {
                for it in 1..=*iterations {
                    let mut ex: Vec<f64> = all
                        .iter()
                        .filter(|&&(_, dd, tt, _, _)| dd == d && tt == it)
                        .map(|&(_, _, _, _, e)| e)
                        .collect();
                    let med = median(&mut ex);
                    csv.push(&[
                        "median".into(),
                        String::new(),
                        d.to_string(),
                        it.to_string(),
                        String::new(),
                        med.to_string(),
                    ]);
                }
            }
            let path = out_dir.join(format!("{}.csv", spec.name));
            write_file(&path, &csv.bytes())?;
            files.push(path);
        }
        Task::MseCompare {
            p,
            delta,
            rho,
            sigma_w,
            iterations,
        } => {
            let chi_maximin = maximin_chi(*delta);
            let prior = SignalPrior::sparse_ones(*rho, *delta)?;
            // grid-search-constant baseline: fixed chi minimizing the SE MSE
            let se_cfg = SeConfig {
                prior: prior.clone(),
                delta: *delta,
                sigma_w: *sigma_w,
                policy: ThresholdPolicy::FixedChi(1.0),
            };
            let chi_grid_best = best_constant_chi(&se_cfg);
            let sources = [
                ("sure-tuned", ThresholdSource::SureTuned(TunerConfig::default())),
                ("maximin", ThresholdSource::FixedChi(chi_maximin)),
                ("grid-search-constant", ThresholdSource::FixedChi(chi_grid_best)),
            ];
            let mut csv = CsvBuf::new("kind,replicate,method,iteration,mse,sigma_hat");
            let runs: Vec<_> = (0..spec.replicates)
                .into_par_iter()
                .map(|r| -> Result<_> {
                    let cfg = gen_config(*p, *delta, *rho, *sigma_w, spec.seed + r as u64)?;
                    let inst = generate(&cfg)?;
                    let mut out = Vec::new();
                    for (label, src) in &sources {
                        let run = amp_run(
                            &inst,
                            &AmpRunConfig {
                                max_iters: *iterations,
                                threshold_source: src.clone(),
                                mse_tolerance: None,
                                sigma_rel_stop: None,
                            },
                        )?;
                        for rec in &run.records {
                            out.push((r, label.to_string(), rec.t, rec.mse, rec.sigma_hat));
                        }
                    }
                    Ok(out)
                })
                .collect();
            let mut all = Vec::new();
            for r in runs {
                all.extend(r?);
            }
            for (r, label, t, m, s) in &all {
                csv.push(&[
                    "replicate".into(),
                    r.to_string(),
                    label.clone(),
                    t.to_string(),
                    m.to_string(),
                    s.to_string(),
                ]);
            }
            for (label, _) in &sources {
                for t in 0..=*iterations {
                    let mut ms: Vec<f64> = all
                        .iter()
                        .filter(|(_, l, tt, _, _)| l == label && *tt == t)
                        .map(|&(_, _, _, m, _)| m)
                        .collect();
                    if ms.is_empty() {
                        continue;
                    }
                    let med = median(&mut ms);
                    csv.push(&[
                        "median".into(),
                        String::new(),
                        label.to_string(),
                        t.to_string(),
                        med.to_string(),
                        String::new(),
                    ]);
                }
            }
            let path = out_dir.join(format!("{}.csv", spec.name));
            write_file(&path, &csv.bytes())?;
            files.push(path);
        }
        Task::LassoPath {
            p,
            delta,
            rho,
            sigma_w,
            lambda_points,
        } => {
            let cfg = gen_config(*p, *delta, *rho, *sigma_w, spec.seed)?;
            let inst = generate(&cfg)?;
            let lmax = lambda_max(&inst);
            let grid: Vec<f64> = (0..*lambda_points)
                .map(|i| lmax * (0.98 - 0.97 * i as f64 / (*lambda_points - 1) as f64))
                .collect();
            let sols = lasso_path(&inst, &grid)?;
            let mut buf = Vec::new();
            write_lasso_path_csv(&inst, &sols, &mut buf)
                .map_err(|e| Error::invalid(format!("csv: {e}")))?;
            let path = out_dir.join(format!("{}.csv", spec.name));
            write_file(&path, &buf)?;
            files.push(path);
        }
        Task::SeLambdaPath {
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
            let grid = log_grid(*chi_lo, *chi_hi, *points);
            let lp = lambda_path(&cfg, &grid)?;
            let mut buf = Vec::new();
            write_lambda_path_csv(&lp, &mut buf)
                .map_err(|e| Error::invalid(format!("csv: {e}")))?;
            let path = out_dir.join(format!("{}.csv", spec.name));
            write_file(&path, &buf)?;
            files.push(path);
        }
        Task::GreedyVsJoint {
            delta,
            rho,
            sigma_w,
            grid_points,
        } => {
            let cfg = SeConfig {
                prior: SignalPrior::sparse_ones(*rho, *delta)?,
                delta: *delta,
                sigma_w: *sigma_w,
                policy: ThresholdPolicy::OptimalGreedy,
            };
            let greedy = greedy_optimal_taus(&cfg, 3)?;
            let (joint_sigma3, joint_taus) = joint_grid_sigma3(&cfg, *grid_points);
            let mut csv = CsvBuf::new("method,tau1,tau2,tau3,sigma3");
            csv.push(&[
                "greedy".into(),
                greedy.taus[0].to_string(),
                greedy.taus[1].to_string(),
                greedy.taus[2].to_string(),
                greedy.sigmas[3].to_string(),
            ]);
            csv.push(&[
                "joint-grid".into(),
                joint_taus[0].to_string(),
                joint_taus[1].to_string(),
                joint_taus[2].to_string(),
                joint_sigma3.to_string(),
            ]);
            let path = out_dir.join(format!("{}.csv", spec.name));
            write_file(&path, &csv.bytes())?;
            files.push(path);
        }
    }

    let spec_json = serde_json::to_value(spec).map_err(|e| Error::invalid(e.to_string()))?;
    let manifest = serde_json::json!({
        "name": spec.name,
        "seed": spec.seed,
        "replicates": spec.replicates,
        "spec": spec_json,
        "config_hash": fnv1a_hex(&serde_json::to_vec(spec).unwrap()),
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_secs": started.elapsed().as_secs_f64(),
        "files": files.iter().map(|f| f.file_name().unwrap().to_string_lossy().to_string()).collect::<Vec<_>>(),
    });
    let manifest_path = out_dir.join(format!("{}_manifest.json", spec.name));
    write_file(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::invalid(e.to_string()))?
            .as_bytes(),
    )?;
    files.push(manifest_path);
    Ok(files)
}

/// (iteration, gamma, sure, bayes) rows for a sure-tuned run on one instance.
fn risk_curves_at_iterations(
    instance: &crate::problem_gen::ProblemInstance,
    iterations: &[usize],
    gamma_points: usize,
) -> Result<Vec<(usize, f64, f64, f64)>> {
    let prior = instance.config.prior.clone();
    let mut tuner = TunerConfig::default();
    let mut state = crate::amp::amp_init(instance);
    let max_iter = *iterations.iter().max().unwrap_or(&1);
    let mut rows = Vec::new();
    for _ in 0..max_iter {
        if iterations.contains(&(state.t + 1)) {
            let sigma = state.sigma_hat;
            for i in 1..=gamma_points {
                let g = 5.0 * i as f64 / gamma_points as f64;
                let sure = crate::sure::sure_risk(&state.pseudo_data, sigma, g * sigma, tuner.h);
                let bayes = scalar_risk(&prior, sigma, g * sigma);
                rows.push((state.t + 1, g, sure, bayes));
            }
        }
        let (next, _) = crate::sure::tune_and_step(&state, instance, &mut tuner);
        state = next;
    }
    Ok(rows)
}

/// Constant-chi baseline: minimize the SE fixed-point MSE over the default grid.
fn best_constant_chi(cfg: &SeConfig) -> f64 {
    let mut best = 1.0;
    let mut best_mse = f64::INFINITY;
    for chi in log_grid(0.1, 6.0, 80) {
        if let Ok(cal) = se_fixed_point_at(cfg, chi) {
            if cal.mse < best_mse {
                best_mse = cal.mse;
                best = chi;
            }
        }
    }
    best
}

/// Exhaustive T=3 joint threshold search on a per-step grid scaled to the
/// running sigma range.
pub fn joint_grid_sigma3(cfg: &SeConfig, grid_points: usize) -> (f64, [f64; 3]) {
    let sigma0 = cfg.initial_sigma2().sqrt();
    let tau_grid = |sigma: f64| -> Vec<f64> {
        (1..=grid_points)
            .map(|i| 3.0 * sigma * i as f64 / grid_points as f64)
            .collect()
    };
    let mut best = f64::INFINITY;
    let mut best_taus = [0.0; 3];
    for &t1 in &tau_grid(sigma0) {
        let s1 = se_step(sigma0, t1, cfg);
        for &t2 in &tau_grid(s1) {
            let s2 = se_step(s1, t2, cfg);
            for &t3 in &tau_grid(s2) {
                let s3 = se_step(s2, t3, cfg);
                if s3 < best {
                    best = s3;
                    best_taus = [t1, t2, t3];
                }
            }
        }
    }
    (best, best_taus)
}

/// Finite-p MSE trace under the sure-tuned source (helper for the CLI demo).
pub fn tune_demo(p: usize, delta: f64, rho: f64, sigma_w: f64, seed: u64, iters: usize)
    -> Result<(Vec<crate::amp::AmpIterationRecord>, Vec<crate::sure::TunerDiagnostics>)>
{
    let cfg = gen_config(p, delta, rho, sigma_w, seed)?;
    let inst = generate(&cfg)?;
    let run = amp_run(
        &inst,
        &AmpRunConfig {
            max_iters: iters,
            threshold_source: ThresholdSource::SureTuned(TunerConfig::default()),
            mse_tolerance: None,
            sigma_rel_stop: None,
        },
    )?;
    Ok((run.records, run.tuner_diagnostics))
}

// re-export used by the CLI `tune-demo` verb
pub use crate::sure::write_tuner_csv;

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn presets_present_and_roundtrip() {
        let all = builtin_experiments();
        let names: Vec<_> = all.iter().map(|e| e.name.as_str()).collect();
        for expected in [
            "risk-vs-p-case1",
            "risk-vs-p-case2",
            "risk-vs-p-case3",
            "bisection-snapshots",
            "delta-sensitivity",
            "mse-compare",
            "lasso-path",
            "se-lambda-path",
            "greedy-vs-joint",
        ] {
            assert!(names.contains(&expected), "missing preset {expected}");
        }
        // case parameters pinned
        if let Task::RiskVsP { delta, rho, sigma_w, .. } = &find_preset("risk-vs-p-case2").unwrap().task {
            assert_eq!((*delta, *rho, *sigma_w), (0.85, 0.25, 0.5));
        } else {
            panic!("wrong task type");
        }
        if let Task::RiskVsP { delta, rho, sigma_w, .. } = &find_preset("risk-vs-p-case3").unwrap().task {
            assert_eq!((*delta, *rho, *sigma_w), (0.2, 0.1, 0.1));
        } else {
            panic!("wrong task type");
        }
        for spec in &all {
            let json = serde_json::to_string(spec).unwrap();
            let back: ExperimentSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(serde_json::to_string(&back).unwrap(), json);
        }
    }

    #[test]
    fn seed_isolation_across_presets() {
        let all = builtin_experiments();
        let mut seeds: Vec<u64> = all.iter().map(|e| e.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), all.len(), "presets must not share seed bases");
    }

    #[test]
    fn greedy_vs_joint_experiment_writes_files() {
        let dir = tempdir().unwrap();
        let spec = find_preset("greedy-vs-joint").unwrap();
        let files = run_experiment(&spec, dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let csv = std::fs::read_to_string(&files[0]).unwrap();
        assert!(csv.starts_with("method,tau1,tau2,tau3,sigma3"));
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&files[1]).unwrap()).unwrap();
        assert_eq!(manifest["name"], "greedy-vs-joint");
        assert!(manifest["config_hash"].as_str().unwrap().len() == 16);
    }

    #[test]
    fn determinism_of_outputs() {
        let dir1 = tempdir().unwrap();
        let dir2 = tempdir().unwrap();
        let spec = find_preset("se-lambda-path").unwrap();
        let f1 = run_experiment(&spec, dir1.path()).unwrap();
        let f2 = run_experiment(&spec, dir2.path()).unwrap();
        // compare the CSV tables byte for byte (manifest carries wall time)
        let a = std::fs::read(&f1[0]).unwrap();
        let b = std::fs::read(&f2[0]).unwrap();
        assert_eq!(a, b);
    }
}

//! Finite-p AMP iterations with the Onsager correction and online noise
//! tracking via sigma_hat = ||z||/sqrt(n).
//!
//! Cost contract: `amp_step` performs exactly two matrix-vector products
//! (X * beta and X^T * z); threshold tuning works on the stored pseudo-data
//! and adds none. `amp_init` spends one product to seed the pseudo-data.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::prior::SignalPrior;
use crate::problem_gen::ProblemInstance;
use crate::shrinkage::soft_threshold;
use crate::state_evolution::optimal_tau;
use crate::sure::{tune_and_step, TunerConfig, TunerDiagnostics};

#[derive(Debug, Clone)]
pub struct AmpState {
    pub t: usize,
    pub beta: Array1<f64>,
    pub z: Array1<f64>,
    /// beta + X^T z, the vector every threshold decision reads.
    pub pseudo_data: Array1<f64>,
    /// ||z|| / sqrt(n), the online estimate of the effective noise level.
    pub sigma_hat: f64,
    pub active_count: usize,
    pub tau_used: f64,
    /// Set when no further step can change the state (y = 0 at init).
    pub terminal: bool,
    /// Running count of matrix-vector products spent on this trajectory.
    pub matvec_count: u64,
}

/// Where each iteration's threshold comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ThresholdSource {
    /// tau^t = chi * sigma_hat^t.
    FixedChi(f64),
    /// Prescribed taus; the last entry repeats.
    ExplicitSequence(Vec<f64>),
    /// Per-step risk-optimal threshold computed from the (oracle) prior.
    OracleGreedy(SignalPrior),
    /// Parameterless: SURE estimate + modified bisection.
    SureTuned(TunerConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmpRunConfig {
    pub max_iters: usize,
    pub threshold_source: ThresholdSource,
    /// Early stop once (1/p)||beta - beta_o||^2 drops below this (test use).
    pub mse_tolerance: Option<f64>,
    /// Early stop on relative change of sigma_hat (harness use).
    pub sigma_rel_stop: Option<f64>,
}

impl AmpRunConfig {
    pub fn new(threshold_source: ThresholdSource) -> Self {
        AmpRunConfig {
            max_iters: 200,
            threshold_source,
            mse_tolerance: None,
            sigma_rel_stop: None,
        }
    }
}

/// Per-iteration scalar summary (the full vectors live only in the final state).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmpIterationRecord {
    pub t: usize,
    pub tau: f64,
    pub sigma_hat: f64,
    pub active_count: usize,
    pub mse: f64,
}

#[derive(Debug)]
pub struct AmpRun {
    pub final_state: AmpState,
    pub records: Vec<AmpIterationRecord>,
    pub tuner_diagnostics: Vec<TunerDiagnostics>,
}

pub fn mse(state: &AmpState, instance: &ProblemInstance) -> f64 {
    let d = &state.beta - &instance.beta_o;
    d.dot(&d) / instance.p() as f64
}

pub fn amp_init(instance: &ProblemInstance) -> AmpState {
    let n = instance.n();
    let p = instance.p();
    let z = instance.y.clone();
    let sigma_hat = (z.dot(&z) / n as f64).sqrt();
    if sigma_hat == 0.0 {
        return AmpState {
            t: 0,
            beta: Array1::zeros(p),
            z,
            pseudo_data: Array1::zeros(p),
            sigma_hat: 0.0,
            active_count: 0,
            tau_used: 0.0,
            terminal: true,
            matvec_count: 0,
        };
    }
    let pseudo_data = instance.x.t().dot(&z); // beta = 0, so pseudo = X^T z
    AmpState {
        t: 0,
        beta: Array1::zeros(p),
        z,
        pseudo_data,
        sigma_hat,
        active_count: 0,
        tau_used: 0.0,
        terminal: false,
        matvec_count: 1,
    }
}

pub fn amp_step(state: &AmpState, instance: &ProblemInstance, tau: f64) -> AmpState {
    debug_assert!(tau >= 0.0);
    let n = instance.n();
    let beta = state.pseudo_data.mapv(|x| soft_threshold(x, tau));
    let active_count = beta.iter().filter(|&&b| b != 0.0).count();
    let onsager = active_count as f64 / n as f64;
    let mut z = &instance.y - &instance.x.dot(&beta);
    z.scaled_add(onsager, &state.z);
    let sigma_hat = (z.dot(&z) / n as f64).sqrt();
    let pseudo_data = &beta + &instance.x.t().dot(&z);
    AmpState {
        t: state.t + 1,
        beta,
        z,
        pseudo_data,
        sigma_hat,
        active_count,
        tau_used: tau,
        terminal: false,
        matvec_count: state.matvec_count + 2,
    }
}

pub fn amp_run(instance: &ProblemInstance, config: &AmpRunConfig) -> Result<AmpRun> {
    let mut state = amp_init(instance);
    let mut records = vec![AmpIterationRecord {
        t: 0,
        tau: 0.0,
        sigma_hat: state.sigma_hat,
        active_count: 0,
        mse: mse(&state, instance),
    }];
    let mut tuner_diagnostics = Vec::new();
    // local copy so delta_star locking does not leak into the caller's config
    let mut tuner_cfg = match &config.threshold_source {
        ThresholdSource::SureTuned(cfg) => Some(cfg.clone()),
        _ => None,
    };

    for t in 0..config.max_iters {
        if state.terminal {
            break;
        }
        let next = match &config.threshold_source {
            ThresholdSource::FixedChi(chi) => amp_step(&state, instance, chi * state.sigma_hat),
            ThresholdSource::ExplicitSequence(taus) => {
                amp_step(&state, instance, taus[t.min(taus.len() - 1)])
            }
            ThresholdSource::OracleGreedy(prior) => {
                let tau = if state.sigma_hat > 0.0 {
                    optimal_tau(prior, state.sigma_hat)
                } else {
                    0.0
                };
                amp_step(&state, instance, tau)
            }
            ThresholdSource::SureTuned(_) => {
                let (next, diag) = tune_and_step(&state, instance, tuner_cfg.as_mut().unwrap());
                tuner_diagnostics.push(diag);
                next
            }
        };
        let prev_sigma = state.sigma_hat;
        state = next;
        let m = mse(&state, instance);
        records.push(AmpIterationRecord {
            t: state.t,
            tau: state.tau_used,
            sigma_hat: state.sigma_hat,
            active_count: state.active_count,
            mse: m,
        });
        if let Some(tol) = config.mse_tolerance {
            if m < tol {
                break;
            }
        }
        if let Some(rel) = config.sigma_rel_stop {
            if prev_sigma > 0.0 && ((state.sigma_hat - prev_sigma) / prev_sigma).abs() < rel {
                break;
            }
        }
    }
    Ok(AmpRun {
        final_state: state,
        records,
        tuner_diagnostics,
    })
}

pub fn write_trajectory_csv<W: std::io::Write>(
    records: &[AmpIterationRecord],
    out: W,
) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["t", "tau", "sigma_hat", "active_count", "mse"])?;
    for r in records {
        wtr.write_record([
            r.t.to_string(),
            r.tau.to_string(),
            r.sigma_hat.to_string(),
            r.active_count.to_string(),
            r.mse.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

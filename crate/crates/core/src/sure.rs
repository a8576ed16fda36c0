//! Per-iteration SURE risk estimation and the modified bisection threshold
//! search with automatic step (Delta) selection — the parameterless tuner.
//!
//! Everything here reads only the pseudo-data vector: O(p) scalar work per
//! risk evaluation and no matrix-vector products.

use std::collections::HashMap;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::amp::{amp_step, AmpState};
use crate::problem_gen::ProblemInstance;
use crate::shrinkage::{
    smoothed_soft_threshold, smoothed_soft_threshold_deriv, SmoothingBandwidth,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunerConfig {
    pub h: SmoothingBandwidth,
    pub bisection_iters: usize,
    /// Flat-region band around Diff = 0 that stops the search early.
    pub epsilon: f64,
    /// Candidate finite-difference steps tried at the first iteration.
    pub delta_grid: Vec<f64>,
    /// Locked after the first tuned iteration; reused afterwards.
    pub delta_star: Option<f64>,
}

impl Default for TunerConfig {
    fn default() -> Self {
        TunerConfig {
            h: SmoothingBandwidth::ZERO,
            bisection_iters: 15,
            epsilon: 0.0,
            delta_grid: vec![
                1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 0.1, 0.5, 1.0, 5.0, 10.0,
            ],
            delta_star: None,
        }
    }
}

impl TunerConfig {
    pub fn validate(&self) -> crate::error::Result<()> {
        use crate::error::Error;
        if self.bisection_iters < 1 {
            return Err(Error::invalid("bisection_iters must be >= 1"));
        }
        if self.delta_grid.is_empty()
            || self.delta_grid.iter().any(|d| !(*d > 0.0))
            || self.delta_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::invalid(
                "delta_grid must be nonempty, positive, strictly increasing",
            ));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::invalid("epsilon must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskCurve {
    pub gammas: Vec<f64>,
    pub estimates: Vec<f64>,
    pub sigma_used: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TunerDiagnostics {
    pub iteration: usize,
    pub gamma_hat: f64,
    pub tau: f64,
    pub delta_star: f64,
    pub risk_at_gamma_hat: f64,
    /// Distinct SURE evaluations spent this iteration (each is O(p)).
    pub sure_evals: usize,
}

/// The empirical risk estimate at threshold tau:
/// (1/p)||eta_h(pd; tau) - pd||^2 + sigma^2 + (2 sigma^2/p) 1^T (eta_h' - 1).
pub fn sure_risk(pseudo_data: &Array1<f64>, sigma: f64, tau: f64, h: SmoothingBandwidth) -> f64 {
    debug_assert!(sigma > 0.0);
    let p = pseudo_data.len() as f64;
    let mut shrink = 0.0;
    let mut deriv_sum = 0.0;
    for &x in pseudo_data {
        let d = smoothed_soft_threshold(x, tau, h) - x;
        shrink += d * d;
        deriv_sum += smoothed_soft_threshold_deriv(x, tau, h);
    }
    shrink / p + sigma * sigma + 2.0 * sigma * sigma * (deriv_sum / p - 1.0)
}

/// Sample the SURE estimate on a gamma grid (tau = gamma * sigma).
pub fn sure_curve(
    pseudo_data: &Array1<f64>,
    sigma: f64,
    gammas: &[f64],
    h: SmoothingBandwidth,
) -> RiskCurve {
    RiskCurve {
        gammas: gammas.to_vec(),
        estimates: gammas
            .iter()
            .map(|&g| sure_risk(pseudo_data, sigma, g * sigma, h))
            .collect(),
        sigma_used: sigma,
    }
}

/// The search core, generic over the risk callback: bisection on the secant
/// slope Diff = (R(gamma + delta) - R(gamma)) / delta. Returns the last probed
/// gamma together with every bracket the loop held (for invariant tests).
pub fn bisect_gamma_traced(
    mut risk: impl FnMut(f64) -> f64,
    gamma_max: f64,
    delta: f64,
    epsilon: f64,
    iters: usize,
) -> (f64, Vec<(f64, f64)>) {
    let mut lo = 0.0;
    let mut hi = gamma_max;
    let mut brackets = vec![(lo, hi)];
    if !(gamma_max > 0.0) {
        return (0.0, brackets);
    }
    let mut gamma = 0.0;
    for _ in 0..iters {
        gamma = 0.5 * (lo + hi);
        let diff = (risk(gamma + delta) - risk(gamma)) / delta;
        if diff > epsilon {
            hi = gamma;
        } else if diff < -epsilon {
            lo = gamma;
        } else {
            break;
        }
        brackets.push((lo, hi));
    }
    (gamma, brackets)
}

pub fn bisect_gamma(
    risk: impl FnMut(f64) -> f64,
    gamma_max: f64,
    delta: f64,
    epsilon: f64,
    iters: usize,
) -> f64 {
    bisect_gamma_traced(risk, gamma_max, delta, epsilon, iters).0
}

fn bisection_with_stats(
    pseudo_data: &Array1<f64>,
    sigma: f64,
    delta: f64,
    config: &TunerConfig,
) -> (f64, f64, usize) {
    let gamma_max = pseudo_data.iter().fold(0.0f64, |m, &x| m.max(x.abs())) / sigma;
    let mut cache: HashMap<u64, f64> = HashMap::new();
    let mut evals = 0usize;
    let (gamma, at) = {
        let mut risk = |gamma: f64| {
            *cache.entry(gamma.to_bits()).or_insert_with(|| {
                evals += 1;
                sure_risk(pseudo_data, sigma, gamma * sigma, config.h)
            })
        };
        let (gamma, _) = bisect_gamma_traced(
            &mut risk,
            gamma_max,
            delta,
            config.epsilon,
            config.bisection_iters,
        );
        let at = risk(gamma);
        (gamma, at)
    };
    (gamma, at, evals)
}

/// Modified bisection over gamma in [0, max|pd|/sigma] with step `delta`.
pub fn modified_bisection(
    pseudo_data: &Array1<f64>,
    sigma: f64,
    delta: f64,
    config: &TunerConfig,
) -> f64 {
    bisection_with_stats(pseudo_data, sigma, delta, config).0
}

/// First-iteration step selection: run the bisection once per candidate Delta
/// and keep the one whose gamma attains the smallest estimated risk; ties go
/// to the smaller Delta.
pub fn select_delta_star(pseudo_data: &Array1<f64>, sigma: f64, config: &TunerConfig) -> f64 {
    let mut best_delta = config.delta_grid[0];
    let mut best_risk = f64::INFINITY;
    for &delta in &config.delta_grid {
        let (_, risk, _) = bisection_with_stats(pseudo_data, sigma, delta, config);
        if risk < best_risk {
            best_risk = risk;
            best_delta = delta;
        }
    }
    best_delta
}

/// One parameterless AMP iteration: select/lock Delta*, search gamma, then
/// take the AMP step at tau = gamma_hat * sigma_hat.
pub fn tune_and_step(
    state: &AmpState,
    instance: &ProblemInstance,
    config: &mut TunerConfig,
) -> (AmpState, TunerDiagnostics) {
    let sigma = state.sigma_hat;
    let degenerate = sigma == 0.0 || state.pseudo_data.iter().all(|&x| x == 0.0);
    if degenerate {
        let next = amp_step(state, instance, 0.0);
        let diag = TunerDiagnostics {
            iteration: next.t,
            gamma_hat: 0.0,
            tau: 0.0,
            delta_star: config.delta_star.unwrap_or(0.0),
            risk_at_gamma_hat: 0.0,
            sure_evals: 0,
        };
        return (next, diag);
    }
    let mut evals = 0usize;
    let delta_star = match config.delta_star {
        Some(d) => d,
        None => {
            let d = select_delta_star(&state.pseudo_data, sigma, config);
            // selection cost: one bisection per candidate
            evals += config.delta_grid.len() * 2 * config.bisection_iters;
            config.delta_star = Some(d);
            d
        }
    };
    let (gamma_hat, risk_at, search_evals) =
        bisection_with_stats(&state.pseudo_data, sigma, delta_star, config);
    evals += search_evals;
    let tau = gamma_hat * sigma;
    let next = amp_step(state, instance, tau);
    let diag = TunerDiagnostics {
        iteration: next.t,
        gamma_hat,
        tau,
        delta_star,
        risk_at_gamma_hat: risk_at,
        sure_evals: evals,
    };
    (next, diag)
}

pub fn write_tuner_csv<W: std::io::Write>(
    diags: &[TunerDiagnostics],
    out: W,
) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record([
        "iteration",
        "gamma_hat",
        "tau",
        "delta_star",
        "risk_at_gamma_hat",
        "sure_evals",
    ])?;
    for d in diags {
        wtr.write_record([
            d.iteration.to_string(),
            d.gamma_hat.to_string(),
            d.tau.to_string(),
            d.delta_star.to_string(),
            d.risk_at_gamma_hat.to_string(),
            d.sure_evals.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

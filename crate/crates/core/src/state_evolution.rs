//! State evolution: the scalar recursion predicting AMP's effective noise
//! level, its fixed point, the chi <-> lambda calibration map, greedy-optimal
//! threshold sequences, and the noiseless-recovery maximin baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{phi, q};
use crate::prior::SignalPrior;
use crate::shrinkage::{exceed_probability, scalar_risk, scalar_risk_deriv};

const FP_TOL: f64 = 1e-12;
/// Upper bound on gamma = tau/sigma used by the greedy threshold search and
/// as the returned cap for the zero prior.
pub const GAMMA_CAP: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ThresholdPolicy {
    /// Fixed false-alarm policy tau^t = chi * sigma^t.
    FixedChi(f64),
    /// Per-step minimization of the scalar risk over tau.
    OptimalGreedy,
    /// Prescribed threshold values; the last entry repeats if the trace is longer.
    ExplicitSequence(Vec<f64>),
}

impl ThresholdPolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            ThresholdPolicy::FixedChi(chi) if !(*chi >= 0.0) => {
                Err(Error::invalid("chi must be >= 0"))
            }
            ThresholdPolicy::ExplicitSequence(taus) if taus.is_empty() => {
                Err(Error::invalid("explicit threshold sequence must be nonempty"))
            }
            ThresholdPolicy::ExplicitSequence(taus) if taus.iter().any(|t| !(*t >= 0.0)) => {
                Err(Error::invalid("explicit thresholds must be >= 0"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeConfig {
    pub prior: SignalPrior,
    pub delta: f64,
    pub sigma_w: f64,
    pub policy: ThresholdPolicy,
}

impl SeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::invalid("delta must lie in (0, 1]"));
        }
        if !(self.sigma_w >= 0.0) {
            return Err(Error::invalid("sigma_w must be >= 0"));
        }
        self.policy.validate()
    }

    /// (sigma^0)^2 = E[B^2] / delta.
    pub fn initial_sigma2(&self) -> f64 {
        self.prior.second_moment() / self.delta
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeTrace {
    /// sigma^0 .. sigma^T
    pub sigmas: Vec<f64>,
    /// tau^0 .. tau^{T-1}
    pub taus: Vec<f64>,
    pub converged: bool,
    pub fixed_point_sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaCalibration {
    pub chi: f64,
    pub sigma_hat: f64,
    pub lambda: f64,
    pub mse: f64,
    pub active_fraction: f64,
}

/// One step of the recursion: sqrt(sigma_w^2 + risk(sigma, tau) / delta).
pub fn se_step(sigma: f64, tau: f64, config: &SeConfig) -> f64 {
    let s2 = config.sigma_w * config.sigma_w
        + scalar_risk(&config.prior, sigma, tau) / config.delta;
    s2.sqrt()
}

/// argmin_tau of the scalar risk at noise level sigma, by bisection on the
/// closed-form derivative (valid on a bowl-shaped risk). For the zero prior
/// the risk is monotone decreasing, so the search cap is returned.
pub fn optimal_tau(prior: &SignalPrior, sigma: f64) -> f64 {
    if prior.is_zero() {
        return GAMMA_CAP * sigma;
    }
    let d = |gamma: f64| scalar_risk_deriv(prior, sigma, gamma * sigma);
    let mut hi = 1.0;
    while d(hi) <= 0.0 {
        hi *= 2.0;
        if hi >= GAMMA_CAP {
            return GAMMA_CAP * sigma;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi) * sigma
}

/// Iterate the recursion for `t_max` steps under the configured policy.
/// `init_sigma2` overrides the Thm-3 initialization E[B^2]/delta (used by the
/// finite-p consistency tests, where the AMP start carries the measurement
/// noise as well).
pub fn se_trace(config: &SeConfig, t_max: usize, init_sigma2: Option<f64>) -> Result<SeTrace> {
    config.validate()?;
    let s0 = init_sigma2.unwrap_or_else(|| config.initial_sigma2());
    if !(s0 > 0.0) {
        return Ok(SeTrace {
            sigmas: vec![0.0; t_max + 1],
            taus: vec![0.0; t_max],
            converged: true,
            fixed_point_sigma: 0.0,
        });
    }
    let mut sigmas = vec![s0.sqrt()];
    let mut taus = Vec::with_capacity(t_max);
    let mut converged = false;
    for t in 0..t_max {
        let sigma = sigmas[t];
        let tau = match &config.policy {
            ThresholdPolicy::FixedChi(chi) => chi * sigma,
            ThresholdPolicy::OptimalGreedy => optimal_tau(&config.prior, sigma),
            ThresholdPolicy::ExplicitSequence(seq) => seq[t.min(seq.len() - 1)],
        };
        let next = se_step(sigma, tau, config);
        taus.push(tau);
        sigmas.push(next);
        // relative test: a noiseless trace decaying geometrically to zero
        // must keep going rather than freeze at some small absolute level
        if (next * next - sigma * sigma).abs() <= FP_TOL * (next * next).max(FP_TOL) {
            converged = true;
            // keep the trace length the caller asked for
            let last_tau = *taus.last().unwrap();
            for _ in t + 1..t_max {
                taus.push(last_tau);
                sigmas.push(next);
            }
            break;
        }
    }
    let fixed_point_sigma = *sigmas.last().unwrap();
    Ok(SeTrace {
        sigmas,
        taus,
        converged,
        fixed_point_sigma,
    })
}

/// Greedy per-step optimal thresholds (policy override).
pub fn greedy_optimal_taus(config: &SeConfig, t_max: usize) -> Result<SeTrace> {
    let cfg = SeConfig {
        policy: ThresholdPolicy::OptimalGreedy,
        ..config.clone()
    };
    se_trace(&cfg, t_max, None)
}

fn calibration_at(config: &SeConfig, chi: f64, sigma_hat: f64) -> LambdaCalibration {
    let tau = chi * sigma_hat;
    let active_fraction = exceed_probability(&config.prior, sigma_hat, tau);
    LambdaCalibration {
        chi,
        sigma_hat,
        lambda: tau * (1.0 - active_fraction / config.delta),
        mse: scalar_risk(&config.prior, sigma_hat, tau),
        active_fraction,
    }
}

enum FpOutcome {
    Converged(f64),
    /// The recursion runs off to infinity: no finite fixed point exists at
    /// this chi (the large-sigma slope of Psi exceeds 1).
    Diverging,
}

fn fixed_point_outcome(config: &SeConfig, chi: f64, init_sigma2: f64) -> Result<FpOutcome> {
    let psi = |s2: f64| -> f64 {
        let sigma = s2.sqrt();
        config.sigma_w * config.sigma_w
            + scalar_risk(&config.prior, sigma, chi * sigma) / config.delta
    };
    // Psi is concave in s = sigma^2, so its slope decreases from
    // (nz*(1+chi^2) + p0*z)/delta at s = 0 to z/delta as s -> infinity, where
    // z = 2((1+chi^2)Q(chi) - chi*phi(chi)) is the zero-atom risk slope. The
    // asymptotic slope reaching 1 means the recursion has no finite fixed
    // point; plain iteration would drift away too slowly to detect near that
    // boundary, so the slope test and a bracketing bisection replace it.
    let z = 2.0 * ((1.0 + chi * chi) * q(chi) - chi * phi(chi));
    if !(init_sigma2 > 0.0) && config.sigma_w == 0.0 {
        return Ok(FpOutcome::Converged(0.0));
    }
    if z >= config.delta {
        return Ok(FpOutcome::Diverging);
    }
    if config.sigma_w == 0.0 {
        // the origin is a fixed point; whether it absorbs the recursion is
        // decided by the slope there
        let p0 = config.prior.zero_mass();
        let slope0 = ((1.0 - p0) * (1.0 + chi * chi) + p0 * z) / config.delta;
        if slope0 <= 1.0 {
            return Ok(FpOutcome::Converged(0.0));
        }
    }
    // unique positive crossing of Psi(s) = s by concavity
    let g = |s2: f64| psi(s2) - s2;
    let mut lo = 0.0;
    let mut hi = init_sigma2.max(config.sigma_w * config.sigma_w).max(1e-8);
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Ok(FpOutcome::Diverging);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(FpOutcome::Converged(0.5 * (lo + hi)))
}

fn fixed_point_sigma2(config: &SeConfig, chi: f64, init_sigma2: f64) -> Result<f64> {
    match fixed_point_outcome(config, chi, init_sigma2)? {
        FpOutcome::Converged(s2) => Ok(s2),
        FpOutcome::Diverging => Err(Error::Divergence {
            what: format!("state-evolution fixed point at chi={chi}"),
        }),
    }
}

/// Solve the fixed point sigma-hat of the recursion under FixedChi and return
/// the lambda calibration at that point. Damped iteration to |delta sigma^2| <
/// 1e-12; divergence (e.g. chi = 0 with delta < 1) is reported, not truncated.
pub fn se_fixed_point(config: &SeConfig) -> Result<LambdaCalibration> {
    config.validate()?;
    let chi = match config.policy {
        ThresholdPolicy::FixedChi(chi) => chi,
        _ => return Err(Error::invalid("se_fixed_point needs a FixedChi policy")),
    };
    se_fixed_point_at(config, chi)
}

/// Fixed point for an explicit chi (ignores config.policy); used by grid sweeps.
pub fn se_fixed_point_at(config: &SeConfig, chi: f64) -> Result<LambdaCalibration> {
    let init = config.initial_sigma2().max(config.sigma_w * config.sigma_w);
    let init = if init > 0.0 { init } else { 1.0 };
    let s2 = fixed_point_sigma2(config, chi, init)?;
    if s2 == 0.0 {
        // exact recovery; calibration degenerates (lambda -> 0)
        return Ok(LambdaCalibration {
            chi,
            sigma_hat: 0.0,
            lambda: 0.0,
            mse: 0.0,
            active_fraction: 0.0,
        });
    }
    Ok(calibration_at(config, chi, s2.sqrt()))
}

/// Same solve started from a caller-chosen initialization (uniqueness tests).
pub fn se_fixed_point_from(config: &SeConfig, chi: f64, init_sigma2: f64) -> Result<f64> {
    fixed_point_sigma2(config, chi, init_sigma2).map(|s2| s2.sqrt())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaPath {
    /// Calibrations with lambda > 0, in chi order.
    pub points: Vec<LambdaCalibration>,
    /// Grid points without a lambda > 0 calibration: either the fixed point
    /// exists but maps to lambda <= 0, or the recursion diverges (the small-chi
    /// regime where Psi has no finite fixed point).
    pub excluded_chis: Vec<f64>,
}

/// Sweep a strictly increasing chi grid and keep the lambda > 0 branch.
pub fn lambda_path(config: &SeConfig, chi_grid: &[f64]) -> Result<LambdaPath> {
    config.validate()?;
    if chi_grid.windows(2).any(|w| w[1] <= w[0]) || chi_grid.iter().any(|c| !(*c > 0.0)) {
        return Err(Error::invalid("chi grid must be strictly increasing and positive"));
    }
    let mut points = Vec::new();
    let mut excluded_chis = Vec::new();
    for &chi in chi_grid {
        match se_fixed_point_at(config, chi) {
            Ok(cal) if cal.lambda > 0.0 => points.push(cal),
            Ok(_) | Err(Error::Divergence { .. }) => excluded_chis.push(chi),
            Err(e) => return Err(e),
        }
    }
    Ok(LambdaPath {
        points,
        excluded_chis,
    })
}

/// Default 200-point log-spaced chi grid on [1e-2, 10].
pub fn default_chi_grid() -> Vec<f64> {
    log_grid(1e-2, 10.0, 200)
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (l, h) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (l + (h - l) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

pub fn write_lambda_path_csv<W: std::io::Write>(path: &LambdaPath, out: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["chi", "lambda", "sigma_hat", "mse", "active_fraction"])?;
    for p in &path.points {
        wtr.write_record([
            p.chi.to_string(),
            p.lambda.to_string(),
            p.sigma_hat.to_string(),
            p.mse.to_string(),
            p.active_fraction.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Small-sigma slope of the noiseless recursion at signal fraction eps = rho*delta:
/// the zero fixed point of the noiseless SE is stable iff this is < 1.
/// (As sigma -> 0 the per-atom risk tends to sigma^2 (1 + chi^2) and the
/// zero-mass term is exactly sigma^2 * 2((1+chi^2)Q(chi) - chi phi(chi)).)
pub fn noiseless_slope(chi: f64, eps: f64, delta: f64) -> f64 {
    let z = 2.0 * ((1.0 + chi * chi) * q(chi) - chi * phi(chi));
    (eps * (1.0 + chi * chi) + (1.0 - eps) * z) / delta
}

/// Largest rho with stable exact recovery in the noiseless SE at fixed chi.
pub fn rho_star(delta: f64, chi: f64) -> f64 {
    let z = 2.0 * ((1.0 + chi * chi) * q(chi) - chi * phi(chi));
    if z >= delta {
        return 0.0;
    }
    let eps = (delta - z) / (1.0 + chi * chi - z);
    (eps / delta).clamp(0.0, 1.0)
}

/// chi maximizing the noiseless recovery boundary rho_star(delta, .): coarse
/// grid then golden-section refinement.
pub fn maximin_chi(delta: f64) -> f64 {
    let grid = log_grid(1e-2, 10.0, 400);
    let mut best = grid[0];
    let mut best_rho = rho_star(delta, best);
    for &chi in &grid[1..] {
        let r = rho_star(delta, chi);
        if r > best_rho {
            best_rho = r;
            best = chi;
        }
    }
    // golden-section refine between the grid neighbours of the argmax
    let idx = grid.iter().position(|&c| c == best).unwrap();
    let mut a = grid[idx.saturating_sub(1)];
    let mut b = grid[(idx + 1).min(grid.len() - 1)];
    let inv_phi = 0.6180339887498949;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    for _ in 0..80 {
        if rho_star(delta, c) > rho_star(delta, d) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    0.5 * (a + b)
}

/// All fixed points of the noiseless recursion Psi(s) - s on a log grid of
/// sigma^2 values (the sigma_w = 0 case where uniqueness can fail). The zero
/// fixed point always exists and is listed iff its slope is < 1 (stable).
pub fn noiseless_fixed_points(config: &SeConfig, chi: f64) -> Result<Vec<f64>> {
    if config.sigma_w != 0.0 {
        return Err(Error::invalid("noiseless_fixed_points needs sigma_w = 0"));
    }
    let psi_minus = |s2: f64| -> f64 {
        let sigma = s2.sqrt();
        scalar_risk(&config.prior, sigma, chi * sigma) / config.delta - s2
    };
    let s_ref = config.initial_sigma2().max(1e-8);
    let grid = log_grid(1e-16 * s_ref, 1e4 * s_ref, 800);
    let mut roots = Vec::new();
    let eps = config.prior.atoms().iter().map(|&(_, p)| p).sum::<f64>();
    if noiseless_slope(chi, eps, config.delta) < 1.0 {
        roots.push(0.0);
    }
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (psi_minus(a), psi_minus(b));
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if psi_minus(lo) * psi_minus(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn base_config(sigma_w: f64, chi: f64) -> SeConfig {
        SeConfig {
            prior: SignalPrior::sparse_ones(0.25, 0.85).unwrap(),
            delta: 0.85,
            sigma_w,
            policy: ThresholdPolicy::FixedChi(chi),
        }
    }

    #[test]
    fn se_step_identity_denoiser() {
        // tau = 0: risk = sigma^2, so next sigma^2 = sigma_w^2 + sigma^2/delta
        let cfg = base_config(0.2, 0.0);
        let s = 0.7;
        let next = se_step(s, 0.0, &cfg);
        assert_abs_diff_eq!(next * next, 0.04 + s * s / 0.85, epsilon = 1e-12);
    }

    #[test]
    fn se_step_zero_prior_heavy_threshold() {
        let cfg = SeConfig {
            prior: SignalPrior::zero(),
            delta: 0.85,
            sigma_w: 0.0,
            policy: ThresholdPolicy::FixedChi(8.0),
        };
        let next = se_step(1.0, 8.0, &cfg);
        assert!(next < 1e-6);
    }

    #[test]
    fn fixed_point_zero_prior_large_chi() {
        let cfg = SeConfig {
            prior: SignalPrior::zero(),
            delta: 0.85,
            sigma_w: 0.3,
            policy: ThresholdPolicy::FixedChi(6.0),
        };
        let cal = se_fixed_point(&cfg).unwrap();
        assert_abs_diff_eq!(cal.sigma_hat, 0.3, epsilon = 1e-4);
        assert!(cal.mse < 1e-6);
    }

    #[test]
    fn chi_zero_diverges_for_delta_below_one() {
        let cfg = base_config(0.2, 0.0);
        match se_fixed_point(&cfg) {
            Err(Error::Divergence { .. }) => {}
            other => panic!("expected divergence report, got {other:?}"),
        }
    }

    #[test]
    fn fixed_point_unique_under_noise() {
        let cfg = base_config(0.2, 1.5);
        let s_ref = cfg.initial_sigma2();
        let a = se_fixed_point_from(&cfg, 1.5, s_ref).unwrap();
        let b = se_fixed_point_from(&cfg, 1.5, 100.0 * s_ref).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }

    #[test]
    fn psi_midpoint_concavity() {
        let cfg = base_config(0.2, 1.5);
        let psi = |s2: f64| {
            let s = s2.sqrt();
            cfg.sigma_w * cfg.sigma_w + scalar_risk(&cfg.prior, s, 1.5 * s) / cfg.delta
        };
        let grid: Vec<f64> = (1..=60).map(|i| 0.02 * i as f64).collect();
        for w in grid.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            assert!(psi(mid) >= 0.5 * (psi(w[0]) + psi(w[1])) - 1e-10);
        }
    }

    #[test]
    fn calibration_identity_holds() {
        let cfg = base_config(0.2, 1.8);
        let cal = se_fixed_point(&cfg).unwrap();
        let rhs = cal.chi * cal.sigma_hat * (1.0 - cal.active_fraction / cfg.delta);
        assert_abs_diff_eq!(cal.lambda, rhs, epsilon = 1e-12);
        assert!(cal.active_fraction <= 1.0 && cal.active_fraction >= 0.0);
    }

    #[test]
    fn lambda_path_monotone_and_invertible() {
        let cfg = base_config(0.2, 1.0);
        let grid = log_grid(0.05, 6.0, 120);
        let path = lambda_path(&cfg, &grid).unwrap();
        assert!(path.points.len() > 50);
        for w in path.points.windows(2) {
            assert!(w[1].lambda > w[0].lambda, "lambda not increasing");
            assert!(w[1].active_fraction < w[0].active_fraction);
        }
        for p in &path.points {
            assert!(p.active_fraction <= cfg.delta + 1e-12);
        }
        // round trip: lambda back to chi by monotone inversion on the grid
        for probe in [10, 40, 80] {
            let target = path.points[probe].lambda;
            let found = path
                .points
                .iter()
                .min_by(|a, b| {
                    (a.lambda - target)
                        .abs()
                        .partial_cmp(&(b.lambda - target).abs())
                        .unwrap()
                })
                .unwrap();
            assert_abs_diff_eq!(found.chi, path.points[probe].chi, epsilon = 1e-12);
        }
    }

    #[test]
    fn small_chi_excluded_as_nonpositive_lambda() {
        let cfg = base_config(0.2, 1.0);
        let grid = log_grid(0.01, 6.0, 60);
        let path = lambda_path(&cfg, &grid).unwrap();
        assert!(!path.excluded_chis.is_empty());
        assert!(path.excluded_chis.iter().all(|&c| c < path.points[0].chi));
    }

    #[test]
    fn greedy_trace_monotone_noiseless() {
        let cfg = base_config(0.0, 0.0);
        let trace = greedy_optimal_taus(&cfg, 60).unwrap();
        for w in trace.sigmas.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        assert!(trace.fixed_point_sigma < 1e-4);
    }

    #[test]
    fn greedy_beats_fixed_chi() {
        let cfg = base_config(0.2, 0.0);
        let greedy = greedy_optimal_taus(&cfg, 25).unwrap();
        for chi in [0.8, 1.5, 2.5] {
            let fixed = se_trace(
                &SeConfig {
                    policy: ThresholdPolicy::FixedChi(chi),
                    ..cfg.clone()
                },
                25,
                None,
            )
            .unwrap();
            for t in 0..=25 {
                assert!(greedy.sigmas[t] <= fixed.sigmas[t] + 1e-12);
            }
        }
    }

    #[test]
    fn optimal_tau_is_stationary() {
        let prior = SignalPrior::sparse_ones(0.25, 0.85).unwrap();
        for &sigma in &[0.2, 0.5, 1.0] {
            let tau = optimal_tau(&prior, sigma);
            assert!(scalar_risk_deriv(&prior, sigma, tau).abs() < 1e-9);
        }
        let zero = SignalPrior::zero();
        assert_abs_diff_eq!(optimal_tau(&zero, 0.5), GAMMA_CAP * 0.5, epsilon = 1e-12);
    }

    #[test]
    fn maximin_chi_finite_positive_and_dominant() {
        let chi_star = maximin_chi(0.85);
        assert!(chi_star.is_finite() && chi_star > 0.0);
        let r_star = rho_star(0.85, chi_star);
        for i in 1..=20 {
            let chi = 0.2 * i as f64;
            assert!(rho_star(0.85, chi) <= r_star + 1e-9);
        }
    }

    #[test]
    fn noiseless_slope_matches_se_runs() {
        // cross-check the slope criterion against actual noiseless SE traces
        let delta = 0.85;
        let chi = maximin_chi(delta);
        let r = rho_star(delta, chi);
        let run = |rho: f64| -> f64 {
            let cfg = SeConfig {
                prior: SignalPrior::sparse_ones(rho, delta).unwrap(),
                delta,
                sigma_w: 0.0,
                policy: ThresholdPolicy::FixedChi(chi),
            };
            se_trace(&cfg, 3000, None).unwrap().fixed_point_sigma
        };
        assert!(run(0.9 * r) < 1e-6, "below the boundary must recover");
        assert!(run(1.1 * r) > 1e-3, "above the boundary must stall");
    }

    #[test]
    fn noiseless_fixed_points_bracket_phase_transition() {
        let delta = 0.85;
        let chi = maximin_chi(delta);
        let r = rho_star(delta, chi);
        let cfg = |rho: f64| SeConfig {
            prior: SignalPrior::sparse_ones(rho, delta).unwrap(),
            delta,
            sigma_w: 0.0,
            policy: ThresholdPolicy::FixedChi(chi),
        };
        let below = noiseless_fixed_points(&cfg(0.9 * r), chi).unwrap();
        assert_eq!(below, vec![0.0]);
        let above = noiseless_fixed_points(&cfg(1.1 * r), chi).unwrap();
        assert!(above.iter().any(|&s| s > 0.0));
    }

    #[test]
    fn explicit_sequence_policy_runs() {
        let cfg = SeConfig {
            policy: ThresholdPolicy::ExplicitSequence(vec![0.5, 0.4, 0.3]),
            ..base_config(0.2, 0.0)
        };
        let trace = se_trace(&cfg, 6, None).unwrap();
        assert_eq!(trace.taus[..3], [0.5, 0.4, 0.3]);
        assert_eq!(trace.taus[3..], [0.3, 0.3, 0.3]);
        assert!(trace.sigmas.iter().all(|&s| s >= cfg.sigma_w));
    }

    #[test]
    fn csv_export_shape() {
        let cfg = base_config(0.2, 1.0);
        let path = lambda_path(&cfg, &log_grid(0.5, 3.0, 5)).unwrap();
        let mut buf = Vec::new();
        write_lambda_path_csv(&path, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("chi,lambda,sigma_hat,mse,active_fraction"));
        assert_eq!(text.trim().lines().count(), path.points.len() + 1);
    }
}

//! LASSO reference solver: cyclic coordinate descent with residual
//! maintenance and KKT certification, plus a deliberately simple
//! proximal-gradient implementation used as a solver-agnostic cross-check.

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem_gen::ProblemInstance;
use crate::shrinkage::soft_threshold;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const KKT_TOL: f64 = 1e-6;
const MAX_SWEEPS: usize = 100_000;
/// Residual drift control: recompute r = y - X beta from scratch this often.
const REFRESH_EVERY: usize = 1000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LassoSolution {
    pub beta_hat: Array1<f64>,
    pub lambda: f64,
    /// Max KKT violation: |X_j^T r| - lambda on the inactive set,
    /// |X_j^T r - lambda sign(beta_j)| on the active set.
    pub kkt_gap: f64,
    /// Coordinate-descent sweeps spent.
    pub iterations: usize,
    /// Objective value 0.5||y - X beta||^2 + lambda ||beta||_1 per sweep.
    pub objectives: Vec<f64>,
}

impl LassoSolution {
    pub fn l0_fraction(&self) -> f64 {
        self.beta_hat.iter().filter(|&&b| b != 0.0).count() as f64 / self.beta_hat.len() as f64
    }

    pub fn mse(&self, instance: &ProblemInstance) -> f64 {
        let d = &self.beta_hat - &instance.beta_o;
        d.dot(&d) / instance.p() as f64
    }
}

fn kkt_gap(instance: &ProblemInstance, beta: &Array1<f64>, r: &Array1<f64>, lambda: f64) -> f64 {
    let corr = instance.x.t().dot(r);
    let mut gap: f64 = 0.0;
    for j in 0..beta.len() {
        let v = if beta[j] != 0.0 {
            (corr[j] - lambda * beta[j].signum()).abs()
        } else {
            (corr[j].abs() - lambda).max(0.0)
        };
        gap = gap.max(v);
    }
    gap
}

pub fn solve_lasso(
    instance: &ProblemInstance,
    lambda: f64,
    tol: f64,
    warm_start: Option<&Array1<f64>>,
) -> Result<LassoSolution> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda must be positive"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let p = instance.p();
    let col_sq: Vec<f64> = (0..p)
        .map(|j| {
            let c = instance.x.column(j);
            c.dot(&c)
        })
        .collect();
    let mut beta = match warm_start {
        Some(b) if b.len() == p => b.clone(),
        Some(_) => return Err(Error::invalid("warm start has wrong length")),
        None => Array1::zeros(p),
    };
    let mut r = &instance.y - &instance.x.dot(&beta);
    let mut l1 = beta.iter().map(|b| b.abs()).sum::<f64>();
    let mut objectives = Vec::new();

    for sweep in 1..=MAX_SWEEPS {
        let mut max_update: f64 = 0.0;
        let mut max_abs: f64 = 0.0;
        for j in 0..p {
            if col_sq[j] == 0.0 {
                continue;
            }
            let old = beta[j];
            let z = instance.x.column(j).dot(&r) + col_sq[j] * old;
            let new = soft_threshold(z, lambda) / col_sq[j];
            let diff = new - old;
            if diff != 0.0 {
                r.scaled_add(-diff, &instance.x.column(j));
                beta[j] = new;
                l1 += new.abs() - old.abs();
            }
            max_update = max_update.max(diff.abs());
            max_abs = max_abs.max(new.abs());
        }
        if sweep % REFRESH_EVERY == 0 {
            r = &instance.y - &instance.x.dot(&beta);
        }
        objectives.push(0.5 * r.dot(&r) + lambda * l1);
        if max_update < tol * (1.0 + max_abs) {
            let gap = kkt_gap(instance, &beta, &r, lambda);
            let iterations = sweep;
            let solution = LassoSolution {
                beta_hat: beta.clone(),
                lambda,
                kkt_gap: gap,
                iterations,
                objectives: objectives.clone(),
            };
            if gap <= KKT_TOL {
                return Ok(solution);
            }
            // converged updates but uncertified KKT: keep sweeping unless capped
            if sweep == MAX_SWEEPS {
                return Err(Error::LassoMaxIterations {
                    kkt_gap: gap,
                    solution: Box::new(solution),
                });
            }
        }
    }
    let gap = kkt_gap(instance, &beta, &r, lambda);
    Err(Error::LassoMaxIterations {
        kkt_gap: gap,
        solution: Box::new(LassoSolution {
            beta_hat: beta,
            lambda,
            kkt_gap: gap,
            iterations: MAX_SWEEPS,
            objectives,
        }),
    })
}

/// Warm-started solve along a decreasing lambda grid.
pub fn lasso_path(instance: &ProblemInstance, lambda_grid: &[f64]) -> Result<Vec<LassoSolution>> {
    if lambda_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("lambda grid must be strictly decreasing"));
    }
    let mut out: Vec<LassoSolution> = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let warm = out.last().map(|s| &s.beta_hat);
        out.push(solve_lasso(instance, lambda, DEFAULT_TOL, warm)?);
    }
    Ok(out)
}

pub fn write_lasso_path_csv<W: std::io::Write>(
    instance: &ProblemInstance,
    solutions: &[LassoSolution],
    out: W,
) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["lambda", "l0_fraction", "mse", "kkt_gap", "iterations"])?;
    for s in solutions {
        wtr.write_record([
            s.lambda.to_string(),
            s.l0_fraction().to_string(),
            s.mse(instance).to_string(),
            s.kkt_gap.to_string(),
            s.iterations.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

fn spectral_norm_sq(instance: &ProblemInstance) -> f64 {
    // power iteration on X^T X
    let p = instance.p();
    let mut v = Array1::from_elem(p, 1.0 / (p as f64).sqrt());
    let mut lam = 0.0;
    for _ in 0..200 {
        let u = instance.x.dot(&v);
        let w = instance.x.t().dot(&u);
        lam = w.dot(&v);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
    }
    lam
}

/// Proximal-gradient (FISTA) reference solver. Slow and simple on purpose:
/// it shares no code path with coordinate descent, so agreement between the
/// two certifies both.
pub fn solve_lasso_prox_reference(
    instance: &ProblemInstance,
    lambda: f64,
    max_iters: usize,
) -> Array1<f64> {
    let l = spectral_norm_sq(instance).max(1e-12);
    let step = 1.0 / l;
    let p = instance.p();
    let mut beta: Array1<f64> = Array1::zeros(p);
    let mut momentum = beta.clone();
    let mut t_k = 1.0f64;
    for _ in 0..max_iters {
        let grad = instance.x.t().dot(&(instance.x.dot(&momentum) - &instance.y));
        let next = (&momentum - &(step * &grad)).mapv(|v| soft_threshold(v, lambda * step));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt());
        let accel = &next + &((next.clone() - &beta) * ((t_k - 1.0) / t_next));
        let delta = next
            .iter()
            .zip(beta.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        beta = next;
        momentum = accel;
        t_k = t_next;
        if delta < 1e-12 {
            break;
        }
    }
    beta
}

fn max_abs(v: ArrayView1<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

/// Smallest lambda that zeroes the solution: ||X^T y||_inf.
pub fn lambda_max(instance: &ProblemInstance) -> f64 {
    max_abs(instance.x.t().dot(&instance.y).view())
}

//! Seeded, reproducible generation of sparse-regression problem instances
//! y = X beta_o + w with X ~ N(0, 1/n) entries.
//!
//! RNG scheme: one 64-bit root seed keys a ChaCha8 generator; independent
//! substreams (ChaCha's 64-bit stream counter) separate the support draw, the
//! nonzero values, the noise, and each matrix column. Column j always comes
//! from stream `COL_STREAM_BASE + j`, which lets large instances be replayed
//! column-by-column without materializing X (see `streamed_first_pseudo`).

use ndarray::{Array1, Array2};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::SignalPrior;

const SUPPORT_STREAM: u64 = 0;
const VALUE_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
const COL_STREAM_BASE: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    /// Ambient dimension p.
    pub p: usize,
    /// Undersampling ratio delta = n/p in (0, 1].
    pub delta: f64,
    /// Sparsity ratio rho = k/n in (0, 1].
    pub rho: f64,
    pub prior: SignalPrior,
    /// Measurement-noise standard deviation.
    pub sigma_w: f64,
    pub seed: u64,
}

impl GenConfig {
    pub fn n(&self) -> usize {
        (self.delta * self.p as f64).floor() as usize
    }

    pub fn k(&self) -> usize {
        (self.rho * self.n() as f64).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::invalid("p must be positive"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::invalid("delta must lie in (0, 1]"));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::invalid("rho must lie in (0, 1]"));
        }
        if self.n() < 1 {
            return Err(Error::invalid("floor(delta * p) must be >= 1"));
        }
        if self.k() > self.p {
            return Err(Error::invalid("k = floor(rho * n) exceeds p"));
        }
        if !(self.sigma_w >= 0.0) {
            return Err(Error::invalid("sigma_w must be >= 0"));
        }
        if self.rho > 0.0 && self.prior.nonzero_conditional().is_empty() {
            return Err(Error::invalid("rho > 0 needs a prior with nonzero atoms"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub config: GenConfig,
    pub beta_o: Array1<f64>,
    pub x: Array2<f64>,
    pub w: Array1<f64>,
    pub y: Array1<f64>,
}

impl ProblemInstance {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.beta_o.len()
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

fn normal_vec(rng: &mut ChaCha8Rng, len: usize, std: f64) -> Array1<f64> {
    Array1::from_iter((0..len).map(|_| std * rng.sample::<f64, _>(StandardNormal)))
}

/// Sparse signal: k nonzeros placed uniformly at random, values iid from the
/// prior conditioned on nonzero. Deterministic given config.seed.
fn generate_signal(config: &GenConfig) -> Result<Array1<f64>> {
    let (p, k) = (config.p, config.k());
    let mut beta = Array1::zeros(p);
    if k == 0 {
        return Ok(beta);
    }
    let cond = config.prior.nonzero_conditional();
    if cond.is_empty() {
        return Err(Error::invalid("prior has no nonzero atoms"));
    }
    let mut support_rng = stream_rng(config.seed, SUPPORT_STREAM);
    let support = rand::seq::index::sample(&mut support_rng, p, k);
    let mut value_rng = stream_rng(config.seed, VALUE_STREAM);
    for idx in support {
        let u: f64 = value_rng.random();
        let mut acc = 0.0;
        let mut v = cond[cond.len() - 1].0;
        for &(value, prob) in &cond {
            acc += prob;
            if u < acc {
                v = value;
                break;
            }
        }
        beta[idx] = v;
    }
    Ok(beta)
}

fn noise(config: &GenConfig) -> Array1<f64> {
    let n = config.n();
    if config.sigma_w == 0.0 {
        Array1::zeros(n)
    } else {
        normal_vec(&mut stream_rng(config.seed, NOISE_STREAM), n, config.sigma_w)
    }
}

/// One column of X (length n, entries N(0, 1/n)), replayable independently of
/// the rest of the matrix.
pub fn matrix_column(config: &GenConfig, j: usize) -> Array1<f64> {
    let n = config.n();
    let std = 1.0 / (n as f64).sqrt();
    normal_vec(
        &mut stream_rng(config.seed, COL_STREAM_BASE + j as u64),
        n,
        std,
    )
}

pub fn generate(config: &GenConfig) -> Result<ProblemInstance> {
    config.validate()?;
    let (n, p) = (config.n(), config.p);
    let beta_o = generate_signal(config)?;
    let mut x = Array2::zeros((n, p));
    for j in 0..p {
        x.column_mut(j).assign(&matrix_column(config, j));
    }
    let w = noise(config);
    let y = x.dot(&beta_o) + &w;
    Ok(ProblemInstance {
        config: config.clone(),
        beta_o,
        x,
        w,
        y,
    })
}

pub fn column_norms(instance: &ProblemInstance) -> Array1<f64> {
    Array1::from_iter(
        instance
            .x
            .columns()
            .into_iter()
            .map(|c| c.dot(&c).sqrt()),
    )
}

/// First-iteration AMP quantities without materializing X, for instances too
/// large to hold in memory. Replays y = X beta_o + w from the k support
/// columns, then computes the pseudo-data X^T y column by column.
///
/// Returns (pseudo_data = X^T y, sigma_hat = ||y||/sqrt(n), beta_o).
pub fn streamed_first_pseudo(config: &GenConfig) -> Result<(Array1<f64>, f64, Array1<f64>)> {
    config.validate()?;
    let (n, p) = (config.n(), config.p);
    let beta_o = generate_signal(config)?;
    let mut y = noise(config);
    for (j, &b) in beta_o.iter().enumerate() {
        if b != 0.0 {
            y.scaled_add(b, &matrix_column(config, j));
        }
    }
    let sigma_hat = (y.dot(&y) / n as f64).sqrt();
    let pseudo = Array1::from_iter((0..p).map(|j| matrix_column(config, j).dot(&y)));
    Ok((pseudo, sigma_hat, beta_o))
}

//! Discrete signal priors: a point mass at zero plus finitely many nonzero atoms.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Distribution of a signal coordinate B: implicit mass at zero plus the listed
/// (value, probability) atoms. Probabilities must be nonnegative and sum to at
/// most one; atom values must be nonzero so that the sparsity of a generated
/// signal is exactly the number of atom draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalPrior {
    atoms: Vec<(f64, f64)>,
}

impl SignalPrior {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let mut total = 0.0;
        for &(v, p) in &atoms {
            if !v.is_finite() || !p.is_finite() {
                return Err(Error::invalid("prior atoms must be finite"));
            }
            if v == 0.0 {
                return Err(Error::invalid(
                    "zero-valued atom: put that mass in the implicit zero component",
                ));
            }
            if p < 0.0 {
                return Err(Error::invalid("atom probabilities must be nonnegative"));
            }
            total += p;
        }
        if total > 1.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "atom probabilities sum to {total} > 1"
            )));
        }
        Ok(SignalPrior { atoms })
    }

    /// Pure point mass at zero (no signal).
    pub fn zero() -> Self {
        SignalPrior { atoms: Vec::new() }
    }

    /// P(B = value) = prob, rest of the mass at zero.
    pub fn point_mass(value: f64, prob: f64) -> Result<Self> {
        SignalPrior::new(vec![(value, prob)])
    }

    /// The sparse point-mass prior used in the experiments: P(B = 1) = rho * delta,
    /// so that a length-p draw has about k = rho * n nonzeros.
    pub fn sparse_ones(rho: f64, delta: f64) -> Result<Self> {
        SignalPrior::point_mass(1.0, rho * delta)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Mass at zero: 1 - sum of atom probabilities (clamped against roundoff).
    pub fn zero_mass(&self) -> f64 {
        let s: f64 = self.atoms.iter().map(|&(_, p)| p).sum();
        (1.0 - s).max(0.0)
    }

    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|&(v, p)| v * v * p).sum()
    }

    /// Whether the prior is the pure zero point mass (no nonzero atoms with
    /// positive probability).
    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|&(_, p)| p == 0.0)
    }

    /// Atom values with their probabilities, conditioned on B != 0.
    /// Empty when the prior is all zero mass.
    pub fn nonzero_conditional(&self) -> Vec<(f64, f64)> {
        let s: f64 = self.atoms.iter().map(|&(_, p)| p).sum();
        if s == 0.0 {
            return Vec::new();
        }
        self.atoms.iter().map(|&(v, p)| (v, p / s)).collect()
    }
}

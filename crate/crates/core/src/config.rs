//! Numerical tolerances shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Row sums of a stochastic matrix.
    pub stochastic: f64,
    /// Residual `|P^T pi - pi|_inf` accepted from the Perron solve.
    pub perron_residual: f64,
    /// Detailed-balance check.
    pub reversible: f64,
    /// Off-diagonal Frobenius norm at which Jacobi stops.
    pub jacobi_offdiag: f64,
    pub jacobi_max_sweeps: usize,
    /// Slack granted when comparing a bound to an exact eigenvalue.
    pub soundness: f64,
    /// Largest n for which cut quantities are enumerated.
    pub max_enumeration: usize,
    /// Seminorm below which a simulation is considered converged.
    pub converged: f64,
    pub max_steps: usize,
    /// Per-step slack in the variance contraction check.
    pub contraction_slack: f64,
    /// Ratios `V(t)/V(t-1)` are only checked while `V(t-1) / V(0)` exceeds this.
    pub contraction_floor: f64,
    /// Fraction of trailing steps fitted by the empirical rate estimator.
    pub rate_window: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            stochastic: 1e-12,
            perron_residual: 1e-12,
            reversible: 1e-10,
            jacobi_offdiag: 1e-12,
            jacobi_max_sweeps: 100,
            soundness: 1e-9,
            max_enumeration: 22,
            converged: 1e-13,
            max_steps: 1_000_000,
            contraction_slack: 1e-12,
            contraction_floor: 1e-20,
            rate_window: 0.5,
        }
    }
}

impl Tolerances {
    /// Applies a `key=value` override.
    pub fn set(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("expected key=value, got `{spec}`")))?;
        let key = key.trim();
        let value = value.trim();
        let float = || {
            value
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("`{value}` is not a number")))
        };
        let int = || {
            value
                .parse::<usize>()
                .map_err(|_| Error::Parameter(format!("`{value}` is not an integer")))
        };
        match key {
            "stochastic" => self.stochastic = float()?,
            "perron_residual" => self.perron_residual = float()?,
            "reversible" => self.reversible = float()?,
            "jacobi_offdiag" => self.jacobi_offdiag = float()?,
            "jacobi_max_sweeps" => self.jacobi_max_sweeps = int()?,
            "soundness" => self.soundness = float()?,
            "max_enumeration" => self.max_enumeration = int()?,
            "converged" => self.converged = float()?,
            "max_steps" => self.max_steps = int()?,
            "contraction_slack" => self.contraction_slack = float()?,
            "contraction_floor" => self.contraction_floor = float()?,
            "rate_window" => self.rate_window = float()?,
            _ => return Err(Error::Parameter(format!("unknown tolerance `{key}`"))),
        }
        Ok(())
    }
}

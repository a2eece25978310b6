//! Scalar conjugate toy model: a 1-D Gaussian mixture over the task mean with
//! direct token observations.
//!
//! Posterior after observing `x_1..x_k`:
//!
//! ```text
//! π̃_m ∝ π_m exp(−k(μ_m − x̄)²/(2(τ² + kσ²)))
//! μ̃_m = (τ²μ_m + σ²Σx_i)/(τ² + kσ²)      σ̃² = τ²σ²/(τ² + kσ²)
//! ```
//!
//! The re-weighting exponent is negative (closer centers gain weight).

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::posterior::normalize_log_weights;
use crate::Result;

/// 1-D mixture prior with task noise `sigma` and token noise `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyPrior1D {
    /// `(π_m, μ_m)` pairs.
    pub components: Vec<(f64, f64)>,
    pub sigma: f64,
    pub tau: f64,
}

/// Closed-form toy posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyPosterior {
    pub weights: Vec<f64>,
    pub mu_tilde: Vec<f64>,
    pub var: f64,
}

impl ToyPosterior {
    /// Posterior-predictive mean of the next token, `Σ π̃_m μ̃_m`.
    pub fn predictive_mean(&self) -> f64 {
        self.weights.iter().zip(&self.mu_tilde).map(|(p, m)| p * m).sum()
    }
}

/// Exact posterior of the toy model given observed tokens.
pub fn toy_posterior(prior: &ToyPrior1D, samples: &[f64]) -> Result<ToyPosterior> {
    if prior.sigma <= 0.0 || prior.tau <= 0.0 {
        return Err(Error::InvalidModel("toy prior needs sigma > 0 and tau > 0".into()));
    }
    let weight_sum: f64 = prior.components.iter().map(|(p, _)| p).sum();
    if (weight_sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidModel(format!("toy weights sum to {weight_sum}")));
    }
    let k = samples.len() as f64;
    let sum: f64 = samples.iter().sum();
    let tau2 = prior.tau * prior.tau;
    let sigma2 = prior.sigma * prior.sigma;
    let denom = tau2 + k * sigma2;
    let x_bar = if samples.is_empty() { 0.0 } else { sum / k };
    let log_weights: Vec<f64> = prior
        .components
        .iter()
        .map(|&(p, mu)| p.ln() - k * (mu - x_bar) * (mu - x_bar) / (2.0 * denom))
        .collect();
    Ok(ToyPosterior {
        weights: normalize_log_weights(&log_weights),
        mu_tilde: prior
            .components
            .iter()
            .map(|&(_, mu)| (tau2 * mu + sigma2 * sum) / denom)
            .collect(),
        var: tau2 * sigma2 / denom,
    })
}

//! Deterministic 1-D grid oracle.
//!
//! For `d = 1` the unnormalized posterior factorizes per component into a
//! μ-axis term (prior × input likelihood, query included) and a w-axis term
//! (prior × label likelihood), so a product trapezoid rule over the two axes
//! reduces to two 1-D trapezoid sums per component.

use nalgebra::DVector;

use crate::error::Error;
use crate::model::{PriorModel, Sequence};
use crate::posterior::normalize_log_weights;
use crate::Result;

use super::OracleEstimate;

/// Grid resolution: at least 2000 points per axis, spanning at least 8
/// standard deviations of both the prior and the implied posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points_per_axis: usize,
    pub span_sds: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points_per_axis: 4000, span_sds: 10.0 }
    }
}

struct AxisIntegral {
    log_mass: f64,
    mean: f64,
}

/// Trapezoid integration of `exp(log_density)` over `[lo, hi]`; returns the
/// log of the mass and the first moment.
fn integrate_axis<F: Fn(f64) -> f64>(
    lo: f64,
    hi: f64,
    points: usize,
    posterior_sd: f64,
    log_density: F,
) -> Result<AxisIntegral> {
    let step = (hi - lo) / (points - 1) as f64;
    if step > posterior_sd / 4.0 {
        return Err(Error::GridTooCoarse { spacing: step, required: posterior_sd / 4.0 });
    }
    let logs: Vec<f64> = (0..points).map(|j| log_density(lo + step * j as f64)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut mass = 0.0;
    let mut moment = 0.0;
    for (j, &l) in logs.iter().enumerate() {
        let weight = if j == 0 || j == points - 1 { 0.5 } else { 1.0 };
        let v = weight * (l - max).exp();
        mass += v;
        moment += v * (lo + step * j as f64);
    }
    Ok(AxisIntegral { log_mass: max + (mass * step).ln(), mean: moment / mass })
}

/// Grid-integration posterior for 1-D models: mixture weights and the
/// posterior mean of `w`. Deterministic; stderrs are zero.
pub fn grid_posterior_1d(
    model: &PriorModel,
    prompt: &Sequence,
    query: &DVector<f64>,
    grid: &GridSpec,
) -> Result<OracleEstimate> {
    if model.dim != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: model.dim });
    }
    if grid.points_per_axis < 2000 {
        return Err(Error::InvalidModel(format!(
            "grid oracle needs >= 2000 points per axis, got {}",
            grid.points_per_axis
        )));
    }
    if grid.span_sds < 8.0 {
        return Err(Error::InvalidModel(format!(
            "grid oracle needs a span of >= 8 standard deviations, got {}",
            grid.span_sds
        )));
    }
    let k = prompt.len() as f64;
    let sx2 = model.sigma_x * model.sigma_x;
    let sy2 = model.sigma_y * model.sigma_y;
    let smu2 = model.sigma_mu * model.sigma_mu;
    let sw2 = model.sigma_w * model.sigma_w;
    let sum_x: f64 = prompt.xs.iter().map(|x| x[0]).sum::<f64>() + query[0];
    let sum_x2: f64 = prompt.xs.iter().map(|x| x[0] * x[0]).sum();
    let sum_xy: f64 = prompt.xs.iter().zip(&prompt.ys).map(|(x, y)| x[0] * y).sum();

    let mut log_masses = Vec::with_capacity(model.n_components());
    let mut w_means = Vec::with_capacity(model.n_components());
    for c in &model.components {
        let mu_m = c.mu[0];
        let w_m = c.w[0];

        // mu axis: Gaussian prior times the (k+1)-sample input likelihood.
        let mu_precision = 1.0 / smu2 + (k + 1.0) / sx2;
        let mu_post_sd = mu_precision.sqrt().recip();
        let mu_post_mean = (mu_m / smu2 + sum_x / sx2) / mu_precision;
        let lo = (mu_m - grid.span_sds * model.sigma_mu).min(mu_post_mean - grid.span_sds * mu_post_sd);
        let hi = (mu_m + grid.span_sds * model.sigma_mu).max(mu_post_mean + grid.span_sds * mu_post_sd);
        let mu_axis = integrate_axis(lo, hi, grid.points_per_axis, mu_post_sd, |mu| {
            let prior = -(mu - mu_m) * (mu - mu_m) / (2.0 * smu2);
            let mut like = -(query[0] - mu) * (query[0] - mu) / (2.0 * sx2);
            for x in &prompt.xs {
                like -= (x[0] - mu) * (x[0] - mu) / (2.0 * sx2);
            }
            prior + like
        })?;

        // w axis: Gaussian prior times the k-sample label likelihood.
        let w_precision = 1.0 / sw2 + sum_x2 / sy2;
        let w_post_sd = w_precision.sqrt().recip();
        let w_post_mean = (w_m / sw2 + sum_xy / sy2) / w_precision;
        let lo = (w_m - grid.span_sds * model.sigma_w).min(w_post_mean - grid.span_sds * w_post_sd);
        let hi = (w_m + grid.span_sds * model.sigma_w).max(w_post_mean + grid.span_sds * w_post_sd);
        let w_axis = integrate_axis(lo, hi, grid.points_per_axis, w_post_sd, |w| {
            let prior = -(w - w_m) * (w - w_m) / (2.0 * sw2);
            let mut like = 0.0;
            for (x, y) in prompt.xs.iter().zip(&prompt.ys) {
                let r = y - w * x[0];
                like -= r * r / (2.0 * sy2);
            }
            prior + like
        })?;

        log_masses.push(c.weight.ln() + mu_axis.log_mass + w_axis.log_mass);
        w_means.push(w_axis.mean);
    }
    let weights = normalize_log_weights(&log_masses);
    let w_mean: f64 = weights.iter().zip(&w_means).map(|(p, m)| p * m).sum();
    let m_count = model.n_components();
    Ok(OracleEstimate {
        weights,
        weight_stderr: vec![0.0; m_count],
        w_mean: DVector::from_element(1, w_mean),
        w_mean_stderr: DVector::from_element(1, 0.0),
        ess: None,
        degenerate: false,
    })
}

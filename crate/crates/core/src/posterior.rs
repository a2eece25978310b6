//! Closed-form task posterior and the optimal predictor.
//!
//! Given a prompt `S_k` and query `x_{k+1}`, the posterior over tasks stays a
//! Gaussian mixture. With `s = Σ_{i=1}^{k+1} x_i` (query included),
//! `G = Σ_{i=1}^k x_i x_iᵀ`, `t = Σ_{i=1}^k x_i y_i`, and `B = I + δ_w G`:
//!
//! ```text
//! log π̃_m = log π_m − (‖μ_m‖² − ‖μ_m + δ_μ s‖²/(1+(k+1)δ_μ)) / (2σ_μ²)
//!                    − (‖w_m‖² − (w_m + δ_w t)ᵀ B⁻¹ (w_m + δ_w t)) / (2σ_w²) + const
//! μ̃_m = (μ_m + δ_μ s) / (1 + (k+1)δ_μ)        σ̃_μ² = σ_μ² / (1 + (k+1)δ_μ)
//! w̃_m = B⁻¹ (w_m + δ_w t)                      Σ̃_w  = σ_w² B⁻¹
//! ```
//!
//! The query participates only in the μ-evidence; the labeled pairs alone
//! drive the w-evidence. Mixture weights are kept in log space and normalized
//! with log-sum-exp (the exponents grow linearly in `k`). `B` is `I` plus a
//! PSD matrix, so its Cholesky factorization always exists and no explicit
//! inverse is formed on the solve paths. A vanishing noise ratio (`δ_μ = 0`
//! or `δ_w = 0`) switches the corresponding evidence factor off: that factor
//! keeps the prior weights and the identity shift.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{InContextSource, PriorModel, Sequence};
use crate::Result;

/// Observation summary consumed by the posterior.
///
/// `sum_x` runs over the `k` prompt inputs plus the query; `gram` and
/// `sum_xy` run over the prompt only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub k: usize,
    pub sum_x: DVector<f64>,
    pub gram: DMatrix<f64>,
    pub sum_xy: DVector<f64>,
}

/// Shifted, re-weighted posterior mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMixture {
    /// Normalized mixture weights `π̃_m`.
    pub weights: Vec<f64>,
    /// Unnormalized log weights (up to a shared constant).
    pub log_weights: Vec<f64>,
    /// Shifted input centers `μ̃_m`.
    pub mu_tilde: Vec<DVector<f64>>,
    /// Shifted function centers `w̃_m`.
    pub w_tilde: Vec<DVector<f64>>,
    /// Posterior variance of each μ coordinate, `σ_μ²/(1+(k+1)δ_μ)`.
    pub mu_posterior_var: f64,
    /// Posterior covariance of `w`, `σ_w² (I + δ_w G)⁻¹`.
    pub w_posterior_cov: DMatrix<f64>,
    /// Aggregate posterior mean `w̃ = Σ_m π̃_m w̃_m`.
    pub w_mean: DVector<f64>,
}

/// Posterior-to-prior weight ratio of a component pair, `r(α,β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightRatio {
    /// `log r(α,β)`; always finite.
    pub log: f64,
    /// `r(α,β) = exp(log)`; may overflow to infinity.
    pub value: f64,
}

/// Accumulates the sufficient statistics of a prompt/query pair.
///
/// Pairs are folded in a canonical order (sorted by their bit patterns), so
/// any permutation of the prompt produces bit-identical statistics.
pub fn sufficient_stats(prompt: &Sequence, query: &DVector<f64>) -> Result<SufficientStats> {
    let d = query.len();
    for x in &prompt.xs {
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
    }
    let mut order: Vec<usize> = (0..prompt.len()).collect();
    order.sort_by(|&a, &b| {
        let bits = |i: usize| {
            prompt.xs[i]
                .iter()
                .map(|v| v.to_bits())
                .chain(std::iter::once(prompt.ys[i].to_bits()))
        };
        bits(a).cmp(bits(b))
    });

    let mut sum_x = DVector::zeros(d);
    let mut gram = DMatrix::zeros(d, d);
    let mut sum_xy = DVector::zeros(d);
    for &i in &order {
        let x = &prompt.xs[i];
        sum_x += x;
        gram.syger(1.0, x, x, 1.0);
        sum_xy.axpy(prompt.ys[i], x, 1.0);
    }
    // syger fills the lower triangle; mirror it.
    for r in 0..d {
        for c in (r + 1)..d {
            gram[(r, c)] = gram[(c, r)];
        }
    }
    sum_x += query;
    Ok(SufficientStats { k: prompt.len(), sum_x, gram, sum_xy })
}

fn check_model_stats(model: &PriorModel, stats: &SufficientStats) -> Result<()> {
    if stats.sum_x.len() != model.dim {
        return Err(Error::DimensionMismatch { expected: model.dim, got: stats.sum_x.len() });
    }
    Ok(())
}

fn check_pair(model: &PriorModel, alpha: usize, beta: usize) -> Result<()> {
    let count = model.n_components();
    for index in [alpha, beta] {
        if index >= count {
            return Err(Error::ComponentIndex { index, count });
        }
    }
    if alpha == beta {
        return Err(Error::ReflexivePair);
    }
    Ok(())
}

fn w_cholesky(model: &PriorModel, stats: &SufficientStats) -> Result<Cholesky<f64, Dyn>> {
    let d = model.dim;
    let delta_w = model.delta_w();
    let mut b = DMatrix::identity(d, d);
    if delta_w > 0.0 {
        b += delta_w * &stats.gram;
    }
    Cholesky::new(b)
        .ok_or_else(|| Error::Numerical("I + delta_w * gram is not positive definite".into()))
}

/// μ-evidence exponent of component `m` (the `−log c^μ_m` part, without the
/// shared constant). Zero when `δ_μ = 0`.
fn mu_exponent(model: &PriorModel, stats: &SufficientStats, m: usize) -> f64 {
    let delta_mu = model.delta_mu();
    if delta_mu == 0.0 {
        return 0.0;
    }
    let mu_m = &model.components[m].mu;
    let denom = 1.0 + (stats.k as f64 + 1.0) * delta_mu;
    let shifted = mu_m + delta_mu * &stats.sum_x;
    (mu_m.norm_squared() - shifted.norm_squared() / denom) / (2.0 * model.sigma_mu * model.sigma_mu)
}

/// w-evidence exponent of component `m` against a shared factorization of
/// `B = I + δ_w G`. Zero when `δ_w = 0`.
fn w_exponent(
    model: &PriorModel,
    stats: &SufficientStats,
    chol: &Cholesky<f64, Dyn>,
    m: usize,
) -> f64 {
    let delta_w = model.delta_w();
    if delta_w == 0.0 {
        return 0.0;
    }
    let w_m = &model.components[m].w;
    let v = w_m + delta_w * &stats.sum_xy;
    let solved = chol.solve(&v);
    (w_m.norm_squared() - v.dot(&solved)) / (2.0 * model.sigma_w * model.sigma_w)
}

/// Per-component log weights before normalization.
pub fn reweight_log(model: &PriorModel, stats: &SufficientStats) -> Result<Vec<f64>> {
    check_model_stats(model, stats)?;
    let chol = w_cholesky(model, stats)?;
    Ok((0..model.n_components())
        .map(|m| {
            model.components[m].weight.ln()
                - mu_exponent(model, stats, m)
                - w_exponent(model, stats, &chol, m)
        })
        .collect())
}

/// Log-sum-exp normalization of log weights.
pub fn normalize_log_weights(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        let uniform = 1.0 / log_weights.len() as f64;
        return vec![uniform; log_weights.len()];
    }
    let sum: f64 = log_weights.iter().map(|l| (l - max).exp()).sum();
    log_weights.iter().map(|l| (l - max).exp() / sum).collect()
}

/// Shifted component centers `(μ̃_m, w̃_m)` for every component.
pub fn shift_components(
    model: &PriorModel,
    stats: &SufficientStats,
) -> Result<Vec<(DVector<f64>, DVector<f64>)>> {
    check_model_stats(model, stats)?;
    let chol = w_cholesky(model, stats)?;
    Ok((0..model.n_components()).map(|m| shift_one(model, stats, &chol, m)).collect())
}

fn shift_one(
    model: &PriorModel,
    stats: &SufficientStats,
    chol: &Cholesky<f64, Dyn>,
    m: usize,
) -> (DVector<f64>, DVector<f64>) {
    let delta_mu = model.delta_mu();
    let delta_w = model.delta_w();
    let c = &model.components[m];
    let mu_tilde = if delta_mu == 0.0 {
        c.mu.clone()
    } else {
        (&c.mu + delta_mu * &stats.sum_x) / (1.0 + (stats.k as f64 + 1.0) * delta_mu)
    };
    let w_tilde = if delta_w == 0.0 {
        c.w.clone()
    } else {
        chol.solve(&(&c.w + delta_w * &stats.sum_xy))
    };
    (mu_tilde, w_tilde)
}

/// Full posterior mixture from precomputed sufficient statistics.
pub fn posterior_from_stats(model: &PriorModel, stats: &SufficientStats) -> Result<PosteriorMixture> {
    check_model_stats(model, stats)?;
    let chol = w_cholesky(model, stats)?;
    let m_count = model.n_components();
    let mut log_weights = Vec::with_capacity(m_count);
    let mut mu_tilde = Vec::with_capacity(m_count);
    let mut w_tilde = Vec::with_capacity(m_count);
    for m in 0..m_count {
        log_weights.push(
            model.components[m].weight.ln()
                - mu_exponent(model, stats, m)
                - w_exponent(model, stats, &chol, m),
        );
        let (mu, w) = shift_one(model, stats, &chol, m);
        mu_tilde.push(mu);
        w_tilde.push(w);
    }
    let weights = normalize_log_weights(&log_weights);
    let mut w_mean = DVector::zeros(model.dim);
    for (weight, w) in weights.iter().zip(&w_tilde) {
        w_mean.axpy(*weight, w, 1.0);
    }
    let delta_mu = model.delta_mu();
    let mu_posterior_var =
        model.sigma_mu * model.sigma_mu / (1.0 + (stats.k as f64 + 1.0) * delta_mu);
    let w_posterior_cov = chol.inverse() * (model.sigma_w * model.sigma_w);
    Ok(PosteriorMixture {
        weights,
        log_weights,
        mu_tilde,
        w_tilde,
        mu_posterior_var,
        w_posterior_cov,
        w_mean,
    })
}

/// Posterior of the task given a prompt and query.
pub fn posterior(
    model: &PriorModel,
    prompt: &Sequence,
    query: &DVector<f64>,
) -> Result<PosteriorMixture> {
    posterior_from_stats(model, &sufficient_stats(prompt, query)?)
}

/// Optimal next-label prediction `⟨query, w̃⟩`.
pub fn predict(model: &PriorModel, prompt: &Sequence, query: &DVector<f64>) -> Result<f64> {
    Ok(posterior(model, prompt, query)?.w_mean.dot(query))
}

/// Re-weighting diagnostic `Ψ_μ(α,β) = log(c^μ_α / c^μ_β)`.
///
/// Evaluated in the `sum_x` form, which needs no small-`σ_μ` cancellation:
/// `((k+1)(‖μ_β‖² − ‖μ_α‖²) − 2(μ_β − μ_α)ᵀ s) / (2σ_x²(1+(k+1)δ_μ))`.
pub fn psi_mu(model: &PriorModel, stats: &SufficientStats, alpha: usize, beta: usize) -> Result<f64> {
    check_model_stats(model, stats)?;
    check_pair(model, alpha, beta)?;
    if model.delta_mu() == 0.0 {
        return Ok(0.0);
    }
    let mu_a = &model.components[alpha].mu;
    let mu_b = &model.components[beta].mu;
    let k1 = stats.k as f64 + 1.0;
    let numerator =
        k1 * (mu_b.norm_squared() - mu_a.norm_squared()) - 2.0 * (mu_b - mu_a).dot(&stats.sum_x);
    Ok(numerator / (2.0 * model.sigma_x * model.sigma_x * (1.0 + k1 * model.delta_mu())))
}

/// Re-weighting diagnostic `Ψ_w(α,β) = log(c^w_α / c^w_β)`.
pub fn psi_w(model: &PriorModel, stats: &SufficientStats, alpha: usize, beta: usize) -> Result<f64> {
    check_model_stats(model, stats)?;
    check_pair(model, alpha, beta)?;
    if model.delta_w() == 0.0 {
        return Ok(0.0);
    }
    let chol = w_cholesky(model, stats)?;
    Ok(w_exponent(model, stats, &chol, beta) - w_exponent(model, stats, &chol, alpha))
}

/// Posterior weight ratio `r(α,β) = (π_α/π_β)·exp(Ψ_μ + Ψ_w)` in log space.
pub fn weight_ratio(
    model: &PriorModel,
    stats: &SufficientStats,
    alpha: usize,
    beta: usize,
) -> Result<WeightRatio> {
    let log = model.components[alpha].weight.ln() - model.components[beta].weight.ln()
        + psi_mu(model, stats, alpha, beta)?
        + psi_w(model, stats, alpha, beta)?;
    Ok(WeightRatio { log, value: log.exp() })
}

/// Large-`k` limits of the diagnostics for a given in-context task:
/// `Ψ_μ → (‖μ_β−μ*‖² − ‖μ_α−μ*‖²)/(2σ_μ²)` and the `Ψ_w` analogue.
pub fn psi_limits(
    model: &PriorModel,
    source: &InContextSource,
    alpha: usize,
    beta: usize,
) -> Result<(f64, f64)> {
    check_pair(model, alpha, beta)?;
    let a = &model.components[alpha];
    let b = &model.components[beta];
    let limit_mu = ((&b.mu - &source.mu_star).norm_squared()
        - (&a.mu - &source.mu_star).norm_squared())
        / (2.0 * model.sigma_mu * model.sigma_mu);
    let limit_w = ((&b.w - &source.w_star).norm_squared()
        - (&a.w - &source.w_star).norm_squared())
        / (2.0 * model.sigma_w * model.sigma_w);
    Ok((limit_mu, limit_w))
}

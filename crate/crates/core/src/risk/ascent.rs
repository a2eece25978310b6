//! Misleading-task forecast: which component the prompt inputs retrieve
//! first, and whether retrieving it raises the risk above the zero-shot level.

use crate::model::{InContextSource, PriorModel};
use crate::rng::StreamSeed;
use crate::Result;

use super::{mc_learning_risk, RiskPoint};

/// Forecast of the rise-then-fall risk shape.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentForecast {
    /// The most misleading component (0-based): the one the in-context input
    /// distribution and labels jointly retrieve fastest.
    pub alpha_star: usize,
    /// Risk of predicting with that component's function forever:
    /// `E⟨x, w_α − w*⟩² = (⟨μ*, w_α − w*⟩)² + τ_x²‖w_α − w*‖²`.
    pub limit_risk: f64,
    /// Monte-Carlo risk at `k = 0`.
    pub zero_shot_risk: RiskPoint,
    /// True when the retrieved-component plateau exceeds the zero-shot risk.
    pub ascent_predicted: bool,
}

/// Scores each component's retrieval speed and compares the retrieved
/// plateau with the zero-shot risk.
pub fn early_ascent_limit(
    model: &PriorModel,
    source: &InContextSource,
    n_trials: u64,
    seed: StreamSeed,
) -> Result<AscentForecast> {
    let d = model.dim as f64;
    let tau2 = source.tau_x * source.tau_x;
    let mut alpha_star = 0;
    let mut best = f64::INFINITY;
    for (m, c) in model.components.iter().enumerate() {
        let mu_gap = (&c.mu - &source.mu_star).norm_squared();
        let w_gap = &c.w - &source.w_star;
        let score = mu_gap / (2.0 * model.sigma_x * model.sigma_x)
            + (w_gap.dot(&source.mu_star).powi(2) + d * tau2 * w_gap.norm_squared())
                / (2.0 * model.sigma_y * model.sigma_y);
        if score < best {
            best = score;
            alpha_star = m;
        }
    }
    let w_gap = &model.components[alpha_star].w - &source.w_star;
    let limit_risk = w_gap.dot(&source.mu_star).powi(2) + tau2 * w_gap.norm_squared();
    let zero_shot_risk = mc_learning_risk(model, source, 0, n_trials, seed)?;
    Ok(AscentForecast {
        alpha_star,
        limit_risk,
        zero_shot_risk,
        ascent_predicted: zero_shot_risk.estimate < limit_risk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn d1_preset_selects_misleading_component() {
        let scenario = scenarios::early_ascent(1);
        let forecast =
            early_ascent_limit(&scenario.prior, &scenario.source, 500, StreamSeed::new(1))
                .unwrap();
        assert_eq!(forecast.alpha_star, 0);
        // w_1 - w* = -2 in d=1: limit risk = 4 + tau^2 * 4 = 8.
        assert!((forecast.limit_risk - 8.0).abs() < 1e-12);
        assert!(forecast.ascent_predicted);
    }

    #[test]
    fn matching_function_predicts_no_ascent() {
        let mut scenario = scenarios::early_ascent(1);
        // Make the selected component's function agree with the task.
        scenario.prior.components[0].w = scenario.source.w_star.clone();
        let forecast =
            early_ascent_limit(&scenario.prior, &scenario.source, 200, StreamSeed::new(2))
                .unwrap();
        assert_eq!(forecast.alpha_star, 0);
        assert_eq!(forecast.limit_risk, 0.0);
        assert!(!forecast.ascent_predicted);
    }
}
